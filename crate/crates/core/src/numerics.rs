//! Stabilized log-space primitives shared by every operator.

use crate::error::{Error, Result};

/// Tolerance used for every row-sum check on probability tables.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// `log Σ exp(terms)` with max-subtraction.
///
/// Entries equal to `-inf` are excluded terms. A single term is returned
/// unchanged.
pub fn log_sum_exp(terms: &[f64]) -> Result<f64> {
    let max = max_term(terms)?;
    if terms.len() == 1 || max == f64::NEG_INFINITY || max == f64::INFINITY {
        return Ok(max);
    }
    let sum: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `temperature · log Σ exp(terms / temperature)`, evaluated as
/// `max + temperature · log Σ exp((t - max) / temperature)` so that the
/// single-term case is exact and small temperatures do not overflow.
pub fn soft_maximum(terms: &[f64], temperature: f64) -> Result<f64> {
    let max = max_term(terms)?;
    if terms.len() == 1 || !max.is_finite() {
        return Ok(max);
    }
    let sum: f64 = terms
        .iter()
        .map(|&t| ((t - max) / temperature).exp())
        .sum();
    Ok(max + temperature * sum.ln())
}

/// Writes `softmax(terms / temperature)` into `out`.
pub fn softmax_into(terms: &[f64], temperature: f64, out: &mut [f64]) -> Result<()> {
    debug_assert_eq!(terms.len(), out.len());
    let max = max_term(terms)?;
    if max == f64::NEG_INFINITY {
        return Err(Error::DegenerateChannel);
    }
    let mut sum = 0.0;
    for (o, &t) in out.iter_mut().zip(terms) {
        *o = ((t - max) / temperature).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    Ok(())
}

fn max_term(terms: &[f64]) -> Result<f64> {
    if terms.is_empty() {
        return Err(Error::EmptyActionSet);
    }
    Ok(terms.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// `p · ln(q)` with the `0 · ln 0 = 0` convention.
#[inline]
pub fn weighted_log(p: f64, q: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else {
        p * q.ln()
    }
}

/// Whether `row` is a probability vector: non-negative, summing to one.
pub fn is_simplex(row: &[f64]) -> bool {
    !row.is_empty()
        && row.iter().all(|&p| p >= 0.0 && p.is_finite())
        && (row.iter().sum::<f64>() - 1.0).abs() <= SIMPLEX_TOLERANCE
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}
