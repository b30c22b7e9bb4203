//! One application of the Bellman operators.
//!
//! * [`apply_optimal_operator`]: `B⋆V(s) = max_{π,q} B_{q,π}V(s)`, solved per
//!   state by the alternation in [`crate::capacity`] and evaluated as
//!   `β·log Σ_a exp(κ(s,a)/β)` at the converged posterior.
//! * [`soft_backup`]: the same log-sum-exp form with a fixed action prior in
//!   place of the optimized posterior.
//! * [`classical_backup`]: `max_a [α·R(s,a) + γ·E[V(s')]]`.
//! * [`evaluate_pair`]: the fixed point of `B_{q,π}` for a given pair.

use rayon::prelude::*;

use crate::capacity::{action_offsets, inner_solve_unchecked, posterior_update, Channel, InnerSettings, InnerSolution};
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::numerics::{max_abs_diff, soft_maximum, softmax_into};
use crate::tables::{InverseDynamicsTable, PolicyTable, ValueVector};
use crate::tradeoff::{SolverMode, TradeoffConfig};

/// Result of one sweep of an operator over every state.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorOutput {
    pub values: ValueVector,
    pub policy: PolicyTable,
    pub inverse_dynamics: InverseDynamicsTable,
    /// States whose inner loop hit its iteration cap.
    pub unconverged_states: Vec<usize>,
    /// Inner iterations used per state (zero for closed-form backups).
    pub inner_iterations: Vec<usize>,
}

fn check_values(mdp: &Mdp, values: &[f64]) -> Result<()> {
    if values.len() != mdp.n_states() {
        return Err(Error::Shape {
            expected: mdp.n_states(),
            actual: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidSettings("value vector has non-finite entries".into()));
    }
    Ok(())
}

/// Applies `B⋆` once. States are processed independently; with `parallel`
/// they run on the rayon pool and produce bitwise-identical output.
pub fn apply_optimal_operator(
    mdp: &Mdp,
    values: &ValueVector,
    config: &TradeoffConfig,
    inner: &InnerSettings,
) -> Result<OperatorOutput> {
    apply_optimal_operator_with(mdp, values, config, inner, false)
}

pub fn apply_optimal_operator_with(
    mdp: &Mdp,
    values: &ValueVector,
    config: &TradeoffConfig,
    inner: &InnerSettings,
    parallel: bool,
) -> Result<OperatorOutput> {
    config.validate()?;
    if config.mode != SolverMode::EmpoweredFull {
        return Err(Error::InvalidTradeoff(format!(
            "optimal operator requires mode empowered-full, got {}",
            config.mode
        )));
    }
    inner.validate()?;
    check_values(mdp, values)?;

    let solve_state = |s: usize| inner_solve_unchecked(mdp, s, values, config, inner);
    let solutions: Vec<InnerSolution> = if parallel {
        (0..mdp.n_states()).into_par_iter().map(solve_state).collect()
    } else {
        (0..mdp.n_states()).map(solve_state).collect()
    };

    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut out = OperatorOutput {
        values: ValueVector::zeros(ns),
        policy: PolicyTable::uniform(ns, na),
        inverse_dynamics: InverseDynamicsTable::empty(ns, na),
        unconverged_states: Vec::new(),
        inner_iterations: Vec::with_capacity(ns),
    };
    for sol in solutions {
        let s = sol.state;
        out.values[s] = sol.objective;
        out.policy.row_mut(s).copy_from_slice(&sol.policy);
        for (k, &next) in sol.next_states.iter().enumerate() {
            if let Some(row) = sol.posterior.row(k) {
                out.inverse_dynamics.set_slice(s, next, row);
            }
        }
        if !sol.trace.converged {
            out.unconverged_states.push(s);
        }
        out.inner_iterations.push(sol.trace.iterations);
    }
    Ok(out)
}

/// Bayes posterior of `policy` under the MDP's transitions, for every state.
pub fn inverse_dynamics_of(mdp: &Mdp, policy: &PolicyTable) -> InverseDynamicsTable {
    let mut table = InverseDynamicsTable::empty(mdp.n_states(), mdp.n_actions());
    for s in 0..mdp.n_states() {
        let channel = Channel::from_state(mdp, s);
        let q = posterior_update(policy.row(s), &channel);
        for (k, &next) in mdp.reachable(s).iter().enumerate() {
            if let Some(row) = q.row(k) {
                table.set_slice(s, next, row);
            }
        }
    }
    table
}

/// Soft backup against a fixed prior:
/// `V'(s) = β·log Σ_a prior(a|s)·exp((α·R + γ·E[V]) / β)`.
/// The returned policy is `π(a|s) ∝ prior(a|s)·exp(κ/β)`.
pub fn soft_backup(
    mdp: &Mdp,
    values: &ValueVector,
    alpha: f64,
    beta: f64,
    prior: &PolicyTable,
) -> Result<(ValueVector, PolicyTable)> {
    check_values(mdp, values)?;
    check_prior(mdp, prior)?;
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut next = ValueVector::zeros(ns);
    let mut policy = PolicyTable::uniform(ns, na);
    let mut terms = vec![0.0; na];
    for s in 0..ns {
        let offsets = action_offsets(mdp, s, values, alpha);
        for ((t, off), &p) in terms.iter_mut().zip(&offsets).zip(prior.row(s)) {
            *t = if p > 0.0 { off + beta * p.ln() } else { f64::NEG_INFINITY };
        }
        next[s] = soft_maximum(&terms, beta)?;
        softmax_into(&terms, beta, policy.row_mut(s))?;
    }
    Ok((next, policy))
}

pub(crate) fn check_prior(mdp: &Mdp, prior: &PolicyTable) -> Result<()> {
    if prior.n_states() != mdp.n_states() || prior.n_actions() != mdp.n_actions() {
        return Err(Error::Shape {
            expected: mdp.n_states() * mdp.n_actions(),
            actual: prior.probs().len(),
        });
    }
    for s in 0..mdp.n_states() {
        let row = prior.row(s);
        if row.iter().any(|&p| p < 0.0 || !p.is_finite()) || row.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidPrior { state: s });
        }
    }
    Ok(())
}

/// `max_a [α·R(s,a) + γ·E[V(s')]]` with the maximizing action (lowest index
/// on ties).
pub fn classical_backup(mdp: &Mdp, values: &[f64], alpha: f64) -> (ValueVector, Vec<usize>) {
    let ns = mdp.n_states();
    let mut next = ValueVector::zeros(ns);
    let mut greedy = vec![0; ns];
    for s in 0..ns {
        let offsets = action_offsets(mdp, s, values, alpha);
        let mut best = 0;
        for a in 1..offsets.len() {
            if offsets[a] > offsets[best] {
                best = a;
            }
        }
        next[s] = offsets[best];
        greedy[s] = best;
    }
    (next, greedy)
}

/// Per-state reward term of `B_{q,π}`:
/// `g(s) = Σ_a π(a|s)[α·R(s,a) + β·Σ_{s'} P(s'|s,a)·ln(q(a|s',s)/π(a|s))]`.
pub fn pair_reward(
    mdp: &Mdp,
    q: &InverseDynamicsTable,
    policy: &PolicyTable,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>> {
    let mut g = vec![0.0; mdp.n_states()];
    for (s, gs) in g.iter_mut().enumerate() {
        for (a, &pi) in policy.row(s).iter().enumerate() {
            if pi == 0.0 {
                continue;
            }
            let mut info = 0.0;
            if beta != 0.0 {
                for &(next, p) in mdp.successors(s, a) {
                    let qa = q.slice(s, next).map_or(0.0, |row| row[a]);
                    if qa <= 0.0 {
                        return Err(Error::InconsistentPair { state: s, action: a, next });
                    }
                    info += p * (qa / pi).ln();
                }
            }
            *gs += pi * (alpha * mdp.reward(s, a) + beta * info);
        }
    }
    Ok(g)
}

/// `P_π(s, s') = Σ_a π(a|s)·P(s'|s,a)`, dense row-major.
pub fn policy_transition(mdp: &Mdp, policy: &PolicyTable) -> Vec<f64> {
    let ns = mdp.n_states();
    let mut out = vec![0.0; ns * ns];
    for s in 0..ns {
        for (a, &pi) in policy.row(s).iter().enumerate() {
            for &(next, p) in mdp.successors(s, a) {
                out[s * ns + next] += pi * p;
            }
        }
    }
    out
}

/// Fixed point of `B_{q,π}V = g + γ·P_π·V`, by repeated application until
/// the a-posteriori error bound `γ/(1-γ)·‖V_{k+1} - V_k‖∞` drops below
/// `tolerance`.
pub fn evaluate_pair(
    mdp: &Mdp,
    q: &InverseDynamicsTable,
    policy: &PolicyTable,
    config: &TradeoffConfig,
    tolerance: f64,
) -> Result<ValueVector> {
    config.validate()?;
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::InvalidSettings(format!("tolerance must be > 0, got {tolerance}")));
    }
    let ns = mdp.n_states();
    if policy.n_states() != ns || policy.n_actions() != mdp.n_actions() {
        return Err(Error::Shape {
            expected: ns * mdp.n_actions(),
            actual: policy.probs().len(),
        });
    }
    if q.n_states() != ns || q.n_actions() != mdp.n_actions() {
        return Err(Error::Shape { expected: ns, actual: q.n_states() });
    }
    let g = pair_reward(mdp, q, policy, config.alpha, config.effective_beta())?;
    let p_pi = policy_transition(mdp, policy);
    let gamma = mdp.discount();

    let mut v = g.clone();
    if gamma == 0.0 {
        return Ok(ValueVector::new(v));
    }
    let factor = gamma / (1.0 - gamma);
    let mut next = vec![0.0; ns];
    loop {
        for s in 0..ns {
            let row = &p_pi[s * ns..(s + 1) * ns];
            next[s] = g[s] + gamma * row.iter().zip(&v).map(|(p, x)| p * x).sum::<f64>();
        }
        let delta = max_abs_diff(&next, &v);
        std::mem::swap(&mut v, &mut next);
        if factor * delta < tolerance {
            return Ok(ValueVector::new(v));
        }
    }
}
