//! A-priori bounds on optimal values and on the number of outer sweeps.

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::tradeoff::TradeoffConfig;

/// Per-step magnitude bound `η = α·max|R| + β·ln|A|`.
pub fn eta(mdp: &Mdp, config: &TradeoffConfig) -> f64 {
    config.alpha * mdp.max_abs_reward()
        + config.effective_beta() * (mdp.n_actions() as f64).ln()
}

/// `η / (1 - γ)`, an upper bound on `‖V*‖∞`.
pub fn value_upper_bound(mdp: &Mdp, config: &TradeoffConfig) -> f64 {
    eta(mdp, config) / (1.0 - mdp.discount())
}

/// Smallest `i` with `γ^i · η/(1-γ) ≤ ε`, i.e. `⌈log_γ(ε(1-γ)/η)⌉`.
///
/// Sweeps from zero initial values reach `‖V* - V_i‖∞ ≤ ε` after this many
/// applications. `γ = 0` returns 1.
pub fn iteration_bound(epsilon: f64, gamma: f64, eta: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::InvalidSettings(format!("discount {gamma} outside [0, 1)")));
    }
    let limit = eta / (1.0 - gamma);
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(Error::Domain { epsilon, limit });
    }
    if gamma == 0.0 {
        return Ok(1);
    }
    let exponent = (epsilon * (1.0 - gamma) / eta).ln() / gamma.ln();
    // Exact powers such as log_0.5(0.125) come out as 3.0000000000000004.
    let nearest = exponent.round();
    let steps = if (exponent - nearest).abs() <= 1e-9 * nearest.abs().max(1.0) {
        nearest
    } else {
        exponent.ceil()
    };
    Ok(steps.max(1.0) as u64)
}
