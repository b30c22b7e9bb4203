//! Outer value iteration for every solver mode.

use serde::{Deserialize, Serialize};

use crate::bounds::{eta, iteration_bound};
use crate::capacity::{channel_capacity, Channel, InnerSettings};
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::numerics::max_abs_diff;
use crate::operator::{
    apply_optimal_operator_with, check_prior, classical_backup, inverse_dynamics_of, soft_backup,
};
use crate::tables::{InverseDynamicsTable, PolicyTable, ValueVector};
use crate::tradeoff::{SolverMode, TradeoffConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SolveSettings {
    /// Stop once `‖V_{t+1} - V_t‖∞` drops below this.
    pub outer_tolerance: f64,
    pub inner: InnerSettings,
    pub max_outer_iterations: usize,
    /// Starting values; zeros when `None`.
    pub initial_values: Option<ValueVector>,
    /// Fixed action prior for [`SolverMode::SoftFixedPrior`].
    pub prior: Option<PolicyTable>,
    /// Evaluate states of one sweep on the rayon pool.
    pub parallel: bool,
    /// Abort with [`Error::InnerNotConverged`] instead of flagging it.
    pub strict_inner: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            outer_tolerance: 5e-4,
            inner: InnerSettings::default(),
            max_outer_iterations: 10_000,
            initial_values: None,
            prior: None,
            parallel: false,
            strict_inner: false,
        }
    }
}

impl SolveSettings {
    pub fn with_tolerances(outer: f64, inner: f64) -> Self {
        Self {
            outer_tolerance: outer,
            inner: InnerSettings {
                tolerance: inner,
                ..InnerSettings::default()
            },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.outer_tolerance > 0.0 && self.outer_tolerance.is_finite()) {
            return Err(Error::InvalidSettings(format!(
                "outer tolerance must be > 0, got {}",
                self.outer_tolerance
            )));
        }
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidSettings("max_outer_iterations must be >= 1".into()));
        }
        self.inner.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: SolverMode,
    pub alpha: f64,
    pub beta: f64,
    pub discount: f64,
    pub outer_tolerance: f64,
    pub inner_tolerance: f64,
    pub outer_iterations: usize,
    /// `‖V_{t+1} - V_t‖∞` for every sweep.
    pub residual_per_iteration: Vec<f64>,
    pub eta: f64,
    /// Sweeps guaranteed to reach `outer_tolerance` from zeros; `None` when
    /// the tolerance already exceeds `η/(1-γ)`.
    pub theoretical_bound: Option<u64>,
    pub converged: bool,
    /// Number of (sweep, state) inner loops that hit their iteration cap.
    pub inner_unconverged: usize,
    pub max_inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub values: ValueVector,
    pub policy: PolicyTable,
    pub inverse_dynamics: InverseDynamicsTable,
    pub report: SolveReport,
}

struct Progress {
    values: ValueVector,
    residuals: Vec<f64>,
    converged: bool,
    inner_unconverged: usize,
    max_inner_iterations: usize,
}

/// Runs `sweep` until the sup-norm change drops below the tolerance. A zero
/// discount needs exactly one sweep.
fn iterate<F>(mdp: &Mdp, settings: &SolveSettings, mut sweep: F) -> Result<Progress>
where
    F: FnMut(&ValueVector) -> Result<(ValueVector, usize, usize)>,
{
    let ns = mdp.n_states();
    let mut values = match &settings.initial_values {
        Some(v) if v.len() != ns => {
            return Err(Error::Shape { expected: ns, actual: v.len() });
        }
        Some(v) => v.clone(),
        None => ValueVector::zeros(ns),
    };
    let mut progress = Progress {
        values: ValueVector::zeros(ns),
        residuals: Vec::new(),
        converged: false,
        inner_unconverged: 0,
        max_inner_iterations: 0,
    };
    let cap = if mdp.discount() == 0.0 { 1 } else { settings.max_outer_iterations };
    for _ in 0..cap {
        let (next, unconverged, inner_iters) = sweep(&values)?;
        let residual = max_abs_diff(&next, &values);
        progress.residuals.push(residual);
        progress.inner_unconverged += unconverged;
        progress.max_inner_iterations = progress.max_inner_iterations.max(inner_iters);
        values = next;
        if residual < settings.outer_tolerance || mdp.discount() == 0.0 {
            progress.converged = true;
            break;
        }
    }
    progress.values = values;
    Ok(progress)
}

fn report(
    mdp: &Mdp,
    config: &TradeoffConfig,
    settings: &SolveSettings,
    progress: &Progress,
) -> SolveReport {
    let eta = eta(mdp, config);
    SolveReport {
        mode: config.mode,
        alpha: config.alpha,
        beta: config.effective_beta(),
        discount: mdp.discount(),
        outer_tolerance: settings.outer_tolerance,
        inner_tolerance: settings.inner.tolerance,
        outer_iterations: progress.residuals.len(),
        residual_per_iteration: progress.residuals.clone(),
        eta,
        theoretical_bound: iteration_bound(settings.outer_tolerance, mdp.discount(), eta).ok(),
        converged: progress.converged,
        inner_unconverged: progress.inner_unconverged,
        max_inner_iterations: progress.max_inner_iterations,
    }
}

/// Solves the MDP under `config.mode` from `settings.initial_values` (zeros
/// by default). Hitting `max_outer_iterations` yields `converged = false`.
pub fn solve(mdp: &Mdp, config: &TradeoffConfig, settings: &SolveSettings) -> Result<SolveResult> {
    config.validate()?;
    settings.validate()?;
    match config.mode {
        SolverMode::Classical => solve_classical(mdp, config.alpha, settings, config),
        SolverMode::EmpoweredFull => solve_empowered(mdp, config, settings),
        SolverMode::SoftFixedPrior => {
            let prior = settings.prior.as_ref().ok_or_else(|| {
                Error::InvalidSettings("mode soft-fixed-prior requires a prior".into())
            })?;
            soft_vi(mdp, config, Some(prior), settings)
        }
        SolverMode::EntropyUniform => soft_vi(mdp, config, None, settings),
    }
}

fn solve_empowered(
    mdp: &Mdp,
    config: &TradeoffConfig,
    settings: &SolveSettings,
) -> Result<SolveResult> {
    let mut last = None;
    let progress = iterate(mdp, settings, |v| {
        let out = apply_optimal_operator_with(mdp, v, config, &settings.inner, settings.parallel)?;
        if settings.strict_inner {
            if let Some(&s) = out.unconverged_states.first() {
                return Err(Error::InnerNotConverged {
                    state: s,
                    iterations: settings.inner.max_iterations,
                    residual: f64::NAN,
                });
            }
        }
        let unconverged = out.unconverged_states.len();
        let inner_iters = out.inner_iterations.iter().copied().max().unwrap_or(0);
        let values = out.values.clone();
        last = Some(out);
        Ok((values, unconverged, inner_iters))
    })?;
    let out = last.expect("at least one sweep");
    Ok(SolveResult {
        report: report(mdp, config, settings, &progress),
        values: progress.values,
        policy: out.policy,
        inverse_dynamics: out.inverse_dynamics,
    })
}

fn greedy_policy(mdp: &Mdp, greedy: &[usize]) -> PolicyTable {
    let mut policy = PolicyTable::new(
        mdp.n_states(),
        mdp.n_actions(),
        vec![0.0; mdp.n_states() * mdp.n_actions()],
    )
    .expect("shape");
    for (s, &a) in greedy.iter().enumerate() {
        policy.row_mut(s)[a] = 1.0;
    }
    policy
}

fn solve_classical(
    mdp: &Mdp,
    alpha: f64,
    settings: &SolveSettings,
    config: &TradeoffConfig,
) -> Result<SolveResult> {
    let mut greedy = Vec::new();
    let progress = iterate(mdp, settings, |v| {
        let (next, g) = classical_backup(mdp, v, alpha);
        greedy = g;
        Ok((next, 0, 0))
    })?;
    let policy = greedy_policy(mdp, &greedy);
    Ok(SolveResult {
        report: report(mdp, config, settings, &progress),
        values: progress.values,
        inverse_dynamics: inverse_dynamics_of(mdp, &policy),
        policy,
    })
}

/// Standard max-operator value iteration on the raw rewards, from zeros,
/// until `‖V_{t+1} - V_t‖∞ < tolerance`.
pub fn classical_vi(mdp: &Mdp, tolerance: f64) -> Result<ValueVector> {
    let settings = SolveSettings {
        outer_tolerance: tolerance,
        max_outer_iterations: usize::MAX,
        ..SolveSettings::default()
    };
    settings.validate()?;
    let config = TradeoffConfig::classical(1.0)?;
    Ok(solve_classical(mdp, 1.0, &settings, &config)?.values)
}

/// Soft value iteration against a fixed prior (`None` = uniform).
///
/// The returned `inverse_dynamics` is the Bayes posterior of the soft
/// policy; the operator itself never optimizes it.
pub fn soft_vi(
    mdp: &Mdp,
    config: &TradeoffConfig,
    prior: Option<&PolicyTable>,
    settings: &SolveSettings,
) -> Result<SolveResult> {
    config.validate()?;
    settings.validate()?;
    if config.beta <= 0.0 {
        return Err(Error::InvalidTradeoff("soft value iteration requires beta > 0".into()));
    }
    let uniform;
    let prior = match prior {
        Some(p) => {
            check_prior(mdp, p)?;
            p
        }
        None => {
            uniform = PolicyTable::uniform(mdp.n_states(), mdp.n_actions());
            &uniform
        }
    };
    let mut policy = None;
    let progress = iterate(mdp, settings, |v| {
        let (next, pi) = soft_backup(mdp, v, config.alpha, config.beta, prior)?;
        policy = Some(pi);
        Ok((next, 0, 0))
    })?;
    let policy = policy.expect("at least one sweep");
    Ok(SolveResult {
        report: report(mdp, config, settings, &progress),
        values: progress.values,
        inverse_dynamics: inverse_dynamics_of(mdp, &policy),
        policy,
    })
}

/// One-step empowerment `E*(s)`: the capacity of the channel `P(·|s,·)`.
pub fn empowerment_values(mdp: &Mdp, settings: &InnerSettings) -> Result<ValueVector> {
    settings.validate()?;
    let mut out = ValueVector::zeros(mdp.n_states());
    for s in 0..mdp.n_states() {
        out[s] = channel_capacity(&Channel::from_state(mdp, s), settings)?.capacity;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Mdp {
        // s0 -> s1, s1 -> s1, reward 1 in s1
        Mdp::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0], vec![false, false], 0.5).unwrap()
    }

    fn tight() -> SolveSettings {
        SolveSettings::with_tolerances(1e-12, 1e-12)
    }

    #[test]
    fn chain_geometric_series() {
        let cfg = TradeoffConfig::empowered(1.0, 0.1).unwrap();
        let r = solve(&chain(), &cfg, &tight()).unwrap();
        assert!(r.report.converged);
        // V(s1) = 1/(1-0.5) = 2, V(s0) = 0 + 0.5·2 = 1
        assert!((r.values[0] - 1.0).abs() < 1e-10);
        assert!((r.values[1] - 2.0).abs() < 1e-10);
        assert_eq!(classical_vi(&chain(), 1e-12).unwrap().len(), 2);
        let c = classical_vi(&chain(), 1e-12).unwrap();
        assert!((c[0] - 1.0).abs() < 1e-10 && (c[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn classical_examples() {
        let zero = Mdp::new(2, 2, vec![0.5; 8], vec![0.0; 4], vec![false; 2], 0.9).unwrap();
        assert!(classical_vi(&zero, 1e-9).unwrap().iter().all(|&v| v == 0.0));

        let one = Mdp::new(1, 2, vec![1.0, 1.0], vec![0.0, 1.0], vec![false], 0.9).unwrap();
        let v = classical_vi(&one, 1e-12).unwrap();
        assert!((v[0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn soft_examples() {
        let mdp = Mdp::new(1, 2, vec![1.0, 1.0], vec![0.0, 0.0], vec![false], 0.0).unwrap();
        let cfg = TradeoffConfig::new(1.0, 1.0, SolverMode::EntropyUniform).unwrap();
        let r = solve(&mdp, &cfg, &SolveSettings::default()).unwrap();
        assert_eq!(r.values[0], 0.0);
        assert_eq!(r.report.outer_iterations, 1);

        let mdp = Mdp::new(1, 2, vec![1.0, 1.0], vec![0.0, 1.0], vec![false], 0.0).unwrap();
        let r = soft_vi(&mdp, &cfg, None, &SolveSettings::default()).unwrap();
        assert!((r.values[0] - ((1.0 + 1f64.exp()).ln() - 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn soft_fixed_prior_needs_prior() {
        let mdp = chain();
        let cfg = TradeoffConfig::new(1.0, 1.0, SolverMode::SoftFixedPrior).unwrap();
        assert!(solve(&mdp, &cfg, &SolveSettings::default()).is_err());
        let settings = SolveSettings {
            prior: Some(PolicyTable::uniform(2, 1)),
            ..SolveSettings::default()
        };
        assert!(solve(&mdp, &cfg, &settings).unwrap().report.converged);
        let bad = PolicyTable::new(2, 1, vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            soft_vi(&mdp, &cfg, Some(&bad), &SolveSettings::default()),
            Err(Error::InvalidPrior { state: 1 })
        ));
    }

    #[test]
    fn iteration_cap_is_reported() {
        let settings = SolveSettings {
            max_outer_iterations: 3,
            outer_tolerance: 1e-12,
            ..SolveSettings::default()
        };
        let cfg = TradeoffConfig::empowered(1.0, 0.5).unwrap();
        let r = solve(&chain(), &cfg, &settings).unwrap();
        assert!(!r.report.converged);
        assert_eq!(r.report.outer_iterations, 3);
        assert_eq!(r.report.residual_per_iteration.len(), 3);
    }

    #[test]
    fn zero_discount_single_sweep() {
        let mdp = chain().with_discount(0.0).unwrap();
        let cfg = TradeoffConfig::empowered(1.0, 1.0).unwrap();
        let r = solve(&mdp, &cfg, &SolveSettings::default()).unwrap();
        assert_eq!(r.report.outer_iterations, 1);
        assert!(r.report.converged);
        assert_eq!(r.report.theoretical_bound, Some(1));
    }

    #[test]
    fn initial_values_shape_checked() {
        let settings = SolveSettings {
            initial_values: Some(ValueVector::zeros(3)),
            ..SolveSettings::default()
        };
        let cfg = TradeoffConfig::empowered(1.0, 1.0).unwrap();
        assert!(solve(&chain(), &cfg, &settings).is_err());
    }

    #[test]
    fn empowerment_examples() {
        // state 0: three actions to three distinct states; others absorbing
        let ns = 4;
        let mut t = vec![0.0; ns * 3 * ns];
        for a in 0..3 {
            t[a * ns + a + 1] = 1.0;
        }
        for s in 1..ns {
            for a in 0..3 {
                t[(s * 3 + a) * ns + s] = 1.0;
            }
        }
        let mdp = Mdp::new(ns, 3, t, vec![0.0; ns * 3], vec![false, true, true, true], 0.9)
            .unwrap();
        let e = empowerment_values(&mdp, &InnerSettings::default()).unwrap();
        assert!((e[0] - 3f64.ln()).abs() < 1e-12);
        assert_eq!(&e[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let mdp = Mdp::new(
            3,
            2,
            vec![0.2, 0.5, 0.3, 0.0, 1.0, 0.0, 0.6, 0.0, 0.4, 0.1, 0.1, 0.8, 1.0, 0.0, 0.0, 0.3, 0.3, 0.4],
            vec![0.5, -0.2, 0.0, 1.0, -1.0, 0.3],
            vec![false; 3],
            0.9,
        )
        .unwrap();
        let cfg = TradeoffConfig::empowered(1.0, 1.0).unwrap();
        let serial = solve(&mdp, &cfg, &SolveSettings::default()).unwrap();
        let par = solve(&mdp, &cfg, &SolveSettings { parallel: true, ..SolveSettings::default() })
            .unwrap();
        assert_eq!(serial, par);
    }
}
