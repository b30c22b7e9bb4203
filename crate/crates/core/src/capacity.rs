//! Blahut-Arimoto alternating maximization.
//!
//! Two entry points share one alternation kernel:
//!
//! * [`channel_capacity`] computes `max_π I(A; Y)` for a discrete memoryless
//!   channel `P(y|a)`.
//! * [`inner_solve`] solves the per-state maximization inside one step of
//!   empowered value iteration, where each action additionally carries the
//!   offset `α·R(s,a) + γ·E[V(s')]`.
//!
//! Each sweep alternates a Bayes posterior `q(a|y) ∝ P(y|a)·π(a)` and an
//! exponential reweighting `π(a) ∝ exp((offset_a + β·E_{P(·|a)}[ln q(a|y)]) / β)`.
//! Iteration stops once the largest absolute change of any `π` or `q` entry
//! between sweeps drops below the tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::numerics::{is_simplex, max_abs_diff, soft_maximum, softmax_into, weighted_log};
use crate::tables::ValueVector;
use crate::tradeoff::{SolverMode, TradeoffConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerSettings {
    /// Threshold on the max-abs change of `π` and `q` entries.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for InnerSettings {
    fn default() -> Self {
        Self {
            tolerance: 5e-4,
            max_iterations: 10_000,
        }
    }
}

impl InnerSettings {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        let s = Self { tolerance, max_iterations };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidSettings(format!(
                "inner tolerance must be > 0, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidSettings("inner max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// History of one alternation run.
///
/// `objective_per_iteration[m]` is the objective evaluated at `q⁽ᵐ⁾` with
/// the policy that maximizes against it; the last entry belongs to the
/// returned posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerLoopTrace {
    pub iterations: usize,
    pub objective_per_iteration: Vec<f64>,
    pub final_residual: f64,
    pub converged: bool,
}

impl InnerLoopTrace {
    pub fn final_objective(&self) -> f64 {
        *self.objective_per_iteration.last().expect("trace is never empty")
    }
}

/// A discrete channel `P(y|a)`, row-major `(a, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    n_inputs: usize,
    n_outputs: usize,
    probs: Vec<f64>,
}

impl Channel {
    pub fn new(n_inputs: usize, n_outputs: usize, probs: Vec<f64>) -> Result<Self> {
        if n_inputs == 0 || n_outputs == 0 {
            return Err(Error::EmptyActionSet);
        }
        if probs.len() != n_inputs * n_outputs {
            return Err(Error::Shape {
                expected: n_inputs * n_outputs,
                actual: probs.len(),
            });
        }
        let ch = Self { n_inputs, n_outputs, probs };
        if let Some(a) = (0..n_inputs).find(|&a| !is_simplex(ch.row(a))) {
            return Err(Error::InvalidMdp(format!("channel row {a} is not a distribution")));
        }
        Ok(ch)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_outputs = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n_outputs) {
            return Err(Error::Shape { expected: n_outputs, actual: r.len() });
        }
        Self::new(rows.len(), n_outputs, rows.concat())
    }

    /// Binary symmetric channel with the given crossover probability.
    pub fn binary_symmetric(crossover: f64) -> Result<Self> {
        Self::new(2, 2, vec![1.0 - crossover, crossover, crossover, 1.0 - crossover])
    }

    /// Channel `P(s'|s,a)` restricted to the states reachable from `s`.
    /// Output `k` corresponds to `mdp.reachable(s)[k]`.
    pub fn from_state(mdp: &Mdp, s: usize) -> Self {
        let outputs = mdp.reachable(s);
        let na = mdp.n_actions();
        let mut probs = vec![0.0; na * outputs.len()];
        for a in 0..na {
            for &(next, p) in mdp.successors(s, a) {
                let k = outputs.binary_search(&next).expect("successor is reachable");
                probs[a * outputs.len() + k] = p;
            }
        }
        Self {
            n_inputs: na,
            n_outputs: outputs.len(),
            probs,
        }
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.probs[a * self.n_outputs..(a + 1) * self.n_outputs]
    }

    pub fn get(&self, a: usize, y: usize) -> f64 {
        self.probs[a * self.n_outputs + y]
    }

    /// `I(A; Y)` in nats for input distribution `input`.
    pub fn mutual_information(&self, input: &[f64]) -> f64 {
        let marginal: Vec<f64> = (0..self.n_outputs)
            .map(|y| (0..self.n_inputs).map(|a| input[a] * self.get(a, y)).sum())
            .collect();
        let mut mi = 0.0;
        for (a, &pa) in input.iter().enumerate().take(self.n_inputs) {
            if pa == 0.0 {
                continue;
            }
            for (y, &r) in marginal.iter().enumerate() {
                let p = self.get(a, y);
                if p > 0.0 {
                    mi += pa * p * (p / r).ln();
                }
            }
        }
        mi.max(0.0)
    }
}

/// Posterior `q(a|y)` for every channel output, row-major `(y, a)`.
/// Outputs with zero marginal probability are masked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSlice {
    n_actions: usize,
    probs: Vec<f64>,
    support: Vec<bool>,
}

impl PosteriorSlice {
    pub fn n_outputs(&self) -> usize {
        self.support.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn is_supported(&self, y: usize) -> bool {
        self.support[y]
    }

    pub fn get(&self, y: usize, a: usize) -> f64 {
        self.probs[y * self.n_actions + a]
    }

    /// The distribution over actions for output `y`, or `None` if masked.
    pub fn row(&self, y: usize) -> Option<&[f64]> {
        self.support[y].then(|| &self.probs[y * self.n_actions..(y + 1) * self.n_actions])
    }

    /// Max-abs difference over outputs supported in either slice.
    pub fn max_abs_diff(&self, other: &PosteriorSlice) -> f64 {
        let mut worst: f64 = 0.0;
        for y in 0..self.support.len() {
            if self.support[y] || other.support[y] {
                let r = y * self.n_actions..(y + 1) * self.n_actions;
                worst = worst.max(max_abs_diff(&self.probs[r.clone()], &other.probs[r]));
            }
        }
        worst
    }
}

/// Bayes posterior `q(a|y) = P(y|a)π(a) / Σ_a' P(y|a')π(a')`.
pub fn posterior_update(policy_row: &[f64], channel: &Channel) -> PosteriorSlice {
    let na = channel.n_inputs;
    let ny = channel.n_outputs;
    let mut probs = vec![0.0; ny * na];
    let mut support = vec![false; ny];
    for y in 0..ny {
        let row = &mut probs[y * na..(y + 1) * na];
        let mut total = 0.0;
        for a in 0..na {
            row[a] = channel.get(a, y) * policy_row[a];
            total += row[a];
        }
        if total > 0.0 {
            support[y] = true;
            for v in row.iter_mut() {
                *v /= total;
            }
        }
    }
    PosteriorSlice { n_actions: na, probs, support }
}

/// `E_{P(·|a)}[ln q(a|y)]` per action. `-inf` when some reachable `y` has
/// `q(a|y) = 0`.
fn expected_log_posterior(q: &PosteriorSlice, channel: &Channel, out: &mut [f64]) {
    for (a, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (y, &p) in channel.row(a).iter().enumerate() {
            if p > 0.0 {
                acc += weighted_log(p, q.get(y, a));
            }
        }
        *o = acc;
    }
}

/// Input update of classical Blahut-Arimoto:
/// `π(a) ∝ exp(E_{P(·|a)}[ln q(a|y)])`.
pub fn empowerment_policy_update(q: &PosteriorSlice, channel: &Channel) -> Result<Vec<f64>> {
    let mut exponents = vec![0.0; channel.n_inputs];
    expected_log_posterior(q, channel, &mut exponents);
    let mut out = vec![0.0; channel.n_inputs];
    softmax_into(&exponents, 1.0, &mut out)?;
    Ok(out)
}

/// Result of one alternation run.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternation {
    pub policy: Vec<f64>,
    pub posterior: PosteriorSlice,
    /// `β · log Σ_a exp(κ_a / β)` at the returned posterior.
    pub objective: f64,
    pub trace: InnerLoopTrace,
}

/// Alternates posterior and policy updates from `initial`, maximizing
/// `Σ_a π(a)[offset_a + β·E[ln q(a|y)] - β·ln π(a)]`.
fn alternate(
    channel: &Channel,
    offsets: &[f64],
    beta: f64,
    initial: &[f64],
    settings: &InnerSettings,
) -> Result<Alternation> {
    let na = channel.n_inputs;
    let mut policy = initial.to_vec();
    let mut next_policy = vec![0.0; na];
    let mut posterior = posterior_update(&policy, channel);
    let mut kappa = vec![0.0; na];
    let mut objectives = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    let fill_kappa = |q: &PosteriorSlice, kappa: &mut [f64]| {
        expected_log_posterior(q, channel, kappa);
        for (k, &off) in kappa.iter_mut().zip(offsets) {
            *k = off + beta * *k;
        }
    };

    fill_kappa(&posterior, &mut kappa);
    objectives.push(soft_maximum(&kappa, beta)?);

    while iterations < settings.max_iterations {
        softmax_into(&kappa, beta, &mut next_policy)?;
        let next_posterior = posterior_update(&next_policy, channel);
        residual = max_abs_diff(&next_policy, &policy).max(next_posterior.max_abs_diff(&posterior));
        std::mem::swap(&mut policy, &mut next_policy);
        posterior = next_posterior;
        iterations += 1;

        fill_kappa(&posterior, &mut kappa);
        objectives.push(soft_maximum(&kappa, beta)?);
        if residual < settings.tolerance {
            break;
        }
    }

    let objective = *objectives.last().unwrap();
    Ok(Alternation {
        policy,
        posterior,
        objective,
        trace: InnerLoopTrace {
            iterations,
            objective_per_iteration: objectives,
            final_residual: residual,
            converged: residual < settings.tolerance,
        },
    })
}

/// Outcome of [`channel_capacity`].
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// `I(A; Y)` in nats at `input_dist`.
    pub capacity: f64,
    pub input_dist: Vec<f64>,
    pub posterior: PosteriorSlice,
    pub trace: InnerLoopTrace,
}

impl CapacityResult {
    pub fn converged(&self) -> bool {
        self.trace.converged
    }
}

/// Channel capacity by Blahut-Arimoto from the uniform input distribution.
///
/// Hitting `max_iterations` is not an error; inspect `trace.converged`.
pub fn channel_capacity(channel: &Channel, settings: &InnerSettings) -> Result<CapacityResult> {
    let uniform = vec![1.0 / channel.n_inputs as f64; channel.n_inputs];
    channel_capacity_from(channel, &uniform, settings)
}

/// Channel capacity from a caller-chosen initial input distribution, which
/// must put positive mass on every input.
pub fn channel_capacity_from(
    channel: &Channel,
    initial: &[f64],
    settings: &InnerSettings,
) -> Result<CapacityResult> {
    settings.validate()?;
    if initial.len() != channel.n_inputs {
        return Err(Error::Shape {
            expected: channel.n_inputs,
            actual: initial.len(),
        });
    }
    if !is_simplex(initial) || initial.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidSettings(
            "initial input distribution must be a full-support simplex".into(),
        ));
    }
    let offsets = vec![0.0; channel.n_inputs];
    let run = alternate(channel, &offsets, 1.0, initial, settings)?;
    Ok(CapacityResult {
        capacity: channel.mutual_information(&run.policy),
        input_dist: run.policy,
        posterior: run.posterior,
        trace: run.trace,
    })
}

/// Per-state solution of the inner maximization.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub state: usize,
    /// `π(a|s)`.
    pub policy: Vec<f64>,
    /// `q(a|s', s)` with output `k` meaning `next_states[k]`.
    pub posterior: PosteriorSlice,
    pub next_states: Vec<usize>,
    /// The achieved `B_{q,π}V(s)`.
    pub objective: f64,
    pub trace: InnerLoopTrace,
}

/// Per-action offsets `α·R(s,a) + γ·E_{P(·|s,a)}[V(s')]`.
pub fn action_offsets(mdp: &Mdp, s: usize, values: &[f64], alpha: f64) -> Vec<f64> {
    let gamma = mdp.discount();
    (0..mdp.n_actions())
        .map(|a| {
            let ev: f64 = mdp.successors(s, a).iter().map(|&(n, p)| p * values[n]).sum();
            alpha * mdp.reward(s, a) + gamma * ev
        })
        .collect()
}

/// Solves `max_{π,q} B_{q,π}V(s)` for one state by alternating the Bayes
/// posterior against `P(·|s,a)` and the reward-augmented policy update,
/// starting from the uniform policy.
pub fn inner_solve(
    mdp: &Mdp,
    state: usize,
    values: &ValueVector,
    config: &TradeoffConfig,
    settings: &InnerSettings,
) -> Result<InnerSolution> {
    config.validate()?;
    if config.mode != SolverMode::EmpoweredFull {
        return Err(Error::InvalidTradeoff(format!(
            "inner_solve requires mode empowered-full, got {}",
            config.mode
        )));
    }
    if values.len() != mdp.n_states() {
        return Err(Error::Shape {
            expected: mdp.n_states(),
            actual: values.len(),
        });
    }
    settings.validate()?;
    Ok(inner_solve_unchecked(mdp, state, values, config, settings))
}

pub(crate) fn inner_solve_unchecked(
    mdp: &Mdp,
    state: usize,
    values: &[f64],
    config: &TradeoffConfig,
    settings: &InnerSettings,
) -> InnerSolution {
    let channel = Channel::from_state(mdp, state);
    let offsets = action_offsets(mdp, state, values, config.alpha);
    let na = mdp.n_actions();
    let uniform = vec![1.0 / na as f64; na];
    // Uniform start keeps every action in the support, so at least one
    // exponent stays finite.
    let run = alternate(&channel, &offsets, config.beta, &uniform, settings)
        .expect("finite offsets and full-support start");
    InnerSolution {
        state,
        policy: run.policy,
        posterior: run.posterior,
        next_states: mdp.reachable(state).to_vec(),
        objective: run.objective,
        trace: run.trace,
    }
}
