//! Property suites runnable from the command line.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::bounds::{eta, iteration_bound, value_upper_bound};
use crate::capacity::{inner_solve, InnerSettings};
use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::operator::apply_optimal_operator;
use crate::random::{random_mdp, random_values, rng, RandomMdpSpec};
use crate::solve::{classical_vi, empowerment_values, solve, SolveSettings};
use crate::tradeoff::{SolverMode, TradeoffConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Contraction,
    Monotone,
    Limits,
    IterationBound,
    ValueBound,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] =
        ["contraction", "monotone", "limits", "iteration-bound", "value-bound", "all"];

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Contraction,
                Suite::Monotone,
                Suite::Limits,
                Suite::IterationBound,
                Suite::ValueBound,
            ],
            s => vec![s],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "contraction" => Suite::Contraction,
            "monotone" => Suite::Monotone,
            "limits" => Suite::Limits,
            "iteration-bound" => Suite::IterationBound,
            "value-bound" => Suite::ValueBound,
            "all" => Suite::All,
            other => return Err(Error::UnknownSuite(other.to_string())),
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [
            Suite::Contraction,
            Suite::Monotone,
            Suite::Limits,
            Suite::IterationBound,
            Suite::ValueBound,
            Suite::All,
        ]
        .iter()
        .position(|s| s == self)
        .unwrap();
        f.write_str(Self::NAMES[i])
    }
}

/// One line of the verification table. `margin` is how far inside the
/// threshold the worst case landed (negative means failure).
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub cases: usize,
    pub margin: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn table(&self) -> String {
        let mut out = format!("{:<12} {:<44} {:>6} {:>12}  result\n", "suite", "check", "cases", "margin");
        for c in &self.checks {
            out.push_str(&format!(
                "{:<12} {:<44} {:>6} {:>12.3e}  {}\n",
                c.suite.to_string(),
                c.name,
                c.cases,
                c.margin,
                if c.passed() { "PASS" } else { "FAIL" }
            ));
        }
        out
    }
}

/// Runs `suite` on fixtures drawn from `seed`.
pub fn run_verify(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let mut checks = Vec::new();
    for s in suite.expand() {
        let mut r = rng(seed ^ (s as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        match s {
            Suite::Contraction => checks.push(contraction(&mut r)?),
            Suite::Monotone => checks.extend(monotone(&mut r)?),
            Suite::Limits => checks.extend(limits(&mut r)?),
            Suite::IterationBound => checks.push(iteration_bound_check(&mut r)?),
            Suite::ValueBound => checks.push(value_bound_check(&mut r)?),
            Suite::All => unreachable!(),
        }
    }
    Ok(VerifyReport { checks })
}

fn small_mdps<R: Rng>(r: &mut R, count: usize, discount: f64) -> Vec<Mdp> {
    let spec = RandomMdpSpec {
        discount,
        ..RandomMdpSpec::default()
    };
    (0..count).map(|_| random_mdp(r, &spec)).collect()
}

fn worst(margins: impl IntoIterator<Item = f64>) -> f64 {
    margins.into_iter().fold(f64::INFINITY, f64::min)
}

/// `‖B⋆V₁ − B⋆V₂‖∞ ≤ γ‖V₁ − V₂‖∞ + 2·inner_tolerance` over 100 pairs.
fn contraction<R: Rng>(r: &mut R) -> Result<Check> {
    let inner = InnerSettings::new(1e-9, 100_000)?;
    let cfg = TradeoffConfig::empowered(1.0, 1.0)?;
    let mut margins = Vec::new();
    for mdp in small_mdps(r, 20, 0.9) {
        for _ in 0..5 {
            let v1 = random_values(r, mdp.n_states(), 10.0);
            let v2 = random_values(r, mdp.n_states(), 10.0);
            let b1 = apply_optimal_operator(&mdp, &v1, &cfg, &inner)?.values;
            let b2 = apply_optimal_operator(&mdp, &v2, &cfg, &inner)?.values;
            let limit = mdp.discount() * v1.distance(&v2) + 2.0 * inner.tolerance;
            margins.push(limit - b1.distance(&b2));
        }
    }
    Ok(Check {
        suite: Suite::Contraction,
        name: "sup-norm contraction by gamma".into(),
        cases: margins.len(),
        margin: worst(margins),
    })
}

/// Inner objective traces never decrease, and the gap to a tight reference
/// after `M` updates stays below `β·ln|A|/M`.
fn monotone<R: Rng>(r: &mut R) -> Result<Vec<Check>> {
    let tight = InnerSettings::new(1e-12, 200_000)?;
    let mut mono = Vec::new();
    let mut rate = Vec::new();
    for mdp in small_mdps(r, 50, 0.9) {
        let beta = r.gen_range(0.2..2.0);
        let cfg = TradeoffConfig::empowered(r.gen_range(0.0..2.0), beta)?;
        let v = random_values(r, mdp.n_states(), 10.0);
        let s = r.gen_range(0..mdp.n_states());
        let run = inner_solve(&mdp, s, &v, &cfg, &InnerSettings::default())?;
        let reference = inner_solve(&mdp, s, &v, &cfg, &tight)?.objective;
        let obj = &run.trace.objective_per_iteration;
        mono.extend(obj.windows(2).map(|w| w[1] - w[0] + 1e-10));
        let log_a = (mdp.n_actions() as f64).ln();
        rate.extend((1..obj.len()).map(|m| beta * log_a / m as f64 + 1e-9 - (reference - obj[m])));
    }
    Ok(vec![
        Check {
            suite: Suite::Monotone,
            name: "inner objective non-decreasing".into(),
            cases: 50,
            margin: worst(mono),
        },
        Check {
            suite: Suite::Monotone,
            name: "inner gap <= beta ln|A| / M".into(),
            cases: 50,
            margin: worst(rate),
        },
    ])
}

fn limits<R: Rng>(r: &mut R) -> Result<Vec<Check>> {
    let mut classical = Vec::new();
    let mut capacity = Vec::new();
    let mut soft = Vec::new();
    for mdp in small_mdps(r, 20, 0.9) {
        let settings = SolveSettings::with_tolerances(1e-10, 1e-10);
        let oracle = classical_vi(&mdp, 1e-10)?;
        let got = solve(&mdp, &TradeoffConfig::classical(1.0)?, &settings)?.values;
        classical.push(1e-8 - got.distance(&oracle));

        let zero = mdp.with_discount(0.0)?;
        let inner = InnerSettings::default();
        let e = empowerment_values(&zero, &inner)?;
        let got = solve(&zero, &TradeoffConfig::empowered(0.0, 1.0)?, &SolveSettings::default())?.values;
        capacity.push(1e-3 - got.distance(&e));

        let beta = 1e-3;
        let cfg = TradeoffConfig::new(1.0, beta, SolverMode::EntropyUniform)?;
        let got = solve(&mdp, &cfg, &settings)?.values;
        let limit = beta * (mdp.n_actions() as f64).ln() / (1.0 - mdp.discount()) + 1e-3;
        soft.push(limit - got.distance(&oracle));
    }
    let check = |name: &str, m: Vec<f64>| Check {
        suite: Suite::Limits,
        name: name.into(),
        cases: m.len(),
        margin: worst(m),
    };
    Ok(vec![
        check("classical mode equals classical VI", classical),
        check("gamma=0 equals one-step empowerment", capacity),
        check("soft beta=1e-3 near classical", soft),
    ])
}

/// Sweeps needed to get the residual below `ε = 1e-3` from zeros never
/// exceed the a-priori bound.
fn iteration_bound_check<R: Rng>(r: &mut R) -> Result<Check> {
    let eps = 1e-3;
    let cfg = TradeoffConfig::empowered(1.0, 1.0)?;
    let mut margins = Vec::new();
    for mdp in small_mdps(r, 20, 0.9) {
        let res = solve(&mdp, &cfg, &SolveSettings::with_tolerances(eps, 5e-4))?;
        let bound = iteration_bound(eps, mdp.discount(), eta(&mdp, &cfg))?;
        let converged = if res.report.converged { 0.0 } else { -1.0 };
        margins.push(bound as f64 - res.report.outer_iterations as f64 + converged);
    }
    Ok(Check {
        suite: Suite::IterationBound,
        name: "outer sweeps <= ceil(log_g(eps(1-g)/eta))".into(),
        cases: margins.len(),
        margin: worst(margins),
    })
}

fn value_bound_check<R: Rng>(r: &mut R) -> Result<Check> {
    let mut margins = Vec::new();
    for mdp in small_mdps(r, 20, 0.9) {
        let alpha = r.gen_range(0.0..2.0);
        let beta = r.gen_range(0.1..2.0);
        let cfg = TradeoffConfig::empowered(alpha, beta)?;
        let settings = SolveSettings::default();
        let res = solve(&mdp, &cfg, &settings)?;
        margins.push(value_upper_bound(&mdp, &cfg) + settings.outer_tolerance - res.values.sup_norm());
    }
    Ok(Check {
        suite: Suite::ValueBound,
        name: "|V*| <= eta/(1-gamma) + tol".into(),
        cases: margins.len(),
        margin: worst(margins),
    })
}
