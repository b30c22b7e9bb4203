//! Finite MDP data model, validation, and the JSON interchange format.
//!
//! Transition and reward tensors are stored densely in row-major `(s, a, s')`
//! and `(s, a)` order. A sparse successor index is built once at
//! construction so that operators only ever touch `(s, a, s')` triples with
//! positive probability.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SIMPLEX_TOLERANCE;

#[derive(Debug, Clone, PartialEq)]
pub struct Mdp {
    n_states: usize,
    n_actions: usize,
    transition: Vec<f64>,
    reward: Vec<f64>,
    terminal: Vec<bool>,
    discount: f64,
    successors: Vec<Vec<(usize, f64)>>,
    reachable: Vec<Vec<usize>>,
}

/// One broken `Mdp` invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { field: &'static str, expected: usize, actual: usize },
    NegativeProbability { state: usize, action: usize, next: usize, value: f64 },
    NonFiniteProbability { state: usize, action: usize, next: usize },
    RowSum { state: usize, action: usize, sum: f64 },
    NonFiniteReward { state: usize, action: usize },
    Discount(f64),
    TerminalNotAbsorbing { state: usize, action: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Shape { field, expected, actual } => {
                write!(f, "{field}: expected {expected} entries, got {actual}")
            }
            Violation::NegativeProbability { state, action, next, value } => write!(
                f,
                "transition[{state},{action},{next}] = {value} is negative"
            ),
            Violation::NonFiniteProbability { state, action, next } => {
                write!(f, "transition[{state},{action},{next}] is not finite")
            }
            Violation::RowSum { state, action, sum } => {
                write!(f, "transition row ({state},{action}) sums to {sum}")
            }
            Violation::NonFiniteReward { state, action } => {
                write!(f, "reward[{state},{action}] is not finite")
            }
            Violation::Discount(g) => write!(f, "discount {g} outside [0, 1)"),
            Violation::TerminalNotAbsorbing { state, action } => write!(
                f,
                "terminal state {state} is not absorbing under action {action}"
            ),
        }
    }
}

impl Mdp {
    /// Builds and validates an MDP.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        terminal: Vec<bool>,
        discount: f64,
    ) -> Result<Self> {
        let mdp = Self::new_unchecked(n_states, n_actions, transition, reward, terminal, discount)?;
        let violations = mdp.validate();
        if violations.is_empty() {
            Ok(mdp)
        } else {
            let msg: Vec<String> = violations.iter().take(5).map(|v| v.to_string()).collect();
            let more = violations.len().saturating_sub(5);
            let suffix = if more > 0 { format!(" (+{more} more)") } else { String::new() };
            Err(Error::InvalidMdp(format!("{}{suffix}", msg.join("; "))))
        }
    }

    /// Builds an MDP checking only tensor shapes. Use [`Mdp::validate`] to
    /// inspect the remaining invariants.
    pub fn new_unchecked(
        n_states: usize,
        n_actions: usize,
        transition: Vec<f64>,
        reward: Vec<f64>,
        terminal: Vec<bool>,
        discount: f64,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp(format!(
                "state and action counts must be positive (got {n_states} states, {n_actions} actions)"
            )));
        }
        let checks = [
            ("transition", n_states * n_actions * n_states, transition.len()),
            ("reward", n_states * n_actions, reward.len()),
            ("terminal", n_states, terminal.len()),
        ];
        for (field, expected, actual) in checks {
            if expected != actual {
                return Err(Error::InvalidMdp(
                    Violation::Shape { field, expected, actual }.to_string(),
                ));
            }
        }

        let mut successors = Vec::with_capacity(n_states * n_actions);
        let mut reachable = Vec::with_capacity(n_states);
        for s in 0..n_states {
            let mut seen = vec![false; n_states];
            for a in 0..n_actions {
                let base = (s * n_actions + a) * n_states;
                let row: Vec<(usize, f64)> = transition[base..base + n_states]
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > 0.0)
                    .map(|(next, &p)| (next, p))
                    .collect();
                for &(next, _) in &row {
                    seen[next] = true;
                }
                successors.push(row);
            }
            reachable.push((0..n_states).filter(|&n| seen[n]).collect());
        }

        Ok(Self {
            n_states,
            n_actions,
            transition,
            reward,
            terminal,
            discount,
            successors,
            reachable,
        })
    }

    /// Lists every invariant violation; empty iff the MDP is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let (ns, na) = (self.n_states, self.n_actions);
        let mut out = Vec::new();
        if !(0.0..1.0).contains(&self.discount) {
            out.push(Violation::Discount(self.discount));
        }
        for s in 0..ns {
            for a in 0..na {
                let row = self.transition_row(s, a);
                let mut finite = true;
                for (next, &p) in row.iter().enumerate() {
                    if !p.is_finite() {
                        finite = false;
                        out.push(Violation::NonFiniteProbability { state: s, action: a, next });
                    } else if p < 0.0 {
                        out.push(Violation::NegativeProbability {
                            state: s,
                            action: a,
                            next,
                            value: p,
                        });
                    }
                }
                let sum: f64 = row.iter().sum();
                if finite && (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                    out.push(Violation::RowSum { state: s, action: a, sum });
                }
                if !self.reward(s, a).is_finite() {
                    out.push(Violation::NonFiniteReward { state: s, action: a });
                }
                if self.terminal[s] && (row[s] - 1.0).abs() > SIMPLEX_TOLERANCE {
                    out.push(Violation::TerminalNotAbsorbing { state: s, action: a });
                }
            }
        }
        out
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn terminal(&self) -> &[bool] {
        &self.terminal
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    pub fn rewards(&self) -> &[f64] {
        &self.reward
    }

    /// `P(· | s, a)` as a dense row over next states.
    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.transition[(s * self.n_actions + a) * self.n_states + next]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.reward[s * self.n_actions + a]
    }

    /// `(s', P(s'|s,a))` pairs with positive probability, ascending in `s'`.
    pub fn successors(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.successors[s * self.n_actions + a]
    }

    /// Every `s'` reachable from `s` under some action, ascending.
    pub fn reachable(&self, s: usize) -> &[usize] {
        &self.reachable[s]
    }

    pub fn max_abs_reward(&self) -> f64 {
        self.reward.iter().map(|r| r.abs()).fold(0.0, f64::max)
    }

    /// Copy of this MDP with a different discount factor.
    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        Self::new(
            self.n_states,
            self.n_actions,
            self.transition.clone(),
            self.reward.clone(),
            self.terminal.clone(),
            discount,
        )
    }

    pub fn to_document(&self) -> MdpDocument {
        MdpDocument {
            n_states: self.n_states,
            n_actions: self.n_actions,
            discount: self.discount,
            terminal: self.terminal.clone(),
            transition: self.transition.clone(),
            reward: self.reward.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("MDP serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: MdpDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidMdp(e.to_string()))?;
        doc.into_mdp()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: MdpDocument = serde_json::from_str(&text).map_err(|e| Error::parse(path, e))?;
        doc.into_mdp()
    }
}

/// On-disk MDP document. Tensors are dense and row-major: `transition` in
/// `(s, a, s')` order, `reward` in `(s, a)` order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpDocument {
    pub n_states: usize,
    pub n_actions: usize,
    pub discount: f64,
    pub terminal: Vec<bool>,
    pub transition: Vec<f64>,
    pub reward: Vec<f64>,
}

impl MdpDocument {
    pub fn into_mdp(self) -> Result<Mdp> {
        Mdp::new(
            self.n_states,
            self.n_actions,
            self.transition,
            self.reward,
            self.terminal,
            self.discount,
        )
    }
}
