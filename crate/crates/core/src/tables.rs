//! Value vectors and the two conditional-probability tables the solvers
//! produce: the behavioral policy `π(a|s)` and the inverse dynamics model
//! `q(a|s',s)`.

use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::is_simplex;

/// One real per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n_states: usize) -> Self {
        Self(vec![0.0; n_states])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `‖self - other‖∞`.
    pub fn distance(&self, other: &ValueVector) -> f64 {
        crate::numerics::max_abs_diff(&self.0, &other.0)
    }

    pub fn sup_norm(&self) -> f64 {
        crate::numerics::sup_norm(&self.0)
    }
}

impl Deref for ValueVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ValueVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Per-state distribution over actions, row-major `(s, a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl PolicyTable {
    pub fn new(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(Error::Shape {
                expected: n_states * n_actions,
                actual: probs.len(),
            });
        }
        Ok(Self { n_states, n_actions, probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// States whose row is not a probability simplex.
    pub fn invalid_rows(&self) -> Vec<usize> {
        (0..self.n_states).filter(|&s| !is_simplex(self.row(s))).collect()
    }
}

/// Per-`(s, s')` distribution over actions, row-major `(s, s', a)`.
///
/// `support(s, s')` is false where `s'` cannot follow `s` under the policy
/// the table was derived from; those slices are zero-filled and never read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseDynamicsTable {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
    support: Vec<bool>,
}

impl InverseDynamicsTable {
    pub fn empty(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![0.0; n_states * n_states * n_actions],
            support: vec![false; n_states * n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn is_supported(&self, s: usize, next: usize) -> bool {
        self.support[s * self.n_states + next]
    }

    /// The action distribution for `(s, s')`, or `None` when masked.
    pub fn slice(&self, s: usize, next: usize) -> Option<&[f64]> {
        if self.is_supported(s, next) {
            let base = (s * self.n_states + next) * self.n_actions;
            Some(&self.probs[base..base + self.n_actions])
        } else {
            None
        }
    }

    /// `q(a | s', s)`, zero where masked.
    pub fn get(&self, s: usize, next: usize, a: usize) -> f64 {
        self.probs[(s * self.n_states + next) * self.n_actions + a]
    }

    pub fn set_slice(&mut self, s: usize, next: usize, probs: &[f64]) {
        let base = (s * self.n_states + next) * self.n_actions;
        self.probs[base..base + self.n_actions].copy_from_slice(probs);
        self.support[s * self.n_states + next] = true;
    }

    /// Copies every slice for state `s` from `other`.
    pub fn copy_state_from(&mut self, s: usize, other: &InverseDynamicsTable) {
        let ns = self.n_states;
        let na = self.n_actions;
        let p = s * ns * na..(s + 1) * ns * na;
        self.probs[p.clone()].copy_from_slice(&other.probs[p]);
        let m = s * ns..(s + 1) * ns;
        self.support[m.clone()].copy_from_slice(&other.support[m]);
    }

    /// `(s, s')` pairs whose supported slice is not a simplex.
    pub fn invalid_slices(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for s in 0..self.n_states {
            for next in 0..self.n_states {
                if let Some(slice) = self.slice(s, next) {
                    if !is_simplex(slice) {
                        out.push((s, next));
                    }
                }
            }
        }
        out
    }

    /// Largest `|q_self - q_other|` over slices supported in either table.
    pub fn max_abs_diff(&self, other: &InverseDynamicsTable) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.support.len() {
            if self.support[i] || other.support[i] {
                let base = i * self.n_actions;
                for a in 0..self.n_actions {
                    worst = worst.max((self.probs[base + a] - other.probs[base + a]).abs());
                }
            }
        }
        worst
    }
}
