//! Seeded random fixtures for property checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::mdp::Mdp;
use crate::tables::{PolicyTable, ValueVector};

/// Shape and sparsity of a generated MDP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomMdpSpec {
    pub max_states: usize,
    pub max_actions: usize,
    pub discount: f64,
    /// Rewards are drawn uniformly from `[-reward_scale, reward_scale]`.
    pub reward_scale: f64,
    /// Probability that a successor entry is forced to zero.
    pub sparsity: f64,
}

impl Default for RandomMdpSpec {
    fn default() -> Self {
        Self {
            max_states: 5,
            max_actions: 4,
            discount: 0.9,
            reward_scale: 1.0,
            sparsity: 0.3,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random probability vector of length `n` with roughly `sparsity` of its
/// entries zeroed; at least one entry stays positive.
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize, sparsity: f64) -> Vec<f64> {
    let mut row: Vec<f64> = (0..n)
        .map(|_| if rng.gen::<f64>() < sparsity { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if row.iter().all(|&p| p == 0.0) {
        row[rng.gen_range(0..n)] = 1.0;
    }
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= total);
    row
}

/// An MDP with 2..=max_states states and 2..=max_actions actions.
pub fn random_mdp<R: Rng>(rng: &mut R, spec: &RandomMdpSpec) -> Mdp {
    let ns = rng.gen_range(2..=spec.max_states.max(2));
    let na = rng.gen_range(2..=spec.max_actions.max(2));
    random_mdp_sized(rng, ns, na, spec)
}

pub fn random_mdp_sized<R: Rng>(rng: &mut R, ns: usize, na: usize, spec: &RandomMdpSpec) -> Mdp {
    let mut transition = Vec::with_capacity(ns * na * ns);
    for _ in 0..ns * na {
        transition.extend(random_simplex(rng, ns, spec.sparsity));
    }
    let reward = (0..ns * na)
        .map(|_| rng.gen_range(-1.0..=1.0) * spec.reward_scale)
        .collect();
    Mdp::new(ns, na, transition, reward, vec![false; ns], spec.discount)
        .expect("generated MDP is valid")
}

pub fn random_values<R: Rng>(rng: &mut R, n: usize, bound: f64) -> ValueVector {
    ValueVector::new((0..n).map(|_| rng.gen_range(-bound..=bound)).collect())
}

/// A policy table with full-support rows.
pub fn random_policy<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> PolicyTable {
    let probs = (0..n_states)
        .flat_map(|_| random_simplex(rng, n_actions, 0.0))
        .collect();
    PolicyTable::new(n_states, n_actions, probs).expect("rows are simplices")
}
