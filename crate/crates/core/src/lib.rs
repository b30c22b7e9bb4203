//! Tabular value iteration for joint reward maximization and cumulative
//! empowerment in finite MDPs.
//!
//! The optimal operator augments the extrinsic reward with the information
//! term `β·E[ln q(a|s',s)/π(a|s)]` and maximizes over both the behavioral
//! policy `π` and the inverse dynamics model `q`. Each outer sweep solves
//! that maximization per state with a reward-augmented Blahut-Arimoto loop
//! and then backs values up through a log-sum-exp.
//!
//! Setting `β = 0` recovers classical value iteration, `α = 0, β = 1`
//! cumulative one-step empowerment, and fixing `q` to a prior recovers soft
//! (entropy-regularized) value iteration.

pub mod bounds;
pub mod capacity;
pub mod config;
pub mod error;
pub mod export;
pub mod gridworld;
pub mod mdp;
pub mod numerics;
pub mod operator;
pub mod random;
pub mod render;
pub mod run;
pub mod solve;
pub mod tables;
pub mod tradeoff;
pub mod verify;

pub use bounds::{eta, iteration_bound, value_upper_bound};
pub use capacity::{
    channel_capacity, empowerment_policy_update, inner_solve, posterior_update, CapacityResult,
    Channel, InnerLoopTrace, InnerSettings, InnerSolution, PosteriorSlice,
};
pub use error::{Error, Result};
pub use gridworld::{build_mdp, GridDynamicsSpec, GridLayout, GridVariant, GridWorld};
pub use mdp::{Mdp, Violation};
pub use numerics::log_sum_exp;
pub use operator::{apply_optimal_operator, evaluate_pair, OperatorOutput};
pub use solve::{classical_vi, empowerment_values, soft_vi, solve, SolveReport, SolveResult, SolveSettings};
pub use tables::{InverseDynamicsTable, PolicyTable, ValueVector};
pub use tradeoff::{SolverMode, TradeoffConfig};
