use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which Bellman operator a solve applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMode {
    /// Reward plus the information term, maximized over both `π` and `q`.
    EmpoweredFull,
    /// Plain max-operator value iteration; `β` is ignored.
    Classical,
    /// Log-sum-exp backup against a fixed action prior.
    SoftFixedPrior,
    /// Soft backup against the uniform prior (cumulative entropy bonus).
    EntropyUniform,
}

impl SolverMode {
    pub const ALL: [SolverMode; 4] = [
        SolverMode::EmpoweredFull,
        SolverMode::Classical,
        SolverMode::SoftFixedPrior,
        SolverMode::EntropyUniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SolverMode::EmpoweredFull => "empowered-full",
            SolverMode::Classical => "classical",
            SolverMode::SoftFixedPrior => "soft-fixed-prior",
            SolverMode::EntropyUniform => "entropy-uniform",
        }
    }
}

impl fmt::Display for SolverMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverMode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidTradeoff(format!("unknown mode `{s}`")))
    }
}

/// Weights on extrinsic reward (`alpha`) and on the information term
/// (`beta`), plus the operator selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    pub alpha: f64,
    pub beta: f64,
    pub mode: SolverMode,
}

impl TradeoffConfig {
    pub fn new(alpha: f64, beta: f64, mode: SolverMode) -> Result<Self> {
        let cfg = Self { alpha, beta, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn empowered(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, SolverMode::EmpoweredFull)
    }

    pub fn classical(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0, SolverMode::Classical)
    }

    /// Mode implied by a bare `(alpha, beta)` pair: `beta = 0` selects the
    /// classical operator, anything else the full empowered operator.
    pub fn from_pair(alpha: f64, beta: f64) -> Result<Self> {
        let mode = if beta == 0.0 {
            SolverMode::Classical
        } else {
            SolverMode::EmpoweredFull
        };
        Self::new(alpha, beta, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidTradeoff(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidTradeoff(format!("beta must be >= 0, got {}", self.beta)));
        }
        if self.mode != SolverMode::Classical && self.beta <= 0.0 {
            return Err(Error::InvalidTradeoff(format!(
                "mode {} requires beta > 0",
                self.mode
            )));
        }
        Ok(())
    }

    /// `beta` as seen by the operator: zero in classical mode.
    pub fn effective_beta(&self) -> f64 {
        match self.mode {
            SolverMode::Classical => 0.0,
            _ => self.beta,
        }
    }
}
