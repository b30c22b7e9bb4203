//! Result and residual-trace documents.
//!
//! Results are JSON; traces are two-column CSV. Floats are written in their
//! shortest round-trip form, so re-loading reproduces them exactly.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solve::{SolveReport, SolveResult};
use crate::tables::{InverseDynamicsTable, PolicyTable, ValueVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub values: ValueVector,
    pub policy: PolicyTable,
    /// `q(a|s',s)`; omitted unless requested since it is `|S|²·|A|` large.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_dynamics: Option<InverseDynamicsTable>,
    pub report: SolveReport,
}

impl ResultDocument {
    pub fn from_result(result: &SolveResult, include_inverse_dynamics: bool) -> Self {
        Self {
            values: result.values.clone(),
            policy: result.policy.clone(),
            inverse_dynamics: include_inverse_dynamics.then(|| result.inverse_dynamics.clone()),
            report: result.report.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::parse(path, e))
    }
}

/// `iteration,residual` rows, iterations counted from 1.
pub fn trace_to_csv(residuals: &[f64]) -> String {
    let mut out = String::from("iteration,residual\n");
    for (i, r) in residuals.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, r).unwrap();
    }
    out
}

/// Parses [`trace_to_csv`] output. Errors name the offending 1-based line.
pub fn trace_from_csv(text: &str) -> std::result::Result<Vec<f64>, String> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "iteration,residual" => {}
        _ => return Err("line 1: expected header `iteration,residual`".into()),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (iter, value) = line
            .split_once(',')
            .ok_or_else(|| format!("line {}: expected two columns", i + 1))?;
        let iter: usize = iter
            .trim()
            .parse()
            .map_err(|e| format!("line {}: bad iteration: {e}", i + 1))?;
        if iter != out.len() + 1 {
            return Err(format!("line {}: expected iteration {}, got {iter}", i + 1, out.len() + 1));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|e| format!("line {}: bad residual: {e}", i + 1))?;
        out.push(value);
    }
    Ok(out)
}

pub fn save_trace(path: &Path, residuals: &[f64]) -> Result<()> {
    std::fs::write(path, trace_to_csv(residuals)).map_err(|e| Error::io(path, e))
}

pub fn load_trace(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    trace_from_csv(&text).map_err(|m| Error::parse(path, m))
}
