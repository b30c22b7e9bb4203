//! Executes configured sweeps and writes their artifacts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::{Environment, RunConfig};
use crate::error::{Error, Result};
use crate::export::{save_trace, ResultDocument};
use crate::render::Legend;
use crate::solve::{solve, SolveResult, SolveSettings};
use crate::tradeoff::{SolverMode, TradeoffConfig};

/// Tradeoff for one sweep entry. `β = 0` always selects classical VI.
pub fn tradeoff_for(mode: SolverMode, alpha: f64, beta: f64) -> Result<TradeoffConfig> {
    if beta == 0.0 || mode == SolverMode::Classical {
        TradeoffConfig::classical(alpha)
    } else {
        TradeoffConfig::new(alpha, beta, mode)
    }
}

/// File stem shared by every artifact of one `(α, β)` entry.
pub fn artifact_stem(alpha: f64, beta: f64) -> String {
    format!("alpha{alpha}_beta{beta}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunEntry {
    pub alpha: f64,
    pub beta: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    pub result_path: PathBuf,
    pub trace_path: PathBuf,
    pub image_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub entries: Vec<RunEntry>,
}

impl RunSummary {
    pub fn all_converged(&self) -> bool {
        self.entries.iter().all(|e| e.converged)
    }
}

fn write_entry(
    cfg: &RunConfig,
    env: &Environment,
    (alpha, beta): (f64, f64),
    result: &SolveResult,
) -> Result<RunEntry> {
    let dir = &cfg.output.dir;
    let stem = artifact_stem(alpha, beta);
    let result_path = dir.join(format!("{stem}.json"));
    let trace_path = dir.join(format!("{stem}_trace.csv"));
    ResultDocument::from_result(result, cfg.output.inverse_dynamics).save(&result_path)?;
    save_trace(&trace_path, &result.report.residual_per_iteration)?;
    let image_path = match (&env.layout, cfg.output.render) {
        (Some(layout), true) => {
            let ext = cfg.output.format.extension();
            let path = dir.join(format!("{stem}.{ext}"));
            let image = cfg.output.format.render(&result.values, layout)?;
            write(&path, &image)?;
            write(&dir.join(format!("{stem}.legend.txt")), &Legend::of(&result.values).to_text())?;
            Some(path)
        }
        _ => None,
    };
    Ok(RunEntry {
        alpha,
        beta,
        converged: result.report.converged,
        outer_iterations: result.report.outer_iterations,
        result_path,
        trace_path,
        image_path,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Solves every sweep entry and writes, per entry, a result document, a
/// residual trace and (for grid environments with rendering on) a heatmap
/// with its legend. Entries run concurrently.
pub fn run_solve(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.check_inputs()?;
    let env = cfg.environment.load(&cfg.dynamics)?;
    let settings = cfg.solver.settings()?;
    let pairs = cfg.sweep.resolve()?;
    let tradeoffs = pairs
        .iter()
        .map(|&(a, b)| tradeoff_for(cfg.solver.mode, a, b))
        .collect::<Result<Vec<_>>>()?;
    std::fs::create_dir_all(&cfg.output.dir).map_err(|e| Error::io(&cfg.output.dir, e))?;
    let entries = pairs
        .par_iter()
        .zip(tradeoffs.par_iter())
        .map(|(&pair, tradeoff)| {
            let result = solve(&env.mdp, tradeoff, &settings)?;
            write_entry(cfg, &env, pair, &result)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunSummary { entries })
}

/// Solves one pair in memory.
pub fn solve_pair(env: &Environment, mode: SolverMode, alpha: f64, beta: f64, settings: &SolveSettings) -> Result<SolveResult> {
    solve(&env.mdp, &tradeoff_for(mode, alpha, beta)?, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{EnvironmentConfig, SweepConfig};
    use crate::export::load_trace;
    use crate::solve::classical_vi;

    fn grid_a_config(dir: &Path, pairs: Vec<[f64; 2]>) -> RunConfig {
        let mut cfg = RunConfig::new(
            EnvironmentConfig::builtin("grid-a"),
            SweepConfig {
                preset: None,
                pairs: Some(pairs),
            },
        );
        cfg.output.dir = dir.to_path_buf();
        cfg.output.render = true;
        cfg
    }

    #[test]
    fn writes_one_result_and_trace_per_pair() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = grid_a_config(dir.path(), vec![[0.0, 1.0], [1.0, 0.0]]);
        let summary = run_solve(&cfg).unwrap();
        assert!(summary.all_converged());
        assert_eq!(summary.entries.len(), 2);
        let count = |suffix: &str| {
            std::fs::read_dir(dir.path())
                .unwrap()
                .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(suffix))
                .count()
        };
        assert_eq!(count("_trace.csv"), 2);
        assert_eq!(count(".json"), 2);
        assert_eq!(count(".svg"), 2);
        assert_eq!(count(".legend.txt"), 2);
        for e in &summary.entries {
            let doc = ResultDocument::load(&e.result_path).unwrap();
            assert_eq!(load_trace(&e.trace_path).unwrap(), doc.report.residual_per_iteration);
        }
    }

    #[test]
    fn classical_pair_matches_oracle() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = grid_a_config(dir.path(), vec![[1.0, 0.0]]);
        let summary = run_solve(&cfg).unwrap();
        let doc = ResultDocument::load(&summary.entries[0].result_path).unwrap();
        let env = cfg.environment.load(&cfg.dynamics).unwrap();
        assert_eq!(doc.values, classical_vi(&env.mdp, cfg.solver.outer_tolerance).unwrap());
    }

    #[test]
    fn beta_zero_routes_to_classical() {
        let t = tradeoff_for(SolverMode::EmpoweredFull, 0.5, 0.0).unwrap();
        assert_eq!(t.mode, SolverMode::Classical);
        assert_eq!(tradeoff_for(SolverMode::EntropyUniform, 1.0, 0.5).unwrap().mode, SolverMode::EntropyUniform);
    }
}
