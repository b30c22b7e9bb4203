//! TOML run configuration.
//!
//! ```toml
//! [environment]
//! builtin = "grid-a"          # or: layout = "maps/rooms.txt", variant = "stochastic-b"
//!                             # or: mdp = "model.json"
//!
//! [dynamics]                  # optional overrides of the variant defaults
//! discount = 0.9
//!
//! [solver]
//! mode = "empowered-full"
//! outer_tolerance = 0.0005
//! inner_tolerance = 0.0005
//!
//! [sweep]
//! preset = "figure1"          # or: pairs = [[0.0, 1.0], [1.0, 0.0]]
//!
//! [output]
//! dir = "out"
//! render = true
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::capacity::InnerSettings;
use crate::error::{Error, Result};
use crate::gridworld::{GridDynamicsSpec, GridLayout, GridVariant, GridWorld};
use crate::mdp::Mdp;
use crate::render::ImageFormat;
use crate::solve::SolveSettings;
use crate::tables::PolicyTable;
use crate::tradeoff::SolverMode;

/// `(α, β)` pairs of the `figure1` preset, α rising while β falls.
pub const FIGURE1_PAIRS: [(f64, f64); 5] =
    [(0.0, 1.0), (0.25, 0.75), (0.5, 0.5), (0.75, 0.25), (1.0, 0.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub environment: EnvironmentConfig,
    #[serde(default, skip_serializing_if = "DynamicsOverrides::is_empty")]
    pub dynamics: DynamicsOverrides,
    #[serde(default)]
    pub solver: SolverConfig,
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<PathBuf>,
    /// Dynamics for a `layout` map; defaults to the deterministic variant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<GridVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdp: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_reward: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal_terminal: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<f64>,
    /// `[intended, horizontal, vertical, diagonal]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<[f64; 4]>,
}

impl DynamicsOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }

    pub fn apply(&self, spec: &mut GridDynamicsSpec) {
        if let Some(v) = self.goal_reward {
            spec.goal_reward = v;
        }
        if let Some(v) = self.step_reward {
            spec.step_reward = v;
        }
        if let Some(v) = self.goal_terminal {
            spec.goal_terminal = v;
        }
        if let Some(v) = self.discount {
            spec.discount = v;
        }
        if let Some([i, h, v, d]) = self.perturbation {
            spec.perturbation.intended = i;
            spec.perturbation.horizontal = h;
            spec.perturbation.vertical = v;
            spec.perturbation.diagonal = d;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub outer_tolerance: f64,
    pub inner_tolerance: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub parallel: bool,
    /// JSON policy table used as the prior in `soft-fixed-prior` mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prior: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let s = SolveSettings::default();
        Self {
            mode: SolverMode::EmpoweredFull,
            outer_tolerance: s.outer_tolerance,
            inner_tolerance: s.inner.tolerance,
            max_outer_iterations: s.max_outer_iterations,
            max_inner_iterations: s.inner.max_iterations,
            parallel: false,
            prior: None,
        }
    }
}

impl SolverConfig {
    pub fn settings(&self) -> Result<SolveSettings> {
        let prior = match &self.prior {
            Some(path) => Some(load_policy(path)?),
            None => None,
        };
        let settings = SolveSettings {
            outer_tolerance: self.outer_tolerance,
            inner: InnerSettings {
                tolerance: self.inner_tolerance,
                max_iterations: self.max_inner_iterations,
            },
            max_outer_iterations: self.max_outer_iterations,
            prior,
            parallel: self.parallel,
            ..SolveSettings::default()
        };
        settings.validate()?;
        Ok(settings)
    }
}

pub fn load_policy(path: &Path) -> Result<PolicyTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[f64; 2]>>,
}

impl SweepConfig {
    pub fn single(alpha: f64, beta: f64) -> Self {
        Self {
            preset: None,
            pairs: Some(vec![[alpha, beta]]),
        }
    }

    /// Preset pairs followed by explicit ones; never empty.
    pub fn resolve(&self) -> Result<Vec<(f64, f64)>> {
        let mut out = Vec::new();
        match self.preset.as_deref() {
            None => {}
            Some("figure1") => out.extend(FIGURE1_PAIRS),
            Some(other) => {
                return Err(Error::InvalidSettings(format!(
                    "unknown sweep preset `{other}` (expected figure1)"
                )))
            }
        }
        out.extend(self.pairs.iter().flatten().map(|&[a, b]| (a, b)));
        if out.is_empty() {
            return Err(Error::InvalidSettings("sweep has no (alpha, beta) pairs".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub render: bool,
    pub format: ImageFormat,
    /// Include `q(a|s',s)` in result documents.
    pub inverse_dynamics: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            render: false,
            format: ImageFormat::Svg,
            inverse_dynamics: false,
        }
    }
}

/// A loaded environment: the MDP plus its grid when it has one.
#[derive(Debug, Clone)]
pub struct Environment {
    pub mdp: Mdp,
    pub layout: Option<GridLayout>,
}

impl EnvironmentConfig {
    pub fn builtin(name: &str) -> Self {
        Self {
            builtin: Some(name.to_string()),
            ..Self::default()
        }
    }

    pub fn load(&self, overrides: &DynamicsOverrides) -> Result<Environment> {
        let sources = [self.builtin.is_some(), self.layout.is_some(), self.mdp.is_some()];
        if sources.iter().filter(|&&b| b).count() != 1 {
            return Err(Error::InvalidSettings(
                "environment needs exactly one of `builtin`, `layout`, `mdp`".into(),
            ));
        }
        if let Some(path) = &self.mdp {
            let mdp = Mdp::load(path)?;
            let mdp = match overrides.discount {
                Some(g) => mdp.with_discount(g)?,
                None => mdp,
            };
            return Ok(Environment { mdp, layout: None });
        }
        let (layout, mut spec) = match (&self.builtin, &self.layout) {
            (Some(name), _) => {
                let w = GridWorld::builtin(name)?;
                (w.layout, w.spec)
            }
            (_, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let layout = GridLayout::parse(&text).map_err(|e| Error::parse(path, e))?;
                let variant = self.variant.unwrap_or(GridVariant::DeterministicA);
                (layout, GridDynamicsSpec::for_variant(variant))
            }
            _ => unreachable!(),
        };
        overrides.apply(&mut spec);
        let world = GridWorld::new(layout, spec)?;
        Ok(Environment {
            mdp: world.mdp,
            layout: Some(world.layout),
        })
    }
}

impl RunConfig {
    pub fn new(environment: EnvironmentConfig, sweep: SweepConfig) -> Self {
        Self {
            environment,
            dynamics: DynamicsOverrides::default(),
            solver: SolverConfig::default(),
            sweep,
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Loads a config file. Relative paths inside it resolve against the
    /// file's directory, and referenced inputs must exist.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| Error::parse(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.environment.layout.as_mut().map(rebase);
        cfg.environment.mdp.as_mut().map(rebase);
        cfg.solver.prior.as_mut().map(rebase);
        rebase(&mut cfg.output.dir);
        cfg.check_inputs()?;
        Ok(cfg)
    }

    pub fn check_inputs(&self) -> Result<()> {
        let inputs = [&self.environment.layout, &self.environment.mdp, &self.solver.prior];
        for path in inputs.into_iter().flatten() {
            if !path.is_file() {
                return Err(Error::io(
                    path,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "file not found"),
                ));
            }
        }
        self.sweep.resolve()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[environment]
builtin = "grid-b"

[dynamics]
discount = 0.7
perturbation = [0.4, 0.2, 0.2, 0.2]

[solver]
mode = "soft-fixed-prior"
outer_tolerance = 1e-6
parallel = true

[sweep]
preset = "figure1"
pairs = [[2.0, 0.5]]

[output]
dir = "results"
render = true
format = "pgm"
"#;

    #[test]
    fn round_trip_is_value_identical() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let again = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        let minimal = RunConfig::new(EnvironmentConfig::builtin("grid-a"), SweepConfig::single(0.0, 1.0));
        assert_eq!(RunConfig::from_toml(&minimal.to_toml()).unwrap(), minimal);
    }

    #[test]
    fn parsed_fields() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.solver.mode, SolverMode::SoftFixedPrior);
        assert_eq!(cfg.solver.inner_tolerance, 5e-4);
        assert_eq!(cfg.output.format, ImageFormat::Pgm);
        let pairs = cfg.sweep.resolve().unwrap();
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[0], (0.0, 1.0));
        assert_eq!(pairs[5], (2.0, 0.5));
    }

    #[test]
    fn overrides_apply() {
        let cfg = RunConfig::from_toml(SAMPLE).unwrap();
        let env = cfg.environment.load(&cfg.dynamics).unwrap();
        assert_eq!(env.mdp.discount(), 0.7);
        assert!(env.layout.is_some());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("[environment]\nbuiltin='grid-a'\ncolour=1\n[sweep]\n").is_err());
    }

    #[test]
    fn empty_sweep_rejected() {
        assert!(SweepConfig::default().resolve().is_err());
        let bad = SweepConfig {
            preset: Some("figure9".into()),
            pairs: None,
        };
        assert!(bad.resolve().is_err());
    }

    #[test]
    fn missing_layout_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, "[environment]\nlayout = \"nope.txt\"\n[sweep]\npreset = \"figure1\"\n").unwrap();
        let err = RunConfig::load(&cfg_path).unwrap_err();
        assert!(err.to_string().contains("nope.txt"), "{err}");
    }

    #[test]
    fn relative_paths_resolve_against_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("map.txt"), "G..\n...\n").unwrap();
        let cfg_path = dir.path().join("run.toml");
        std::fs::write(&cfg_path, "[environment]\nlayout = \"map.txt\"\n[sweep]\npairs = [[1.0, 0.0]]\n").unwrap();
        let cfg = RunConfig::load(&cfg_path).unwrap();
        assert_eq!(cfg.output.dir, dir.path().join("out"));
        let env = cfg.environment.load(&cfg.dynamics).unwrap();
        assert_eq!(env.mdp.n_states(), 6);
    }

    #[test]
    fn exactly_one_environment_source() {
        let env = EnvironmentConfig {
            builtin: Some("grid-a".into()),
            mdp: Some("x.json".into()),
            ..EnvironmentConfig::default()
        };
        assert!(env.load(&DynamicsOverrides::default()).is_err());
        assert!(EnvironmentConfig::default().load(&DynamicsOverrides::default()).is_err());
    }
}
