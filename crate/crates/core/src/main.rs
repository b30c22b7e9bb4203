use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use empower_core::capacity::{channel_capacity, Channel, InnerSettings};
use empower_core::config::{EnvironmentConfig, RunConfig, SweepConfig};
use empower_core::export::ResultDocument;
use empower_core::gridworld::{GridLayout, GridWorld};
use empower_core::render::{ImageFormat, Legend};
use empower_core::run::{artifact_stem, run_solve, RunSummary};
use empower_core::solve::empowerment_values;
use empower_core::tradeoff::SolverMode;
use empower_core::verify::{run_verify, Suite};
use empower_core::Error;

#[derive(Parser)]
#[command(name = "empower", version, about = "Value iteration with cumulative empowerment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one (alpha, beta) pair, or every pair in a config.
    Solve(RunArgs),
    /// Solve a sweep of (alpha, beta) pairs (default preset: figure1).
    Sweep(RunArgs),
    /// Capacity of a channel given as rows of p(y|x).
    Capacity {
        /// Rows separated by `;`, entries by `,`, e.g. "0.9,0.1;0.1,0.9".
        #[arg(long, conflicts_with = "channel")]
        matrix: Option<String>,
        /// JSON file holding an array of rows.
        #[arg(long)]
        channel: Option<PathBuf>,
        #[arg(long, default_value_t = 5e-4)]
        inner_tol: f64,
    },
    /// One-step empowerment of every state.
    Empowerment {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 5e-4)]
        inner_tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        render: bool,
    },
    /// Render a result document as a heatmap.
    Render {
        /// Result document written by `solve`.
        result: PathBuf,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, value_enum, default_value = "svg")]
        format: Format,
        /// Output image; defaults to the result path with the image extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Svg,
    Pgm,
}

impl From<Format> for ImageFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Svg => ImageFormat::Svg,
            Format::Pgm => ImageFormat::Pgm,
        }
    }
}

#[derive(Args, Clone)]
struct EnvArgs {
    /// Built-in environment: grid-a or grid-b.
    #[arg(long, conflicts_with_all = ["layout", "mdp"])]
    env: Option<String>,
    /// ASCII layout file.
    #[arg(long, conflicts_with = "mdp")]
    layout: Option<PathBuf>,
    /// Dynamics for --layout: deterministic-a or stochastic-b.
    #[arg(long, requires = "layout")]
    variant: Option<String>,
    /// MDP JSON document.
    #[arg(long)]
    mdp: Option<PathBuf>,
}

impl EnvArgs {
    fn given(&self) -> bool {
        self.env.is_some() || self.layout.is_some() || self.mdp.is_some()
    }

    fn to_config(&self) -> Result<EnvironmentConfig, Error> {
        let variant = match self.variant.as_deref() {
            None => None,
            Some(v) => Some(
                serde_json::from_value(serde_json::Value::String(v.to_string()))
                    .map_err(|_| Error::InvalidSettings(format!("unknown variant `{v}`")))?,
            ),
        };
        Ok(EnvironmentConfig {
            builtin: self.env.clone(),
            layout: self.layout.clone(),
            variant,
            mdp: self.mdp.clone(),
        })
    }

    fn layout(&self) -> Result<GridLayout, Error> {
        match (&self.env, &self.layout) {
            (Some(name), _) => Ok(GridWorld::builtin(name)?.layout),
            (_, Some(path)) => GridLayout::load(path),
            _ => Err(Error::InvalidSettings("rendering needs --env or --layout".into())),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    env: EnvArgs,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    mode: Option<SolverMode>,
    #[arg(long)]
    outer_tol: Option<f64>,
    #[arg(long)]
    inner_tol: Option<f64>,
    /// Prior policy (JSON) for soft-fixed-prior mode.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Sweep preset (sweep only).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    render: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    parallel: bool,
}

impl RunArgs {
    fn build(&self, sweep: bool) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::new(EnvironmentConfig::builtin("grid-a"), SweepConfig::default()),
        };
        if self.env.given() {
            cfg.environment = self.env.to_config()?;
        }
        match (self.alpha, self.beta) {
            (None, None) => {}
            (a, b) => {
                cfg.sweep = SweepConfig::single(a.unwrap_or(0.0), b.unwrap_or(0.0));
            }
        }
        if let Some(p) = &self.preset {
            cfg.sweep.preset = Some(p.clone());
        }
        if cfg.sweep.resolve().is_err() && self.preset.is_none() && self.alpha.is_none() && self.beta.is_none() {
            cfg.sweep = if sweep {
                SweepConfig {
                    preset: Some("figure1".into()),
                    pairs: None,
                }
            } else {
                SweepConfig::single(0.0, 1.0)
            };
        }
        if let Some(g) = self.gamma {
            cfg.dynamics.discount = Some(g);
        }
        if let Some(m) = self.mode {
            cfg.solver.mode = m;
        }
        if let Some(t) = self.outer_tol {
            cfg.solver.outer_tolerance = t;
        }
        if let Some(t) = self.inner_tol {
            cfg.solver.inner_tolerance = t;
        }
        if let Some(p) = &self.prior {
            cfg.solver.prior = Some(p.clone());
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let Some(f) = self.format {
            cfg.output.format = f.into();
        }
        cfg.output.render |= self.render;
        cfg.solver.parallel |= self.parallel;
        Ok(cfg)
    }
}

fn print_summary(summary: &RunSummary) {
    println!("{:>8} {:>8} {:>10} {:>10}  result", "alpha", "beta", "sweeps", "converged");
    for e in &summary.entries {
        println!(
            "{:>8} {:>8} {:>10} {:>10}  {}",
            e.alpha,
            e.beta,
            e.outer_iterations,
            e.converged,
            e.result_path.display()
        );
    }
}

fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, Error> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidSettings(format!("bad matrix entry `{x}`: {e}")))
                })
                .collect()
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Solve(args) => {
            let summary = run_solve(&args.build(false)?)?;
            print_summary(&summary);
            Ok(summary.all_converged())
        }
        Command::Sweep(args) => {
            let summary = run_solve(&args.build(true)?)?;
            print_summary(&summary);
            Ok(summary.all_converged())
        }
        Command::Capacity {
            matrix,
            channel,
            inner_tol,
        } => {
            let rows = match (matrix, channel) {
                (Some(m), _) => parse_matrix(&m)?,
                (None, Some(path)) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| Error::Io {
                        path: path.clone(),
                        source: e,
                    })?;
                    serde_json::from_str(&text).map_err(|e| Error::Parse {
                        path,
                        message: e.to_string(),
                    })?
                }
                (None, None) => {
                    return Err(Error::InvalidSettings("give --matrix or --channel".into()))
                }
            };
            let settings = InnerSettings::new(inner_tol, InnerSettings::default().max_iterations)?;
            let res = channel_capacity(&Channel::from_rows(&rows)?, &settings)?;
            println!("capacity_nats {}", res.capacity);
            println!("capacity_bits {}", res.capacity / std::f64::consts::LN_2);
            println!("input_distribution {:?}", res.input_dist);
            println!("iterations {} converged {}", res.trace.iterations, res.converged());
            Ok(res.converged())
        }
        Command::Empowerment {
            env,
            inner_tol,
            out,
            render,
        } => {
            let env_cfg = if env.given() {
                env.to_config()?
            } else {
                EnvironmentConfig::builtin("grid-a")
            };
            let loaded = env_cfg.load(&Default::default())?;
            let settings = InnerSettings::new(inner_tol, InnerSettings::default().max_iterations)?;
            let values = empowerment_values(&loaded.mdp, &settings)?;
            match &out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                        path: dir.clone(),
                        source: e,
                    })?;
                    let json = serde_json::to_string_pretty(&values).expect("values serialize");
                    write_file(&dir.join("empowerment.json"), &json)?;
                    if let (true, Some(layout)) = (render, &loaded.layout) {
                        write_file(&dir.join("empowerment.svg"), &ImageFormat::Svg.render(&values, layout)?)?;
                        write_file(&dir.join("empowerment.legend.txt"), &Legend::of(&values).to_text())?;
                    }
                }
                None => {
                    for (s, v) in values.iter().enumerate() {
                        println!("{s} {v}");
                    }
                }
            }
            Ok(true)
        }
        Command::Render {
            result,
            env,
            format,
            out,
        } => {
            let doc = ResultDocument::load(&result)?;
            let layout = env.layout()?;
            let format = ImageFormat::from(format);
            let image = format.render(&doc.values, &layout)?;
            let path = out.unwrap_or_else(|| {
                let stem = artifact_stem(doc.report.alpha, doc.report.beta);
                result.with_file_name(format!("{stem}.{}", format.extension()))
            });
            write_file(&path, &image)?;
            write_file(&path.with_extension("legend.txt"), &Legend::of(&doc.values).to_text())?;
            println!("{}", path.display());
            Ok(true)
        }
        Command::Verify { suite, seed } => {
            let report = run_verify(suite.parse()?, seed)?;
            print!("{}", report.table());
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("empower: a solve did not converge or a check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("empower: {e}");
            ExitCode::from(2)
        }
    }
}
