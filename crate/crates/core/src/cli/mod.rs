//! Command-line front end: `finite-ibm <subcommand> [flags]`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad configuration,
//! 3 numerical failure.

pub mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;
pub use run::{run, Outcome};

use crate::error::Error;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FINITE_IBM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "finite-ibm", version, about = "Finite-particle interacting Brownian motions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Sample,
    Simulate,
    Kernel,
    Correlate,
    DriftDiag,
    Tightness,
    Moments,
    Verify,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Equilibrium configurations, one CSV block per sample.
    Sample(CommonArgs),
    /// Trajectories of the finite-N SDE from equilibrium (or --input) starts.
    Simulate(SimulateArgs),
    /// Kernel values on a grid.
    Kernel(KernelArgs),
    /// Binned one- and two-point correlation intensities.
    Correlate(CorrelateArgs),
    /// Truncated limit drift as the window radius grows.
    DriftDiag(DriftArgs),
    /// Erf tail sums against the label cutoff.
    Tightness(TightnessArgs),
    /// Fourth moments of path increments against the lag.
    Moments(MomentsArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any key, e.g. `--set integrator.dt=1e-4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = config::parse_assignment)]
    pub set: Vec<(String, String)>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Configurations CSV to use instead of fresh samples.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub riesz_a: Option<u32>,
    #[arg(long)]
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub paths: PathArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct PathArgs {
    #[arg(long)]
    pub n_paths: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub dt_record: Option<f64>,
    /// euler-maruyama or tamed-euler.
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// airy2, bessel or ginibre.
    #[arg(long)]
    pub kernel: Option<String>,
    /// start:stop:step.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// All pairs instead of the diagonal.
    #[arg(long)]
    pub matrix: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub order: Option<u8>,
}

#[derive(Debug, Clone, Args)]
pub struct DriftArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    pub r_list: Option<Vec<f64>>,
    #[arg(long)]
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TightnessArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated label cutoffs.
    #[arg(long, value_delimiter = ',')]
    pub l_list: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub paths: PathArgs,
    /// Comma-separated lags in recording steps.
    #[arg(long, value_delimiter = ',')]
    pub lags: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// quick or full.
    #[arg(long)]
    pub suite: Option<String>,
}

fn push<T: ToString>(o: &mut Vec<(String, String)>, key: &str, v: &Option<T>) {
    if let Some(v) = v {
        o.push((key.to_string(), v.to_string()));
    }
}

fn quoted(s: &str) -> String {
    toml::Value::String(s.to_string()).to_string()
}

fn list<T: ToString>(v: &[T]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

impl CommonArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut o = self.set.clone();
        push(&mut o, "seed", &self.seed);
        push(&mut o, "output", &self.output.as_ref().map(|p| quoted(&p.to_string_lossy())));
        push(&mut o, "input", &self.input.as_ref().map(|p| quoted(&p.to_string_lossy())));
        push(&mut o, "model.family", &self.model.as_deref().map(quoted));
        push(&mut o, "model.n", &self.n);
        push(&mut o, "model.beta", &self.beta.map(float));
        push(&mut o, "model.alpha", &self.alpha.map(float));
        push(&mut o, "model.riesz_a", &self.riesz_a);
        push(&mut o, "sampler.n_samples", &self.n_samples);
        o
    }
}

/// TOML float literal (keeps integral values typed as floats).
fn float(x: f64) -> String {
    toml::Value::Float(x).to_string()
}

impl PathArgs {
    fn overrides(&self, o: &mut Vec<(String, String)>) {
        push(o, "simulate.n_paths", &self.n_paths);
        push(o, "integrator.dt", &self.dt.map(float));
        push(o, "integrator.t_final", &self.t_final.map(float));
        push(o, "integrator.dt_record", &self.dt_record.map(float));
        push(o, "integrator.scheme", &self.scheme.as_deref().map(quoted));
    }
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Sample(_) => CommandKind::Sample,
            Command::Simulate(_) => CommandKind::Simulate,
            Command::Kernel(_) => CommandKind::Kernel,
            Command::Correlate(_) => CommandKind::Correlate,
            Command::DriftDiag(_) => CommandKind::DriftDiag,
            Command::Tightness(_) => CommandKind::Tightness,
            Command::Moments(_) => CommandKind::Moments,
            Command::Verify(_) => CommandKind::Verify,
        }
    }

    fn common(&self) -> &CommonArgs {
        match self {
            Command::Sample(c) => c,
            Command::Simulate(a) => &a.common,
            Command::Kernel(a) => &a.common,
            Command::Correlate(a) => &a.common,
            Command::DriftDiag(a) => &a.common,
            Command::Tightness(a) => &a.common,
            Command::Moments(a) => &a.common,
            Command::Verify(a) => &a.common,
        }
    }

    /// Flag overrides in application order: `--set` first, then the
    /// dedicated flags.
    pub fn overrides(&self) -> Vec<(String, String)> {
        let mut o = self.common().overrides();
        match self {
            Command::Simulate(a) => a.paths.overrides(&mut o),
            Command::Kernel(a) => {
                push(&mut o, "kernel.kernel", &a.kernel.as_deref().map(quoted));
                push(&mut o, "kernel.grid", &a.grid.as_deref().map(quoted));
                if a.matrix {
                    o.push(("kernel.matrix".into(), "true".into()));
                }
            }
            Command::Correlate(a) => push(&mut o, "diagnostics.order", &a.order),
            Command::DriftDiag(a) => {
                push(&mut o, "diagnostics.r_list", &a.r_list.as_ref().map(|v| {
                    list(&v.iter().map(|&x| float(x)).collect::<Vec<_>>())
                }));
                push(&mut o, "diagnostics.s", &a.s.map(float));
            }
            Command::Tightness(a) => {
                push(&mut o, "diagnostics.l_list", &a.l_list.as_ref().map(|v| list(v)));
            }
            Command::Moments(a) => {
                a.paths.overrides(&mut o);
                push(&mut o, "diagnostics.lags", &a.lags.as_ref().map(|v| list(v)));
            }
            Command::Verify(a) => push(&mut o, "verify.suite", &a.suite.as_deref().map(quoted)),
            Command::Sample(_) => {}
        }
        o
    }

    pub fn config_file(&self) -> Option<&std::path::Path> {
        self.common().config.as_deref()
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

fn init_threads() -> Result<(), Error> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::invalid(THREADS_ENV, format!("expected a thread count, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::invalid(THREADS_ENV, e.to_string()))?;
    }
    Ok(())
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = init_threads()
        .and_then(|_| config::resolve(cli.command.config_file(), &cli.command.overrides()))
        .and_then(|cfg| run(cli.command.kind(), &cfg));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
