use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{cmd_compare, cmd_run, cmd_verify};
use crate::error::CliResult;
use crate::settings::Settings;

#[derive(Debug, Parser)]
#[command(name = "zovr", version, about = "Variance-reduced zeroth-order optimization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one algorithm and write its checkpoint trace.
    Run(RunArgs),
    /// Run several algorithms on the same seeds and summarize evaluations to a threshold.
    Compare(RunArgs),
    /// Check the estimator bounds by Monte Carlo and exact enumeration.
    Verify(VerifyArgs),
}

/// Every option is also accepted as `key = value` in the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `quadratic:d=10`, `norm:d=5`, `logistic[:data=FILE]`, `sigmoid[:data=FILE]`, `attack[:model=..,images=..,c=..,kappa=..,radius=..]`
    #[arg(long)]
    pub problem: Option<String>,
    /// `szvr-g`, `szvr-g-mb`, `rgf` or `rsg`
    #[arg(long)]
    pub algo: Option<String>,
    /// Comma-separated algorithms for `compare`.
    #[arg(long)]
    pub algos: Option<String>,
    /// Target accuracy for the automatic configuration.
    #[arg(long)]
    pub auto_eps: Option<String>,
    #[arg(long)]
    pub b0: Option<String>,
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub mu: Option<String>,
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub epochs: Option<String>,
    #[arg(long)]
    pub directions: Option<String>,
    #[arg(long)]
    pub batch: Option<String>,
    /// Baseline iteration count.
    #[arg(long)]
    pub iterations: Option<String>,
    /// Baseline step schedule: `constant` or `inv-sqrt`.
    #[arg(long)]
    pub step_schedule: Option<String>,
    /// Cap on optimizer evaluations.
    #[arg(long)]
    pub budget: Option<String>,
    /// Upper bound on `f(x₀) − f*` used to size the epoch count.
    #[arg(long)]
    pub gap: Option<String>,
    /// Record every N iterations.
    #[arg(long)]
    pub stride: Option<String>,
    /// Record roughly every N evaluations.
    #[arg(long)]
    pub resolution: Option<String>,
    /// Constants for the automatic configuration: `unit` or `benchmark`.
    #[arg(long)]
    pub preset: Option<String>,
    /// `3`, `1,2,7` or `1..5`
    #[arg(long)]
    pub seeds: Option<String>,
    #[arg(long)]
    pub out: Option<String>,
    /// Squared gradient norm counted as reached by `compare`.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Directory for per-run traces written by `compare`.
    #[arg(long)]
    pub trace_dir: Option<String>,
}

impl RunArgs {
    /// Config file values overlaid with explicit flags.
    pub fn settings(&self) -> CliResult<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::load(path)?,
            None => Settings::default(),
        };
        let flags: [(&'static str, &Option<String>); 22] = [
            ("problem", &self.problem),
            ("algo", &self.algo),
            ("algos", &self.algos),
            ("auto-eps", &self.auto_eps),
            ("b0", &self.b0),
            ("eta", &self.eta),
            ("mu", &self.mu),
            ("inner", &self.inner),
            ("epochs", &self.epochs),
            ("directions", &self.directions),
            ("batch", &self.batch),
            ("iterations", &self.iterations),
            ("step-schedule", &self.step_schedule),
            ("budget", &self.budget),
            ("gap", &self.gap),
            ("stride", &self.stride),
            ("resolution", &self.resolution),
            ("preset", &self.preset),
            ("seeds", &self.seeds),
            ("out", &self.out),
            ("threshold", &self.threshold),
            ("trace-dir", &self.trace_dir),
        ];
        for (key, value) in flags {
            if value.is_some() {
                s.set(key, value.clone());
            }
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Multiplier on every Monte Carlo sample count.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(args) => cmd_run(&args.settings()?),
        Command::Compare(args) => cmd_compare(&args.settings()?),
        Command::Verify(args) => cmd_verify(args.seed, args.scale),
    }
}
