//! Optimization loops and parameter schedules.

mod baselines;
mod config;
mod schedule;
mod szvr;

use std::fmt;
use std::str::FromStr;

pub use baselines::{default_rgf_step, run_rgf, run_rsg, BaselineConfig, StepSchedule};
pub use config::{OptimizerConfig, Provenance, TheoryConstants};
pub use schedule::{
    auto_config_nonsmooth, auto_config_smooth, ceil_snapped, floor_snapped, nonsmooth_query_bound, nonsmooth_schedule,
    query_regime, smooth_query_bound, smooth_schedule, EpochSizing, NonsmoothSchedule, QueryRegime, SmoothSchedule,
};
pub use szvr::{run_szvr_g, run_szvr_g_minibatch};

use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, QueryLedger};
use crate::trace::{RunConfig, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    SzvrG,
    SzvrGMb,
    Rgf,
    Rsg,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::SzvrG, Algorithm::SzvrGMb, Algorithm::Rgf, Algorithm::Rsg];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::SzvrG => "szvr-g",
            Algorithm::SzvrGMb => "szvr-g-mb",
            Algorithm::Rgf => "rgf",
            Algorithm::Rsg => "rsg",
        }
    }

    pub fn is_variance_reduced(self) -> bool {
        matches!(self, Algorithm::SzvrG | Algorithm::SzvrGMb)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL.into_iter().find(|a| a.name() == s).ok_or_else(|| {
            Error::param(format!(
                "unknown algorithm `{s}` (expected szvr-g, szvr-g-mb, rgf or rsg)"
            ))
        })
    }
}

/// Run whichever method `config` describes.
pub fn run<P: BlackBoxProblem + ?Sized>(problem: &P, config: &RunConfig, ledger: &mut QueryLedger) -> Result<Trace> {
    match config {
        RunConfig::Szvr(c) if c.inner_batch == 1 => run_szvr_g(problem, c, ledger),
        RunConfig::Szvr(c) => run_szvr_g_minibatch(problem, c, ledger),
        RunConfig::Baseline(Algorithm::Rgf, c) => run_rgf(problem, c, ledger),
        RunConfig::Baseline(Algorithm::Rsg, c) => run_rsg(problem, c, ledger),
        RunConfig::Baseline(other, _) => Err(Error::param(format!("{other} is not a baseline method"))),
    }
}
