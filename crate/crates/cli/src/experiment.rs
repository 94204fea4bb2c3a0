//! Turning settings into per-seed run configurations, and running them.

use rayon::prelude::*;

use zovr_core::optimizers::default_rgf_step;
use zovr_core::{
    auto_config_nonsmooth, auto_config_smooth, Algorithm, BaselineConfig, BlackBoxProblem, EpochSizing,
    OptimizerConfig, Provenance, QueryLedger, RunConfig, Smoothness, StepSchedule, TheoryConstants, Trace,
};

use crate::error::{CliError, CliResult};
use crate::selector::SharedProblem;
use crate::settings::Settings;

pub const THREADS_ENV: &str = "ZOVR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Unit,
    Benchmark,
}

impl Preset {
    fn parse(raw: Option<&str>) -> CliResult<Self> {
        match raw {
            None | Some("unit") => Ok(Preset::Unit),
            Some("benchmark") => Ok(Preset::Benchmark),
            Some(other) => Err(CliError::usage(format!(
                "unknown preset `{other}` (expected unit or benchmark)"
            ))),
        }
    }

    pub fn constants(self) -> TheoryConstants {
        match self {
            Preset::Unit => TheoryConstants::default(),
            Preset::Benchmark => TheoryConstants::benchmark_preset(),
        }
    }
}

/// Schedule-driven SZVR-G configuration for `problem` at tolerance `eps`.
pub fn auto_szvr_config(
    problem: &dyn BlackBoxProblem,
    eps: f64,
    b0: usize,
    constants: &TheoryConstants,
    seed: u64,
    sizing: EpochSizing,
) -> CliResult<OptimizerConfig> {
    let cfg = match problem.smoothness() {
        Smoothness::C11 { .. } => auto_config_smooth(problem, eps, b0, constants, seed, sizing)?,
        Smoothness::C00 { .. } => auto_config_nonsmooth(problem, eps, b0, constants, seed, sizing)?,
    };
    Ok(cfg)
}

fn sizing(settings: &Settings) -> CliResult<EpochSizing> {
    Ok(
        match (settings.parse::<u64>("budget")?, settings.parse::<f64>("gap")?) {
            (Some(b), _) => EpochSizing::Budget(b),
            (None, Some(r)) => EpochSizing::GapEstimate(r),
            (None, None) => EpochSizing::InitialValue,
        },
    )
}

/// Evaluations per iteration used to turn a resolution into a stride.
fn step_cost(algo: Algorithm, n: usize, b0: usize) -> usize {
    match algo {
        Algorithm::Rgf => 2 * n,
        Algorithm::Rsg => 2,
        Algorithm::SzvrG | Algorithm::SzvrGMb => 2 * b0,
    }
}

fn stride(settings: &Settings, cost: usize) -> CliResult<Option<usize>> {
    if let Some(s) = settings.parse::<usize>("stride")? {
        if s == 0 {
            return Err(CliError::usage("stride must be at least 1"));
        }
        return Ok(Some(s));
    }
    Ok(settings
        .parse::<u64>("resolution")?
        .map(|r| ((r as usize) / cost).max(1)))
}

/// Resolve the configuration of `algo` on `problem` for one seed.
///
/// Explicit settings win; with `auto-eps` the remaining fields come from the
/// schedules, otherwise SZVR-G needs all of `eta mu inner epochs directions batch`.
pub fn resolve(settings: &Settings, algo: Algorithm, problem: &dyn BlackBoxProblem, seed: u64) -> CliResult<RunConfig> {
    let preset = Preset::parse(settings.get("preset"))?;
    let auto_eps = settings.parse::<f64>("auto-eps")?;
    let budget = settings.parse::<u64>("budget")?;
    let n = problem.num_components();

    if algo.is_variance_reduced() {
        let b0 = settings
            .parse::<usize>("b0")?
            .unwrap_or(if algo == Algorithm::SzvrGMb { 4 } else { 1 });
        if algo == Algorithm::SzvrG && b0 != 1 {
            return Err(CliError::usage(
                "szvr-g takes b0 = 1; use --algo szvr-g-mb for inner mini-batches",
            ));
        }
        if b0 == 0 {
            return Err(CliError::usage("b0 must be at least 1"));
        }
        let eta = settings.parse::<f64>("eta")?;
        let mu = settings.parse::<f64>("mu")?;
        let inner = settings.parse::<usize>("inner")?;
        let epochs = settings.parse::<usize>("epochs")?;
        let directions = settings.parse::<usize>("directions")?;
        let batch = settings.parse::<usize>("batch")?;

        let mut cfg = match auto_eps {
            Some(eps) => auto_szvr_config(problem, eps, b0, &preset.constants(), seed, sizing(settings)?)?,
            None => {
                let missing: Vec<&str> = [
                    ("eta", eta.is_none()),
                    ("mu", mu.is_none()),
                    ("inner", inner.is_none()),
                    ("epochs", epochs.is_none()),
                    ("directions", directions.is_none()),
                    ("batch", batch.is_none()),
                ]
                .into_iter()
                .filter_map(|(k, m)| m.then_some(k))
                .collect();
                if !missing.is_empty() {
                    return Err(CliError::usage(format!(
                        "without --auto-eps, {algo} needs explicit {}",
                        missing.join(", ")
                    )));
                }
                OptimizerConfig::manual(0.0, 0.0, 0, 0, 0, 0)
            }
        };
        let overrides = [
            eta.is_some(),
            mu.is_some(),
            inner.is_some(),
            epochs.is_some(),
            directions.is_some(),
            batch.is_some(),
        ];
        if overrides.iter().any(|&o| o) {
            cfg.provenance = Provenance::Manual;
        }
        cfg.step_size = eta.unwrap_or(cfg.step_size);
        cfg.smoothing = mu.unwrap_or(cfg.smoothing);
        cfg.inner_iterations = inner.unwrap_or(cfg.inner_iterations);
        cfg.epochs = epochs.unwrap_or(cfg.epochs);
        cfg.directions = directions.unwrap_or(cfg.directions);
        cfg.batch_size = batch.unwrap_or(cfg.batch_size);
        cfg.inner_batch = b0;
        cfg.master_seed = seed;
        if budget.is_some() {
            cfg.eval_budget = budget;
        }
        cfg.checkpoint_stride = stride(settings, step_cost(algo, n, b0))?;
        cfg.validate_for(problem)?;
        return Ok(RunConfig::Szvr(cfg));
    }

    let auto = match auto_eps {
        Some(eps) => Some(auto_szvr_config(
            problem,
            eps,
            1,
            &preset.constants(),
            seed,
            sizing(settings)?,
        )?),
        None => None,
    };
    let mu = match (settings.parse::<f64>("mu")?, &auto) {
        (Some(mu), _) => mu,
        (None, Some(a)) => a.smoothing,
        (None, None) => return Err(CliError::usage(format!("{algo} needs --mu or --auto-eps"))),
    };
    let schedule = settings.get("step-schedule").unwrap_or("constant");
    let step = match (settings.parse::<f64>("eta")?, problem.smoothness()) {
        (Some(eta), _) => match schedule {
            "constant" => StepSchedule::Constant(eta),
            "inv-sqrt" => StepSchedule::InverseSqrt(eta),
            other => {
                return Err(CliError::usage(format!(
                    "unknown step schedule `{other}` (expected constant or inv-sqrt)"
                )))
            }
        },
        (None, Smoothness::C11 { .. }) => StepSchedule::Constant(default_rgf_step(problem)?),
        (None, Smoothness::C00 { l0 }) => StepSchedule::InverseSqrt(1.0 / ((problem.dim() as f64 + 4.0) * l0)),
    };
    let cost = step_cost(algo, n, 1);
    let iterations = match (settings.parse::<usize>("iterations")?, budget, &auto) {
        (Some(t), _, _) => t,
        (None, Some(b), _) => (b as usize).div_ceil(cost).max(1),
        (None, None, Some(a)) => a.total_iterations() as usize,
        (None, None, None) => {
            return Err(CliError::usage(format!(
                "{algo} needs --iterations, --budget or --auto-eps"
            )))
        }
    };
    let mut cfg = BaselineConfig::new(step, mu, iterations).with_seed(seed);
    cfg.eval_budget = budget;
    cfg.checkpoint_stride = stride(settings, cost)?;
    Ok(RunConfig::Baseline(algo, cfg))
}

/// Worker count from `ZOVR_THREADS`; unset or 0 means serial.
pub fn thread_count() -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(raw) => raw
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{THREADS_ENV} must be a non-negative integer, got `{raw}`"))),
    }
}

/// Run each configuration on its own ledger, returning results in input order.
pub fn run_all(problem: &SharedProblem, configs: &[RunConfig], threads: usize) -> Vec<zovr_core::Result<Trace>> {
    let one = |cfg: &RunConfig| zovr_core::optimizers::run(problem.as_ref(), cfg, &mut QueryLedger::new());
    if threads == 0 || configs.len() <= 1 {
        return configs.iter().map(one).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| configs.par_iter().map(one).collect()),
        Err(e) => {
            log::warn!("could not start {threads} worker threads ({e}); running serially");
            configs.iter().map(one).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use zovr_core::problems::make_quadratic;

    fn settings(text: &str) -> Settings {
        Settings::parse_config(text).unwrap()
    }

    #[test]
    fn manual_szvr_needs_every_field() {
        let q = make_quadratic(3, None).unwrap();
        let err = resolve(&settings("eta = 0.1\nmu = 0.01"), Algorithm::SzvrG, &q, 1).unwrap_err();
        assert!(err.to_string().contains("inner, epochs, directions, batch"), "{err}");
        let cfg = resolve(
            &settings("eta = 0.1\nmu = 0.01\ninner = 5\nepochs = 2\ndirections = 3\nbatch = 1"),
            Algorithm::SzvrG,
            &q,
            9,
        )
        .unwrap();
        let RunConfig::Szvr(c) = cfg else { panic!() };
        assert_eq!(
            (c.inner_iterations, c.epochs, c.directions, c.master_seed),
            (5, 2, 3, 9)
        );
        assert_eq!(c.provenance, Provenance::Manual);
    }

    #[test]
    fn explicit_fields_override_auto() {
        let q = make_quadratic(10, None).unwrap();
        let RunConfig::Szvr(auto) = resolve(&settings("auto-eps = 0.1"), Algorithm::SzvrG, &q, 1).unwrap() else {
            panic!()
        };
        assert_eq!(auto.provenance, Provenance::AutoSmooth);
        let RunConfig::Szvr(c) = resolve(&settings("auto-eps = 0.1\ninner = 3"), Algorithm::SzvrG, &q, 1).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.inner_iterations, 3);
        assert_eq!(c.step_size, auto.step_size);
        assert_eq!(c.provenance, Provenance::Manual);
    }

    #[test]
    fn baseline_iterations_from_budget() {
        let q = make_quadratic(4, None).unwrap();
        let RunConfig::Baseline(_, c) = resolve(&settings("mu = 0.01\nbudget = 101"), Algorithm::Rsg, &q, 1).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.iterations, 51);
        assert_eq!(c.step, StepSchedule::Constant(1.0 / 32.0));
        assert!(resolve(&settings("budget = 10"), Algorithm::Rgf, &q, 1).is_err());
    }

    #[test]
    fn plain_szvr_rejects_inner_batches() {
        let q = make_quadratic(4, None).unwrap();
        let err = resolve(&settings("auto-eps = 0.1\nb0 = 2"), Algorithm::SzvrG, &q, 1).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(resolve(&settings("auto-eps = 0.1\nb0 = 2"), Algorithm::SzvrGMb, &q, 1).is_ok());
    }
}
