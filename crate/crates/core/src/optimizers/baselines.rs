//! Single-loop baselines: random gradient-free descent (RGF) on the full
//! average and randomized stochastic gradient (RSG) on one sampled component.

use std::time::Instant;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimators::{check_mu, perturb, two_point_slope, DirectionSet};
use crate::problem::{check_point, full_objective, BlackBoxProblem, Phase, QueryLedger};
use crate::rng::{stream_rng, stream_seed, Stream};
use crate::trace::{RandomizedOutput, RunConfig, Trace};

use super::szvr::{abort, Recorder};
use super::Algorithm;

/// Step size as a function of the iteration counter `k` (zero-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    Constant(f64),
    /// `η₀ / √(k+1)`
    InverseSqrt(f64),
}

impl StepSchedule {
    pub fn at(&self, k: u64) -> f64 {
        match *self {
            StepSchedule::Constant(eta) => eta,
            StepSchedule::InverseSqrt(eta) => eta / ((k + 1) as f64).sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (StepSchedule::Constant(eta) | StepSchedule::InverseSqrt(eta)) = *self;
        if eta > 0.0 && eta.is_finite() {
            Ok(())
        } else {
            Err(Error::param(format!(
                "step size must be positive and finite, got {eta}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub step: StepSchedule,
    pub smoothing: f64,
    pub iterations: usize,
    pub seed: u64,
    pub eval_budget: Option<u64>,
    /// Iterations between trace records; `None` means `⌈T/10⌉`.
    pub checkpoint_stride: Option<usize>,
    pub initial_point: Option<Vec<f64>>,
}

impl BaselineConfig {
    pub fn new(step: StepSchedule, smoothing: f64, iterations: usize) -> Self {
        Self {
            step,
            smoothing,
            iterations,
            seed: 0,
            eval_budget: None,
            checkpoint_stride: None,
            initial_point: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.eval_budget = Some(budget);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.checkpoint_stride = Some(stride);
        self
    }

    pub fn stride(&self) -> usize {
        self.checkpoint_stride
            .unwrap_or_else(|| self.iterations.div_ceil(10))
            .max(1)
    }

    fn validate(&self, d: usize) -> Result<()> {
        self.step.validate()?;
        check_mu(self.smoothing)?;
        if self.iterations == 0 {
            return Err(Error::param("iteration count must be at least 1"));
        }
        if self.checkpoint_stride == Some(0) {
            return Err(Error::param("checkpoint stride must be at least 1"));
        }
        if let Some(x0) = &self.initial_point {
            check_point(x0, d)?;
        }
        Ok(())
    }
}

/// Default RGF step `1/(4(d+4) L1)`.
pub fn default_rgf_step<P: BlackBoxProblem + ?Sized>(problem: &P) -> Result<f64> {
    match problem.smoothness().l1() {
        Some(l1) if l1 > 0.0 && l1.is_finite() => Ok(1.0 / (4.0 * (problem.dim() as f64 + 4.0) * l1)),
        _ => Err(Error::param("default RGF step needs a C11 problem with L1 > 0")),
    }
}

/// RGF: `x ← x − η_k · ((f(x + μu_k) − f(x))/μ) u_k` with `f` the full average,
/// so each iteration costs `2n` evaluations.
pub fn run_rgf<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
    ledger: &mut QueryLedger,
) -> Result<Trace> {
    run_single_loop(problem, config, ledger, Algorithm::Rgf)
}

/// RSG: each iteration samples a component `i` and a direction `u` and steps
/// along `G_μ(x, u, ξ_i)`, costing 2 evaluations. A uniformly drawn iterate is
/// reported in [`Trace::randomized_output`].
pub fn run_rsg<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
    ledger: &mut QueryLedger,
) -> Result<Trace> {
    run_single_loop(problem, config, ledger, Algorithm::Rsg)
}

fn run_single_loop<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &BaselineConfig,
    ledger: &mut QueryLedger,
    algo: Algorithm,
) -> Result<Trace> {
    let d = problem.dim();
    let n = problem.num_components();
    config.validate(d)?;
    let mu = config.smoothing;
    let mut x = config.initial_point.clone().unwrap_or_else(|| vec![0.0; d]);
    let rec = Recorder {
        problem,
        start: Instant::now(),
        base_evals: ledger.optimizer_evals(),
    };
    let mut trace = Trace::new(RunConfig::Baseline(algo, config.clone()), x.clone());
    if let Err(e) = rec.record(&mut trace, &x, ledger, 0, 0, 0) {
        return Err(abort(e, trace, &x));
    }

    let directions = DirectionSet::new(
        stream_seed(config.seed, Stream::BaselineDirections),
        config.iterations,
        d,
    )?;
    let mut sampler = stream_rng(config.seed, Stream::Sampler);
    let output_index = (algo == Algorithm::Rsg)
        .then(|| stream_rng(config.seed, Stream::Output).random_range(1..=config.iterations as u64));
    let mut output_point = None;

    let step_cost = match algo {
        Algorithm::Rgf => 2 * n as u64,
        _ => 2,
    };
    let stride = config.stride();
    let mut u = vec![0.0; d];
    let mut scratch = vec![0.0; d];

    for k in 0..config.iterations {
        if config.eval_budget.is_some_and(|b| rec.used(ledger) + step_cost > b) {
            rec.truncate(&mut trace, &x, ledger, 0, k, k as u64)?;
            finish_output(&mut trace, output_index, output_point);
            return Ok(trace);
        }
        directions.fill(k, &mut u)?;
        let slope = match algo {
            Algorithm::Rgf => (|| -> Result<f64> {
                let base = full_objective(problem, &x, ledger, Phase::Inner)?;
                perturb(&x, &u, mu, &mut scratch);
                let shifted = full_objective(problem, &scratch, ledger, Phase::Inner)?;
                Ok((shifted - base) / mu)
            })(),
            _ => {
                let i = sampler.random_range(0..n);
                two_point_slope(problem, &x, &u, i, mu, ledger, Phase::Inner, None, &mut scratch)
            }
        };
        let slope = match slope {
            Ok(s) => s,
            Err(e) => return Err(abort(e, trace, &x)),
        };
        let eta = config.step.at(k as u64);
        let next: Vec<f64> = x.iter().zip(&u).map(|(xl, ul)| xl - eta * (slope * ul)).collect();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(abort(Error::NonFiniteIterate { step: k as u64 + 1 }, trace, &x));
        }
        x = next;
        if output_index == Some(k as u64 + 1) {
            output_point = Some(x.clone());
        }
        if (k + 1) % stride == 0 || k + 1 == config.iterations {
            if let Err(e) = rec.record(&mut trace, &x, ledger, 0, k + 1, k as u64 + 1) {
                return Err(abort(e, trace, &x));
            }
        }
    }
    trace.final_point = x;
    finish_output(&mut trace, output_index, output_point);
    Ok(trace)
}

fn finish_output(trace: &mut Trace, index: Option<u64>, point: Option<Vec<f64>>) {
    trace.randomized_output = index.map(|index| RandomizedOutput { index, point });
}
