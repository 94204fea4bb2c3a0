use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimators::{anchor_gradient, draw_pick, minibatch_vr_estimate, smoothing_radius_is_risky, vr_estimate};
use crate::estimators::{DirectionSet, SampleBatch};
use crate::problem::{report_point, BlackBoxProblem, QueryLedger};
use crate::rng::{epoch_direction_seed, stream_rng, Stream};
use crate::trace::{RunConfig, Trace, TraceRecord};

use super::config::OptimizerConfig;

/// Variance-reduced zeroth-order descent with one `(i, j)` pick per inner step.
///
/// Each epoch draws a fresh direction set and a batch of `B` components without
/// replacement, builds the anchor gradient there, then takes `K` steps
/// `x ← x − η·ṽ`. The last inner iterate becomes the next anchor.
pub fn run_szvr_g<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &OptimizerConfig,
    ledger: &mut QueryLedger,
) -> Result<Trace> {
    if config.inner_batch != 1 {
        return Err(Error::param(format!(
            "run_szvr_g takes b0 = 1 (got {}); use run_szvr_g_minibatch",
            config.inner_batch
        )));
    }
    run_epochs(problem, config, ledger)
}

/// As [`run_szvr_g`] with the inner estimate averaged over `b₀` picks.
pub fn run_szvr_g_minibatch<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &OptimizerConfig,
    ledger: &mut QueryLedger,
) -> Result<Trace> {
    run_epochs(problem, config, ledger)
}

pub(crate) struct Recorder<'a, P: ?Sized> {
    pub problem: &'a P,
    pub start: Instant,
    pub base_evals: u64,
}

impl<P: BlackBoxProblem + ?Sized> Recorder<'_, P> {
    pub fn used(&self, ledger: &QueryLedger) -> u64 {
        ledger.optimizer_evals() - self.base_evals
    }

    pub fn record(
        &self,
        trace: &mut Trace,
        x: &[f64],
        ledger: &mut QueryLedger,
        epoch: usize,
        iter: usize,
        iterations: u64,
    ) -> Result<()> {
        let (f_value, grad_norm_sq) = report_point(self.problem, x, ledger)?;
        trace.records.push(TraceRecord {
            epoch,
            iter,
            iterations,
            szo_count: self.used(ledger),
            f_value,
            grad_norm_sq,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
            truncated: false,
        });
        Ok(())
    }

    /// Flag the trace as cut short by the budget, adding a final record if
    /// evaluations were spent since the last one.
    pub fn truncate(
        &self,
        trace: &mut Trace,
        x: &[f64],
        ledger: &mut QueryLedger,
        epoch: usize,
        iter: usize,
        iterations: u64,
    ) -> Result<()> {
        let stale = trace.last().map(|r| r.szo_count) != Some(self.used(ledger));
        if stale {
            self.record(trace, x, ledger, epoch, iter, iterations)?;
        }
        trace.final_point = x.to_vec();
        trace.mark_truncated();
        Ok(())
    }
}

pub(crate) fn abort(source: Error, mut trace: Trace, last_good: &[f64]) -> Error {
    trace.final_point = last_good.to_vec();
    Error::Aborted {
        source: Box::new(source),
        trace: Box::new(trace),
    }
}

fn run_epochs<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    config: &OptimizerConfig,
    ledger: &mut QueryLedger,
) -> Result<Trace> {
    config.validate_for(problem)?;
    let d = problem.dim();
    let n = problem.num_components();
    let mut x = config.initial_point.clone().unwrap_or_else(|| vec![0.0; d]);
    if smoothing_radius_is_risky(config.smoothing, &x) {
        log::warn!(
            "smoothing radius {} is close to floating-point resolution at the start point",
            config.smoothing
        );
    }

    let rec = Recorder {
        problem,
        start: Instant::now(),
        base_evals: ledger.optimizer_evals(),
    };
    let mut trace = Trace::new(RunConfig::Szvr(config.clone()), x.clone());
    if let Err(e) = rec.record(&mut trace, &x, ledger, 0, 0, 0) {
        return Err(abort(e, trace, &x));
    }

    let mut sampler = stream_rng(config.master_seed, Stream::Sampler);
    let b0 = config.inner_batch;
    let stride = config.stride();
    let anchor_cost = config.anchor_cost();
    let worst_step = if config.batch_size == n { 2 } else { 4 } * b0 as u64;
    let over = |used: u64, cost: u64| config.eval_budget.is_some_and(|b| used + cost > b);
    let mut iterations = 0u64;

    for s in 0..config.epochs {
        if over(rec.used(ledger), anchor_cost) {
            rec.truncate(&mut trace, &x, ledger, s, 0, iterations)?;
            return Ok(trace);
        }
        let epoch_result = (|| -> Result<_> {
            let set = DirectionSet::new(epoch_direction_seed(config.master_seed, s as u64), config.directions, d)?;
            let batch = SampleBatch::without_replacement(n, config.batch_size, &mut sampler)?;
            anchor_gradient(problem, &x, &set, &batch, config.smoothing, ledger)
        })();
        let mut cache = match epoch_result {
            Ok(c) => c,
            Err(e) => return Err(abort(e, trace, &x)),
        };

        for k in 0..config.inner_iterations {
            if over(rec.used(ledger), worst_step) {
                rec.truncate(&mut trace, &x, ledger, s, k, iterations)?;
                return Ok(trace);
            }
            let estimate = if b0 == 1 {
                let (i, j) = draw_pick(&mut sampler, n, config.directions);
                vr_estimate(problem, &x, &cache, j, i, ledger)
            } else {
                minibatch_vr_estimate(problem, &x, &cache, b0, &mut sampler, ledger)
            };
            let v = match estimate {
                Ok(v) => v,
                Err(e) => return Err(abort(e, trace, &x)),
            };
            let next: Vec<f64> = x.iter().zip(&v).map(|(xl, vl)| xl - config.step_size * vl).collect();
            iterations += 1;
            if next.iter().any(|v| !v.is_finite()) {
                return Err(abort(Error::NonFiniteIterate { step: iterations }, trace, &x));
            }
            x = next;
            if (k + 1) % stride == 0 || k + 1 == config.inner_iterations {
                if let Err(e) = rec.record(&mut trace, &x, ledger, s, k + 1, iterations) {
                    return Err(abort(e, trace, &x));
                }
            }
        }
        cache.invalidate();
    }
    trace.final_point = x;
    Ok(trace)
}
