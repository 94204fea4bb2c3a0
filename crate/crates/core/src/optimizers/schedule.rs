//! Parameter schedules derived from the convergence analysis.
//!
//! The analysis fixes only orders of magnitude; [`TheoryConstants`] carries the
//! multipliers. Integer quantities are rounded with [`ceil_snapped`] /
//! [`floor_snapped`], which treat values within a few ulps of an integer as that
//! integer so that e.g. `η·d = 1.0000000000000002` still yields `D = 1`.

use crate::error::{Error, Result};
use crate::problem::{full_objective, BlackBoxProblem, Phase, QueryLedger, Smoothness};

use super::config::{OptimizerConfig, Provenance, TheoryConstants};

const SNAP: f64 = 1e-9;

/// `⌈x⌉`, except that `x` within relative `1e-9` of an integer rounds to it.
pub fn ceil_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

/// `⌊x⌋` with the same snapping as [`ceil_snapped`].
pub fn floor_snapped(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

fn to_count(x: f64, what: &str) -> Result<usize> {
    if !x.is_finite() || x >= usize::MAX as f64 {
        return Err(Error::param(format!("{what} overflows: {x}")));
    }
    Ok(x.max(1.0) as usize)
}

/// How the number of epochs S is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpochSizing {
    /// Optimality-gap estimate R̂.
    GapEstimate(f64),
    /// `R̂ = f(x₀)`, evaluated at the origin on a throwaway ledger.
    InitialValue,
    /// Enough epochs to spend this many evaluations; also sets the budget.
    Budget(u64),
}

/// The smooth-case schedule as plain numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothSchedule {
    pub batch_size: usize,
    pub step_unclamped: f64,
    /// `1/(18 √d L1)`
    pub step_cap: f64,
    pub step_size: f64,
    pub smoothing: f64,
    pub inner_iterations: usize,
    pub directions: usize,
    pub coupling: f64,
}

impl SmoothSchedule {
    /// `(qη + 18 L1² (d+4) η²)`, whose product with K must stay below one (times c_K).
    pub fn contraction_rate(&self, d: usize, l1: f64) -> f64 {
        let eta = self.step_size;
        self.coupling * eta + 18.0 * l1 * l1 * (d as f64 + 4.0) * eta * eta
    }
}

/// Smooth-case schedule for dimension `d`, `n` components and gradient-Lipschitz constant `l1`.
pub fn smooth_schedule(
    d: usize,
    n: usize,
    l1: f64,
    eps: f64,
    b0: usize,
    c: &TheoryConstants,
) -> Result<SmoothSchedule> {
    c.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!("tolerance must be positive, got {eps}")));
    }
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(Error::param(format!("smooth schedule needs L1 > 0, got {l1}")));
    }
    if d == 0 || n == 0 || b0 == 0 {
        return Err(Error::param("d, n and b0 must be positive"));
    }
    let df = d as f64;
    let b0f = b0 as f64;

    let batch = (n as f64).min(ceil_snapped(c.c_b / (eps * eps)));
    let batch_size = to_count(batch, "batch size")?;
    let bf = batch_size as f64;

    let dim_branch = b0f.cbrt() / (df.powf(2.0 / 3.0) * bf.cbrt());
    let batch_branch = b0f.powf(2.0 / 3.0) / (df.cbrt() * bf.powf(2.0 / 3.0));
    let step_unclamped = c.c_eta * dim_branch.min(batch_branch);
    let step_cap = 1.0 / (18.0 * df.sqrt() * l1);
    let eta = step_unclamped.min(step_cap);

    let smoothing = c.c_mu * 2.0 * eps / (l1 * (df + 6.0).powf(1.5));
    let coupling = 6.0 * (l1.powi(3) * (df + 4.0) * eta).sqrt();

    let growth = (df * eta * eta).max(df.sqrt() * eta.powf(1.5));
    let k_order = floor_snapped(c.c_k * 2.0 / growth);
    let rate = coupling * eta + 18.0 * l1 * l1 * (df + 4.0) * eta * eta;
    let k_contract = floor_snapped(c.c_k / rate);
    let inner_iterations = to_count(k_order.min(k_contract), "inner iterations")?;

    let directions = to_count(ceil_snapped(c.c_d * eta * df), "direction count")?;

    Ok(SmoothSchedule {
        batch_size,
        step_unclamped,
        step_cap,
        step_size: eta,
        smoothing,
        inner_iterations,
        directions,
        coupling,
    })
}

/// The non-smooth schedule as plain numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonsmoothSchedule {
    pub batch_size: usize,
    pub step_unclamped: f64,
    pub step_size: f64,
    pub smoothing: f64,
    pub inner_iterations: usize,
    pub directions: usize,
    pub coupling: f64,
}

pub fn nonsmooth_schedule(
    d: usize,
    n: usize,
    l0: f64,
    eps: f64,
    b0: usize,
    c: &TheoryConstants,
) -> Result<NonsmoothSchedule> {
    c.validate()?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::param(format!("tolerance must be positive, got {eps}")));
    }
    if !(l0 > 0.0 && l0.is_finite()) {
        return Err(Error::param(format!("non-smooth schedule needs L0 > 0, got {l0}")));
    }
    if d == 0 || n == 0 || b0 == 0 {
        return Err(Error::param("d, n and b0 must be positive"));
    }
    let df = d as f64;
    let smoothing = c.c_mu * eps / (l0 * df.sqrt());
    let batch_size = to_count((n as f64).min(ceil_snapped(c.c_b / (eps * eps))), "batch size")?;
    let bf = batch_size as f64;
    let step_unclamped = c.c_eta * eps.powf(5.0 / 3.0) * (b0 as f64).cbrt() / (df.powf(5.0 / 3.0) * bf.cbrt());
    let eta = step_unclamped.min((eps / df).next_down());
    let inner_iterations = to_count(
        floor_snapped(c.c_k * eps * eps / (df * df * eta * eta)),
        "inner iterations",
    )?;
    let directions = to_count(ceil_snapped(c.c_d * eta * df.powi(3) / eps.powi(3)), "direction count")?;
    let coupling = df.powf(1.5) * eta.sqrt() / eps;
    Ok(NonsmoothSchedule {
        batch_size,
        step_unclamped,
        step_size: eta,
        smoothing,
        inner_iterations,
        directions,
        coupling,
    })
}

/// Scheduled query bound `max{d^{2/3} B^{1/3}, d^{1/3} B^{2/3}} / ε²`.
pub fn smooth_query_bound(d: usize, batch: usize, eps: f64) -> f64 {
    let (df, bf) = (d as f64, batch as f64);
    (df.powf(2.0 / 3.0) * bf.cbrt()).max(df.cbrt() * bf.powf(2.0 / 3.0)) / (eps * eps)
}

/// Which term of [`smooth_query_bound`] dominates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryRegime {
    /// `d ≥ B`: `d^{2/3} B^{1/3}`.
    DimensionDominated,
    /// `d < B`: `d^{1/3} B^{2/3}`.
    BatchDominated,
}

pub fn query_regime(d: usize, batch: usize) -> QueryRegime {
    if d >= batch {
        QueryRegime::DimensionDominated
    } else {
        QueryRegime::BatchDominated
    }
}

/// Scheduled non-smooth query bound `d^{5/3} B^{1/3} / ε^{11/3}`.
pub fn nonsmooth_query_bound(d: usize, batch: usize, eps: f64) -> f64 {
    (d as f64).powf(5.0 / 3.0) * (batch as f64).cbrt() / eps.powf(11.0 / 3.0)
}

fn gap_estimate<P: BlackBoxProblem + ?Sized>(problem: &P, sizing: EpochSizing) -> Result<Option<f64>> {
    match sizing {
        EpochSizing::GapEstimate(r) => {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::param(format!("gap estimate must be positive, got {r}")));
            }
            Ok(Some(r))
        }
        EpochSizing::InitialValue => {
            let origin = vec![0.0; problem.dim()];
            let f0 = full_objective(problem, &origin, &mut QueryLedger::new(), Phase::Reporting)?;
            Ok(Some(f0.max(f64::EPSILON)))
        }
        EpochSizing::Budget(_) => Ok(None),
    }
}

/// Epochs needed for `S·K ≥ iterations`, or to spend `budget`.
fn epochs_for(
    sizing: EpochSizing,
    iterations: Option<f64>,
    inner: usize,
    anchor_cost: u64,
    step_cost: u64,
) -> Result<(usize, Option<u64>)> {
    match (sizing, iterations) {
        (EpochSizing::Budget(budget), _) => {
            let per_epoch = anchor_cost + step_cost * inner as u64;
            Ok(((budget.div_ceil(per_epoch)).max(1) as usize, Some(budget)))
        }
        (_, Some(t)) => Ok((to_count(ceil_snapped(t / inner as f64), "epoch count")?, None)),
        (_, None) => unreachable!("gap estimate resolved for non-budget sizing"),
    }
}

/// Configuration for a C¹,¹ problem at gradient-norm tolerance `eps`.
pub fn auto_config_smooth<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    eps: f64,
    b0: usize,
    constants: &TheoryConstants,
    master_seed: u64,
    sizing: EpochSizing,
) -> Result<OptimizerConfig> {
    let l1 = match problem.smoothness() {
        Smoothness::C11 { l1 } => l1,
        Smoothness::C00 { .. } => return Err(Error::param("smooth schedule requires a C11 problem with known L1")),
    };
    let d = problem.dim();
    let s = smooth_schedule(d, problem.num_components(), l1, eps, b0, constants)?;
    if (d as f64) >= eps.powi(-8) {
        log::warn!("d >= 1/eps^8: the batch-size rule is outside its main regime");
    }
    let iterations = gap_estimate(problem, sizing)?.map(|r| 24.0 * r / (eps * eps * s.step_size));
    let anchor_cost = s.batch_size as u64 * (s.directions as u64 + 1);
    let (epochs, budget) = epochs_for(sizing, iterations, s.inner_iterations, anchor_cost, 2 * b0 as u64)?;
    Ok(OptimizerConfig {
        step_size: s.step_size,
        smoothing: s.smoothing,
        inner_iterations: s.inner_iterations,
        epochs,
        directions: s.directions,
        batch_size: s.batch_size,
        inner_batch: b0,
        coupling: Some(s.coupling),
        eval_budget: budget,
        checkpoint_stride: None,
        master_seed,
        provenance: Provenance::AutoSmooth,
        initial_point: None,
    })
}

/// Configuration for a C⁰,⁰ problem at tolerance `eps`.
pub fn auto_config_nonsmooth<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    eps: f64,
    b0: usize,
    constants: &TheoryConstants,
    master_seed: u64,
    sizing: EpochSizing,
) -> Result<OptimizerConfig> {
    let l0 = match problem.smoothness() {
        Smoothness::C00 { l0 } => l0,
        Smoothness::C11 { .. } => return Err(Error::param("non-smooth schedule requires a C00 problem with known L0")),
    };
    let s = nonsmooth_schedule(problem.dim(), problem.num_components(), l0, eps, b0, constants)?;
    let iterations = gap_estimate(problem, sizing)?.map(|r| r / (eps * eps * s.step_size));
    let anchor_cost = s.batch_size as u64 * (s.directions as u64 + 1);
    let (epochs, budget) = epochs_for(sizing, iterations, s.inner_iterations, anchor_cost, 2 * b0 as u64)?;
    Ok(OptimizerConfig {
        step_size: s.step_size,
        smoothing: s.smoothing,
        inner_iterations: s.inner_iterations,
        epochs,
        directions: s.directions,
        batch_size: s.batch_size,
        inner_batch: b0,
        coupling: Some(s.coupling),
        eval_budget: budget,
        checkpoint_stride: None,
        master_seed,
        provenance: Provenance::AutoNonsmooth,
        initial_point: None,
    })
}
