//! Black-box finite-sum objectives and exact query accounting.
//!
//! An objective is `f(x) = (1/n) Σ_i F(x; ξ_i)` and is only reachable through
//! single-component evaluations. Every such evaluation made through
//! [`evaluate_component`] or [`full_objective`] is charged to a
//! [`QueryLedger`] under a [`Phase`]; the optimizer budget only ever looks at
//! the anchor and inner phases.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Smoothness class of every component `F(·; ξ_i)` (and therefore of `f`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothness {
    /// Gradient is `l1`-Lipschitz.
    C11 { l1: f64 },
    /// Value is `l0`-Lipschitz.
    C00 { l0: f64 },
}

impl Smoothness {
    pub fn l1(&self) -> Option<f64> {
        match *self {
            Smoothness::C11 { l1 } => Some(l1),
            Smoothness::C00 { .. } => None,
        }
    }

    pub fn l0(&self) -> Option<f64> {
        match *self {
            Smoothness::C00 { l0 } => Some(l0),
            Smoothness::C11 { .. } => None,
        }
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self, Smoothness::C11 { .. })
    }
}

/// A finite-sum objective that can only be evaluated pointwise, one component at a time.
///
/// Implementations must be deterministic: the same `(x, i)` always yields the same bits.
/// Component indices are zero-based (`0..num_components()`).
pub trait BlackBoxProblem: Send + Sync {
    fn dim(&self) -> usize;

    fn num_components(&self) -> usize;

    /// `F(x; ξ_i)`. Callers guarantee `x.len() == dim()` and `i < num_components()`.
    fn component_value(&self, x: &[f64], i: usize) -> f64;

    fn smoothness(&self) -> Smoothness;

    /// `∇f(x)` for reporting only; optimizers never see it.
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Bound `H` on `(1/n) Σ ‖∇f_μ(x) − ∇F_μ(x, ξ_i)‖²`, when known.
    fn variance_bound(&self) -> Option<f64> {
        None
    }
}

impl<P: BlackBoxProblem + ?Sized> BlackBoxProblem for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_components(&self) -> usize {
        (**self).num_components()
    }
    fn component_value(&self, x: &[f64], i: usize) -> f64 {
        (**self).component_value(x, i)
    }
    fn smoothness(&self) -> Smoothness {
        (**self).smoothness()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn variance_bound(&self) -> Option<f64> {
        (**self).variance_bound()
    }
}

impl<P: BlackBoxProblem + ?Sized> BlackBoxProblem for Arc<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn num_components(&self) -> usize {
        (**self).num_components()
    }
    fn component_value(&self, x: &[f64], i: usize) -> f64 {
        (**self).component_value(x, i)
    }
    fn smoothness(&self) -> Smoothness {
        (**self).smoothness()
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        (**self).gradient(x)
    }
    fn variance_bound(&self) -> Option<f64> {
        (**self).variance_bound()
    }
}

type ComponentFn = dyn Fn(&[f64], usize) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// Problem assembled from closures. Handy for tests and ad-hoc objectives.
#[derive(Clone)]
pub struct FnProblem {
    dim: usize,
    components: usize,
    smoothness: Smoothness,
    value: Arc<ComponentFn>,
    gradient: Option<Arc<GradientFn>>,
    variance_bound: Option<f64>,
}

impl FnProblem {
    pub fn new(
        dim: usize,
        components: usize,
        smoothness: Smoothness,
        value: impl Fn(&[f64], usize) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 || components == 0 {
            return Err(Error::Construction(
                "dimension and component count must be positive".into(),
            ));
        }
        Ok(Self {
            dim,
            components,
            smoothness,
            value: Arc::new(value),
            gradient: None,
            variance_bound: None,
        })
    }

    pub fn with_gradient(mut self, g: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(g));
        self
    }

    pub fn with_variance_bound(mut self, h: f64) -> Self {
        self.variance_bound = Some(h);
        self
    }
}

impl fmt::Debug for FnProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnProblem")
            .field("dim", &self.dim)
            .field("components", &self.components)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

impl BlackBoxProblem for FnProblem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn num_components(&self) -> usize {
        self.components
    }
    fn component_value(&self, x: &[f64], i: usize) -> f64 {
        (self.value)(x, i)
    }
    fn smoothness(&self) -> Smoothness {
        self.smoothness
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.gradient.as_ref().map(|g| g(x))
    }
    fn variance_bound(&self) -> Option<f64> {
        self.variance_bound
    }
}

/// Which part of a run an evaluation is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Snapshot gradient at the epoch anchor.
    Anchor,
    /// Per-iteration estimator evaluations.
    Inner,
    /// Objective logging for traces; never counted against the optimizer budget.
    Reporting,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Anchor, Phase::Inner, Phase::Reporting];

    fn slot(self) -> usize {
        match self {
            Phase::Anchor => 0,
            Phase::Inner => 1,
            Phase::Reporting => 2,
        }
    }
}

/// Monotone count of single-component evaluations, split by phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryLedger {
    counts: [u64; 3],
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, phase: Phase, units: u64) {
        self.counts[phase.slot()] += units;
    }

    pub fn count(&self, phase: Phase) -> u64 {
        self.counts[phase.slot()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Evaluations spent by the optimizer itself (the SZO axis): anchor + inner.
    pub fn optimizer_evals(&self) -> u64 {
        self.count(Phase::Anchor) + self.count(Phase::Inner)
    }
}

pub(crate) fn check_point(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: x.len(),
        });
    }
    if let Some((position, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinitePoint { position, value });
    }
    Ok(())
}

/// `F(x; ξ_i)`, charging exactly one unit to `phase`.
pub fn evaluate_component<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    i: usize,
    ledger: &mut QueryLedger,
    phase: Phase,
) -> Result<f64> {
    let n = problem.num_components();
    if i >= n {
        return Err(Error::Index {
            what: "component",
            index: i,
            len: n,
        });
    }
    check_point(x, problem.dim())?;
    ledger.charge(phase, 1);
    let value = problem.component_value(x, i);
    if !value.is_finite() {
        return Err(Error::NonFiniteValue { component: i, value });
    }
    Ok(value)
}

/// `(1/n) Σ_i F(x; ξ_i)`, charging `n` units. Components are summed in index order.
pub fn full_objective<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    ledger: &mut QueryLedger,
    phase: Phase,
) -> Result<f64> {
    let n = problem.num_components();
    let mut sum = 0.0;
    for i in 0..n {
        sum += evaluate_component(problem, x, i, ledger, phase)?;
    }
    Ok(sum / n as f64)
}

/// Objective value and squared gradient norm for a trace record (reporting phase).
pub fn report_point<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    ledger: &mut QueryLedger,
) -> Result<(f64, Option<f64>)> {
    let value = full_objective(problem, x, ledger, Phase::Reporting)?;
    let grad_sq = problem.gradient(x).map(|g| g.iter().map(|v| v * v).sum::<f64>());
    Ok((value, grad_sq))
}
