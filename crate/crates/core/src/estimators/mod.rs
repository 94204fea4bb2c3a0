//! Gaussian-smoothing gradient estimators.
//!
//! * two-point estimator `G_μ(x, u, ξ_i) = ((F(x + μu; ξ_i) − F(x; ξ_i)) / μ) · u`
//! * anchor (snapshot) estimator: the average of `G_μ(x̃, u_j, ξ_i)` over a
//!   direction set `u_D` and a sample batch `ξ_B`
//! * variance-reduced estimator `G_μ(x_k, u_j, ξ_i) − G_μ(x̃, u_j, ξ_i) + G`
//!   and its `b₀`-sample mini-batch average.
//!
//! All averages are accumulated sequentially in a fixed order so results are
//! bit-reproducible.

mod directions;

use std::collections::HashMap;

use rand::Rng;

pub use directions::{gaussian_direction, DirectionSet};

use crate::error::{Error, Result};
use crate::problem::{check_point, evaluate_component, BlackBoxProblem, Phase, QueryLedger};

/// `out = x + μ u`, the single place perturbed points are formed.
#[inline]
pub(crate) fn perturb(x: &[f64], u: &[f64], mu: f64, out: &mut [f64]) {
    for ((o, &xv), &uv) in out.iter_mut().zip(x).zip(u) {
        *o = xv + mu * uv;
    }
}

pub(crate) fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::param(format!(
            "smoothing radius must be positive and finite, got {mu}"
        )));
    }
    Ok(())
}

/// True when `μ` is small enough relative to `x` that the difference quotient
/// is dominated by floating-point cancellation.
pub fn smoothing_radius_is_risky(mu: f64, x: &[f64]) -> bool {
    let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    mu < 1e3 * f64::EPSILON * scale
}

/// Difference quotient `(F(x + μu; ξ_i) − F(x; ξ_i)) / μ`.
///
/// Charges 2 units to `phase`, or 1 when `base` already holds `F(x; ξ_i)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn two_point_slope<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    u: &[f64],
    i: usize,
    mu: f64,
    ledger: &mut QueryLedger,
    phase: Phase,
    base: Option<f64>,
    scratch: &mut [f64],
) -> Result<f64> {
    let base = match base {
        Some(v) => v,
        None => evaluate_component(problem, x, i, ledger, phase)?,
    };
    perturb(x, u, mu, scratch);
    let shifted = evaluate_component(problem, scratch, i, ledger, phase)?;
    Ok((shifted - base) / mu)
}

/// Two-point estimate `G_μ(x, u, ξ_i)`, charged to the inner phase.
pub fn two_point_estimate<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    u: &[f64],
    i: usize,
    mu: f64,
    ledger: &mut QueryLedger,
    base_value: Option<f64>,
) -> Result<Vec<f64>> {
    check_mu(mu)?;
    let d = problem.dim();
    if u.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: u.len(),
        });
    }
    let mut scratch = vec![0.0; d];
    let slope = two_point_slope(problem, x, u, i, mu, ledger, Phase::Inner, base_value, &mut scratch)?;
    Ok(u.iter().map(|&v| slope * v).collect())
}

/// Component indices forming the anchor batch `ξ_B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleBatch {
    indices: Vec<usize>,
    with_replacement: bool,
}

impl SampleBatch {
    /// Uniform subset of `0..n` of the given size.
    pub fn without_replacement<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Result<Self> {
        if size == 0 || size > n {
            return Err(Error::param(format!("batch size must lie in [1, {n}], got {size}")));
        }
        Ok(Self {
            indices: rand::seq::index::sample(rng, n, size).into_vec(),
            with_replacement: false,
        })
    }

    /// `size` independent uniform draws from `0..n`.
    pub fn with_replacement<R: Rng + ?Sized>(n: usize, size: usize, rng: &mut R) -> Result<Self> {
        if size == 0 || n == 0 {
            return Err(Error::param("batch size and n must be positive"));
        }
        Ok(Self {
            indices: (0..size).map(|_| rng.random_range(0..n)).collect(),
            with_replacement: true,
        })
    }

    /// A fixed batch of distinct indices.
    pub fn from_indices(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::param("batch must not be empty"));
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::Index {
                    what: "component",
                    index: i,
                    len: n,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::param(format!("duplicate index {i} in batch")));
            }
        }
        Ok(Self {
            indices,
            with_replacement: false,
        })
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
            with_replacement: false,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn with_replacement_flag(&self) -> bool {
        self.with_replacement
    }
}

/// Snapshot state for one epoch: anchor point, batch, direction set, every
/// evaluation made at the anchor, and the averaged anchor gradient `G`.
#[derive(Debug, Clone)]
pub struct AnchorCache {
    anchor: Vec<f64>,
    batch: SampleBatch,
    directions: DirectionSet,
    mu: f64,
    /// `F(x̃; ξ_b)` per batch position.
    base: Vec<f64>,
    /// `F(x̃ + μu_j; ξ_b)`, direction-major (`j * B + b`).
    perturbed: Vec<f64>,
    positions: HashMap<usize, usize>,
    gradient: Vec<f64>,
    valid: bool,
}

impl AnchorCache {
    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn batch(&self) -> &SampleBatch {
        &self.batch
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// The anchor gradient `G`.
    pub fn gradient(&self) -> &[f64] {
        &self.gradient
    }

    /// Number of cached function values, `B·(D+1)`.
    pub fn cached_values(&self) -> usize {
        self.base.len() + self.perturbed.len()
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    /// Mark the cache as belonging to a finished epoch; later estimator calls fail.
    pub fn invalidate(&mut self) {
        self.valid = false;
    }

    /// Cached slope of `G_μ(x̃, u_j, ξ_i)`, if `i` is in the batch.
    fn cached_slope(&self, i: usize, j: usize) -> Option<f64> {
        let &pos = self.positions.get(&i)?;
        let b = self.batch.len();
        Some((self.perturbed[j * b + pos] - self.base[pos]) / self.mu)
    }

    /// Rebuild `G` from the cached values alone (no evaluations).
    pub fn recompute_gradient(&self) -> Result<Vec<f64>> {
        accumulate_anchor_gradient(&self.directions, &self.base, &self.perturbed, self.mu)
    }
}

/// `G = (1/D) Σ_j s_j u_j` with `s_j = (1/B) Σ_b slope_{b j}`: batch sums inside,
/// directions outside, sequential.
fn accumulate_anchor_gradient(directions: &DirectionSet, base: &[f64], perturbed: &[f64], mu: f64) -> Result<Vec<f64>> {
    let b = base.len();
    let mut g = vec![0.0; directions.dim()];
    let mut u = vec![0.0; directions.dim()];
    for j in 0..directions.len() {
        directions.fill(j, &mut u)?;
        let row = &perturbed[j * b..(j + 1) * b];
        let mut slope_sum = 0.0;
        for (p, f0) in row.iter().zip(base) {
            slope_sum += (p - f0) / mu;
        }
        let s = slope_sum / b as f64;
        for (gl, ul) in g.iter_mut().zip(&u) {
            *gl += s * ul;
        }
    }
    let count = directions.len() as f64;
    for gl in &mut g {
        *gl /= count;
    }
    Ok(g)
}

/// Build the epoch's anchor cache, charging exactly `B·(D+1)` anchor-phase units.
pub fn anchor_gradient<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    anchor: &[f64],
    directions: &DirectionSet,
    batch: &SampleBatch,
    mu: f64,
    ledger: &mut QueryLedger,
) -> Result<AnchorCache> {
    check_mu(mu)?;
    if batch.is_empty() {
        return Err(Error::param("anchor batch must not be empty"));
    }
    let d = problem.dim();
    check_point(anchor, d)?;
    if directions.dim() != d {
        return Err(Error::Dimension {
            expected: d,
            got: directions.dim(),
        });
    }

    let mut base = Vec::with_capacity(batch.len());
    for &i in batch.indices() {
        base.push(evaluate_component(problem, anchor, i, ledger, Phase::Anchor)?);
    }
    let mut perturbed = Vec::with_capacity(batch.len() * directions.len());
    let mut u = vec![0.0; d];
    let mut point = vec![0.0; d];
    for j in 0..directions.len() {
        directions.fill(j, &mut u)?;
        perturb(anchor, &u, mu, &mut point);
        for &i in batch.indices() {
            perturbed.push(evaluate_component(problem, &point, i, ledger, Phase::Anchor)?);
        }
    }

    let gradient = accumulate_anchor_gradient(directions, &base, &perturbed, mu)?;
    let mut positions = HashMap::with_capacity(batch.len());
    for (pos, &i) in batch.indices().iter().enumerate() {
        positions.entry(i).or_insert(pos);
    }
    Ok(AnchorCache {
        anchor: anchor.to_vec(),
        batch: batch.clone(),
        directions: *directions,
        mu,
        base,
        perturbed,
        positions,
        gradient,
        valid: true,
    })
}

/// `(1/b) Σ_t [G_μ(x_k, u_{j_t}, ξ_{i_t}) − G_μ(x̃, u_{j_t}, ξ_{i_t})] + G` over `picks = [(i_t, j_t)]`.
fn variance_reduced_average<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    cache: &AnchorCache,
    picks: &[(usize, usize)],
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    if !cache.valid {
        return Err(Error::StaleCache);
    }
    let d = problem.dim();
    check_point(x, d)?;
    let n = problem.num_components();
    let mut acc = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut scratch = vec![0.0; d];
    for &(i, j) in picks {
        if i >= n {
            return Err(Error::Index {
                what: "component",
                index: i,
                len: n,
            });
        }
        cache.directions.fill(j, &mut u)?;
        let fresh = two_point_slope(problem, x, &u, i, cache.mu, ledger, Phase::Inner, None, &mut scratch)?;
        let anchored = match cache.cached_slope(i, j) {
            Some(s) => s,
            None => two_point_slope(
                problem,
                &cache.anchor,
                &u,
                i,
                cache.mu,
                ledger,
                Phase::Inner,
                None,
                &mut scratch,
            )?,
        };
        for (a, &ul) in acc.iter_mut().zip(&u) {
            *a += fresh * ul - anchored * ul;
        }
    }
    let count = picks.len() as f64;
    for (a, g) in acc.iter_mut().zip(&cache.gradient) {
        *a = *a / count + g;
    }
    Ok(acc)
}

/// Variance-reduced estimate for one `(i, j)` pick.
///
/// Charges 2 inner units when `i` is in the anchor batch (the anchor-side term
/// is read from the cache) and 4 otherwise.
pub fn vr_estimate<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    cache: &AnchorCache,
    j: usize,
    i: usize,
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    variance_reduced_average(problem, x, cache, &[(i, j)], ledger)
}

/// Draw one inner pick: `i` uniform in `0..n`, then `j` uniform in `0..D`.
pub fn draw_pick<R: Rng + ?Sized>(rng: &mut R, n: usize, directions: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..directions);
    (i, j)
}

/// Mini-batch variance-reduced estimate averaging `b0` independent picks from `sampler`.
pub fn minibatch_vr_estimate<P: BlackBoxProblem + ?Sized, R: Rng + ?Sized>(
    problem: &P,
    x: &[f64],
    cache: &AnchorCache,
    b0: usize,
    sampler: &mut R,
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    if b0 == 0 {
        return Err(Error::param("inner mini-batch size b0 must be at least 1"));
    }
    let n = problem.num_components();
    let picks: Vec<(usize, usize)> = (0..b0).map(|_| draw_pick(sampler, n, cache.directions.len())).collect();
    variance_reduced_average(problem, x, cache, &picks, ledger)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{FnProblem, Smoothness};
    use crate::rng::stream_rng;
    use approx::assert_relative_eq;

    fn quadratic(d: usize, n: usize) -> FnProblem {
        FnProblem::new(d, n, Smoothness::C11 { l1: 1.0 }, |x, _| {
            0.5 * x.iter().map(|v| v * v).sum::<f64>()
        })
        .unwrap()
    }

    fn linear(g: Vec<f64>, n: usize) -> FnProblem {
        let d = g.len();
        FnProblem::new(d, n, Smoothness::C11 { l1: 0.0 }, move |x, _| {
            g.iter().zip(x).map(|(a, b)| a * b).sum()
        })
        .unwrap()
    }

    #[test]
    fn two_point_is_exact_for_linear() {
        let p = linear(vec![1.0, 2.0], 1);
        let mut ledger = QueryLedger::new();
        let g = two_point_estimate(&p, &[0.0, 0.0], &[1.0, 0.0], 0, 0.5, &mut ledger, None).unwrap();
        assert_eq!(g, vec![1.0, 0.0]);
        assert_eq!(ledger.total(), 2);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let p = quadratic(3, 1);
        let mut ledger = QueryLedger::new();
        let g = two_point_estimate(&p, &[1.0, -2.0, 0.5], &[0.0; 3], 0, 0.1, &mut ledger, None).unwrap();
        assert!(g.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_point_closed_form_quadratic() {
        // slope = <x,u> + (μ/2)‖u‖² = 0 + 0.1
        let p = quadratic(2, 1);
        let mut ledger = QueryLedger::new();
        let g = two_point_estimate(&p, &[1.0, 1.0], &[1.0, -1.0], 0, 0.1, &mut ledger, None).unwrap();
        assert_relative_eq!(g[0], 0.1, max_relative = 1e-12);
        assert_relative_eq!(g[1], -0.1, max_relative = 1e-12);
    }

    #[test]
    fn cached_base_charges_one_unit() {
        let p = quadratic(2, 1);
        let mut ledger = QueryLedger::new();
        let x = [1.0, 1.0];
        let fresh = two_point_estimate(&p, &x, &[1.0, -1.0], 0, 0.1, &mut ledger, None).unwrap();
        let mut ledger2 = QueryLedger::new();
        let cached = two_point_estimate(&p, &x, &[1.0, -1.0], 0, 0.1, &mut ledger2, Some(1.0)).unwrap();
        assert_eq!(fresh, cached);
        assert_eq!(ledger2.total(), 1);
    }

    #[test]
    fn non_positive_mu_is_rejected() {
        let p = quadratic(1, 1);
        let mut ledger = QueryLedger::new();
        for mu in [0.0, -1.0, f64::NAN] {
            let err = two_point_estimate(&p, &[0.0], &[1.0], 0, mu, &mut ledger, None).unwrap_err();
            assert!(matches!(err, Error::Parameter(_)));
        }
        assert_eq!(ledger.total(), 0);
    }

    #[test]
    fn risky_mu_detection() {
        assert!(smoothing_radius_is_risky(1e-14, &[1.0]));
        assert!(!smoothing_radius_is_risky(1e-6, &[1.0]));
        assert!(smoothing_radius_is_risky(1e-10, &[1e6]));
    }

    #[test]
    fn singleton_anchor_matches_two_point() {
        let p = quadratic(4, 1);
        let x = [0.3, -0.2, 1.5, 0.7];
        let set = DirectionSet::new(5, 1, 4).unwrap();
        let batch = SampleBatch::full(1);
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &x, &set, &batch, 0.05, &mut ledger).unwrap();
        assert_eq!(ledger.count(Phase::Anchor), 2);
        let u = set.direction(0).unwrap();
        let g = two_point_estimate(&p, &x, &u, 0, 0.05, &mut ledger, None).unwrap();
        assert_eq!(cache.gradient(), &g[..]);
    }

    #[test]
    fn anchor_charges_b_times_d_plus_one() {
        let p = quadratic(3, 10);
        let set = DirectionSet::new(11, 7, 3).unwrap();
        let mut rng = stream_rng(3, crate::rng::Stream::Sampler);
        let batch = SampleBatch::without_replacement(10, 4, &mut rng).unwrap();
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &[1.0, 2.0, 3.0], &set, &batch, 0.01, &mut ledger).unwrap();
        assert_eq!(ledger.count(Phase::Anchor), 4 * (7 + 1));
        assert_eq!(cache.cached_values(), 4 * 8);
        let again = cache.recompute_gradient().unwrap();
        for (a, b) in again.iter().zip(cache.gradient()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn anchor_is_linear_exact() {
        let gvec = vec![0.5, -1.0, 2.0];
        let p = linear(gvec.clone(), 3);
        let set = DirectionSet::new(19, 6, 3).unwrap();
        let batch = SampleBatch::full(3);
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &[0.1, 0.2, 0.3], &set, &batch, 0.5, &mut ledger).unwrap();
        let mut expected = vec![0.0; 3];
        for j in 0..6 {
            let u = set.direction(j).unwrap();
            let dot: f64 = gvec.iter().zip(&u).map(|(a, b)| a * b).sum();
            for l in 0..3 {
                expected[l] += dot * u[l] / 6.0;
            }
        }
        for (a, b) in cache.gradient().iter().zip(&expected) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn empty_batch_is_rejected() {
        assert!(SampleBatch::from_indices(vec![], 3).is_err());
        assert!(SampleBatch::from_indices(vec![1, 1], 3).is_err());
        assert!(SampleBatch::from_indices(vec![3], 3).is_err());
    }

    #[test]
    fn without_replacement_is_distinct() {
        let mut rng = stream_rng(8, crate::rng::Stream::Sampler);
        let b = SampleBatch::without_replacement(20, 20, &mut rng).unwrap();
        let mut idx = b.indices().to_vec();
        idx.sort_unstable();
        assert_eq!(idx, (0..20).collect::<Vec<_>>());
        assert!(SampleBatch::without_replacement(5, 6, &mut rng).is_err());
    }

    #[test]
    fn vr_at_anchor_returns_g_exactly() {
        let p = quadratic(5, 3);
        let x = [0.4, -0.1, 0.9, 1.1, -2.0];
        let set = DirectionSet::new(1, 4, 5).unwrap();
        let batch = SampleBatch::full(3);
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &x, &set, &batch, 0.01, &mut ledger).unwrap();
        let before = ledger.count(Phase::Inner);
        for i in 0..3 {
            for j in 0..4 {
                let v = vr_estimate(&p, &x, &cache, j, i, &mut ledger).unwrap();
                assert_eq!(v, cache.gradient());
            }
        }
        assert_eq!(ledger.count(Phase::Inner) - before, 2 * 12);
    }

    #[test]
    fn vr_outside_batch_recomputes_anchor_term() {
        let p = quadratic(2, 4);
        let set = DirectionSet::new(2, 2, 2).unwrap();
        let batch = SampleBatch::from_indices(vec![0, 2], 4).unwrap();
        let mut ledger = QueryLedger::new();
        let x = [1.0, -1.0];
        let cache = anchor_gradient(&p, &x, &set, &batch, 0.1, &mut ledger).unwrap();
        let mut inner = QueryLedger::new();
        let hit = vr_estimate(&p, &x, &cache, 1, 2, &mut inner).unwrap();
        assert_eq!(inner.total(), 2);
        let miss = vr_estimate(&p, &x, &cache, 1, 3, &mut inner).unwrap();
        assert_eq!(inner.total(), 6);
        // Identical components: recomputing the anchor term gives the same answer.
        assert_eq!(hit, miss);
    }

    #[test]
    fn vr_is_constant_for_linear() {
        let p = linear(vec![1.0, -3.0, 0.25], 2);
        let set = DirectionSet::new(3, 3, 3).unwrap();
        let batch = SampleBatch::full(2);
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &[0.0; 3], &set, &batch, 0.5, &mut ledger).unwrap();
        let v = vr_estimate(&p, &[2.0, -1.0, 4.0], &cache, 2, 1, &mut ledger).unwrap();
        for (a, b) in v.iter().zip(cache.gradient()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12, max_relative = 1e-12);
        }
        let mut rng = stream_rng(4, crate::rng::Stream::Sampler);
        let m = minibatch_vr_estimate(&p, &[2.0, -1.0, 4.0], &cache, 8, &mut rng, &mut ledger).unwrap();
        for (a, b) in m.iter().zip(cache.gradient()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    /// Exhaustive average over all (i, j) picks versus the pair-averaged
    /// two-point terms computed independently.
    #[test]
    fn vr_pair_average_matches_enumeration() {
        let p = FnProblem::new(2, 2, Smoothness::C11 { l1: 4.0 }, |x, i| {
            let c = if i == 0 { [1.0, -0.5] } else { [-0.25, 2.0] };
            (x[0] - c[0]).powi(2) + 0.5 * (x[1] - c[1]).powi(4) / 4.0 + x[0] * x[1]
        })
        .unwrap();
        let anchor = [0.2, 0.1];
        let xk = [0.5, -0.3];
        let mu = 0.05;
        let set = DirectionSet::new(13, 2, 2).unwrap();
        let batch = SampleBatch::full(2);
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &anchor, &set, &batch, mu, &mut ledger).unwrap();

        let mut mean = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                let v = vr_estimate(&p, &xk, &cache, j, i, &mut ledger).unwrap();
                mean[0] += v[0] / 4.0;
                mean[1] += v[1] / 4.0;
            }
        }
        // Independent route: explicit difference quotients.
        let g = |x: &[f64], u: &[f64], i: usize| -> [f64; 2] {
            let xp = [x[0] + mu * u[0], x[1] + mu * u[1]];
            let s = (p.component_value(&xp, i) - p.component_value(x, i)) / mu;
            [s * u[0], s * u[1]]
        };
        let mut at_x = [0.0; 2];
        let mut at_anchor = [0.0; 2];
        for i in 0..2 {
            for j in 0..2 {
                let u = set.direction(j).unwrap();
                let a = g(&xk, &u, i);
                let b = g(&anchor, &u, i);
                for l in 0..2 {
                    at_x[l] += a[l] / 4.0;
                    at_anchor[l] += b[l] / 4.0;
                }
            }
        }
        for l in 0..2 {
            let expected = at_x[l] - at_anchor[l] + cache.gradient()[l];
            assert!((mean[l] - expected).abs() <= 1e-12, "{l}: {} vs {}", mean[l], expected);
            // The anchor gradient is the same pair average at x̃.
            assert!((cache.gradient()[l] - at_anchor[l]).abs() <= 1e-12);
        }
    }

    #[test]
    fn minibatch_of_one_matches_single_pick() {
        let p = quadratic(3, 5);
        let set = DirectionSet::new(21, 4, 3).unwrap();
        let batch = SampleBatch::from_indices(vec![0, 1, 4], 5).unwrap();
        let mut ledger = QueryLedger::new();
        let cache = anchor_gradient(&p, &[1.0, 0.0, -1.0], &set, &batch, 0.02, &mut ledger).unwrap();
        let x = [0.7, 0.1, -0.4];
        let mut rng_a = stream_rng(9, crate::rng::Stream::Sampler);
        let mut rng_b = rng_a.clone();
        for _ in 0..20 {
            let m = minibatch_vr_estimate(&p, &x, &cache, 1, &mut rng_a, &mut ledger).unwrap();
            let (i, j) = draw_pick(&mut rng_b, 5, 4);
            let v = vr_estimate(&p, &x, &cache, j, i, &mut ledger).unwrap();
            assert_eq!(
                m.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                v.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn minibatch_at_anchor_with_full_batch_is_g() {
        let p = quadratic(3, 4);
        let set = DirectionSet::new(6, 5, 3).unwrap();
        let batch = SampleBatch::full(4);
        let mut ledger = QueryLedger::new();
        let x = [0.2, 0.3, 0.4];
        let cache = anchor_gradient(&p, &x, &set, &batch, 0.1, &mut ledger).unwrap();
        let mut rng = stream_rng(10, crate::rng::Stream::Sampler);
        let before = ledger.total();
        let m = minibatch_vr_estimate(&p, &x, &cache, 3, &mut rng, &mut ledger).unwrap();
        assert_eq!(m, cache.gradient());
        assert_eq!(ledger.total() - before, 6);
        assert!(minibatch_vr_estimate(&p, &x, &cache, 0, &mut rng, &mut ledger).is_err());
    }

    #[test]
    fn stale_cache_is_rejected() {
        let p = quadratic(2, 1);
        let set = DirectionSet::new(1, 1, 2).unwrap();
        let mut ledger = QueryLedger::new();
        let mut cache = anchor_gradient(&p, &[0.0, 1.0], &set, &SampleBatch::full(1), 0.1, &mut ledger).unwrap();
        cache.invalidate();
        let err = vr_estimate(&p, &[0.0, 1.0], &cache, 0, 0, &mut ledger).unwrap_err();
        assert!(matches!(err, Error::StaleCache));
    }

    #[test]
    fn estimator_pipeline_is_deterministic() {
        let run = || {
            let p = quadratic(6, 4);
            let set = DirectionSet::new(99, 5, 6).unwrap();
            let mut rng = stream_rng(99, crate::rng::Stream::Sampler);
            let batch = SampleBatch::without_replacement(4, 3, &mut rng).unwrap();
            let mut ledger = QueryLedger::new();
            let cache = anchor_gradient(&p, &[0.5; 6], &set, &batch, 0.01, &mut ledger).unwrap();
            let v = minibatch_vr_estimate(&p, &[0.25; 6], &cache, 3, &mut rng, &mut ledger).unwrap();
            (v.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), ledger)
        };
        assert_eq!(run(), run());
    }
}
