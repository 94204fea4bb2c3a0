use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::problem::{check_point, evaluate_component, full_objective, BlackBoxProblem, Phase, QueryLedger};

/// Monte-Carlo estimate of a scalar expectation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√samples`.
    pub stderr: f64,
    pub samples: u64,
}

impl MCEstimate {
    /// `|mean − value| ≤ k·stderr`
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.stderr
    }
}

/// Componentwise Monte-Carlo estimate of a vector expectation.
#[derive(Debug, Clone, PartialEq)]
pub struct MCVectorEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: u64,
}

impl MCVectorEstimate {
    pub fn within(&self, value: &[f64], k: f64) -> bool {
        self.mean
            .iter()
            .zip(&self.stderr)
            .zip(value)
            .all(|((m, s), v)| (m - v).abs() <= k * s)
    }
}

/// Welford running mean and variance.
#[derive(Debug, Clone, Default)]
pub struct ScalarStats {
    count: u64,
    mean: f64,
    m2: f64,
}

impl ScalarStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn estimate(&self) -> MCEstimate {
        MCEstimate {
            mean: self.mean,
            stderr: (self.variance() / self.count.max(1) as f64).sqrt(),
            samples: self.count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct VectorStats {
    count: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl VectorStats {
    pub fn new(d: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; d],
            m2: vec![0.0; d],
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let c = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *m;
            *m += delta / c;
            *s += delta * (v - *m);
        }
    }

    pub fn estimate(&self) -> MCVectorEstimate {
        let denom = (self.count.max(2) - 1) as f64 * self.count.max(1) as f64;
        MCVectorEstimate {
            mean: self.mean.clone(),
            stderr: self.m2.iter().map(|s| (s / denom).sqrt()).collect(),
            samples: self.count,
        }
    }
}

/// Generator for the oracles. Deliberately a different algorithm and normal
/// transform from the optimizer's direction stream.
pub fn oracle_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn fill_standard_normal<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    for v in out {
        *v = rng.sample(StandardNormal);
    }
}

fn check_samples(samples: u64, min: u64) -> Result<()> {
    if samples < min {
        return Err(Error::param(format!("need at least {min} samples, got {samples}")));
    }
    Ok(())
}

/// `f_μ(x) = E_u f(x + μu)` by plain Monte Carlo.
pub fn smoothed_value_mc<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    mu: f64,
    samples: u64,
    seed: u64,
) -> Result<MCEstimate> {
    check_samples(samples, 2)?;
    check_point(x, problem.dim())?;
    let mut rng = oracle_rng(seed);
    let mut ledger = QueryLedger::new();
    let mut u = vec![0.0; x.len()];
    let mut point = vec![0.0; x.len()];
    let mut stats = ScalarStats::default();
    for _ in 0..samples {
        fill_standard_normal(&mut rng, &mut u);
        for ((p, xv), uv) in point.iter_mut().zip(x).zip(&u) {
            *p = xv + mu * uv;
        }
        stats.push(full_objective(problem, &point, &mut ledger, Phase::Reporting)?);
    }
    Ok(stats.estimate())
}

/// `∇f_μ(x) = E_{ξ,u} G_μ(x, u, ξ)` by Monte Carlo over fresh `(u, ξ)` pairs.
pub fn smoothed_gradient_mc<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    mu: f64,
    samples: u64,
    seed: u64,
) -> Result<MCVectorEstimate> {
    check_samples(samples, 2)?;
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::param("smoothing radius must be positive"));
    }
    let d = problem.dim();
    check_point(x, d)?;
    let n = problem.num_components();
    let mut ledger = QueryLedger::new();
    let base: Vec<f64> = (0..n)
        .map(|i| evaluate_component(problem, x, i, &mut ledger, Phase::Reporting))
        .collect::<Result<_>>()?;
    let mut rng = oracle_rng(seed);
    let mut u = vec![0.0; d];
    let mut point = vec![0.0; d];
    let mut g = vec![0.0; d];
    let mut stats = VectorStats::new(d);
    for _ in 0..samples {
        let i = if n == 1 { 0 } else { rng.random_range(0..n) };
        fill_standard_normal(&mut rng, &mut u);
        for ((p, xv), uv) in point.iter_mut().zip(x).zip(&u) {
            *p = xv + mu * uv;
        }
        let slope = (evaluate_component(problem, &point, i, &mut ledger, Phase::Reporting)? - base[i]) / mu;
        for (gl, ul) in g.iter_mut().zip(&u) {
            *gl = slope * ul;
        }
        stats.push(&g);
    }
    Ok(stats.estimate())
}

/// `E‖u‖^p` for `u ~ N(0, I_d)`, `p ∈ {2, 4, 6}`.
pub fn gaussian_moment_mc(d: usize, p: u32, samples: u64, seed: u64) -> Result<MCEstimate> {
    if ![2, 4, 6].contains(&p) {
        return Err(Error::param(format!("moment order must be 2, 4 or 6, got {p}")));
    }
    if d == 0 {
        return Err(Error::param("dimension must be at least 1"));
    }
    check_samples(samples, 10_000)?;
    let mut rng = oracle_rng(seed);
    let mut u = vec![0.0; d];
    let mut stats = ScalarStats::default();
    for _ in 0..samples {
        fill_standard_normal(&mut rng, &mut u);
        let sq: f64 = u.iter().map(|v| v * v).sum();
        stats.push(sq.powi(p as i32 / 2));
    }
    Ok(stats.estimate())
}

/// `E[⟨g, u⟩² ‖u‖²]` for `u ~ N(0, I_d)`.
pub fn directional_moment_mc(g: &[f64], samples: u64, seed: u64) -> Result<MCEstimate> {
    if g.is_empty() {
        return Err(Error::param("g must be non-empty"));
    }
    check_samples(samples, 2)?;
    let mut rng = oracle_rng(seed);
    let mut u = vec![0.0; g.len()];
    let mut stats = ScalarStats::default();
    for _ in 0..samples {
        fill_standard_normal(&mut rng, &mut u);
        let dot: f64 = g.iter().zip(&u).map(|(a, b)| a * b).sum();
        let sq: f64 = u.iter().map(|v| v * v).sum();
        stats.push(dot * dot * sq);
    }
    Ok(stats.estimate())
}

/// Central differences `(f(x + h e_l) − f(x − h e_l)) / 2h`, charged to the reporting phase.
pub fn finite_diff_gradient<P: BlackBoxProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    h: f64,
    ledger: &mut QueryLedger,
) -> Result<Vec<f64>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("step h must be positive, got {h}")));
    }
    check_point(x, problem.dim())?;
    let mut point = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for l in 0..x.len() {
        point[l] = x[l] + h;
        let up = full_objective(problem, &point, ledger, Phase::Reporting)?;
        point[l] = x[l] - h;
        let down = full_objective(problem, &point, ledger, Phase::Reporting)?;
        point[l] = x[l];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welford_matches_two_pass() {
        let xs = [1.0, 4.0, -2.0, 7.5, 0.25];
        let mut s = ScalarStats::default();
        xs.iter().for_each(|&x| s.push(x));
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 4.0;
        assert!((s.mean() - mean).abs() < 1e-14);
        assert!((s.variance() - var).abs() < 1e-12);
        assert!((s.estimate().stderr - (var / 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vector_stats_match_scalar() {
        let rows = [[1.0, -1.0], [2.0, 0.5], [4.0, 3.0]];
        let mut v = VectorStats::new(2);
        let mut s = [ScalarStats::default(), ScalarStats::default()];
        for r in &rows {
            v.push(r);
            s[0].push(r[0]);
            s[1].push(r[1]);
        }
        let e = v.estimate();
        for (l, stats) in s.iter().enumerate() {
            assert!((e.mean[l] - stats.mean()).abs() < 1e-14);
            assert!((e.stderr[l] - stats.estimate().stderr).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_direction_moment() {
        let e = directional_moment_mc(&[0.0; 4], 100, 1).unwrap();
        assert_eq!(e.mean, 0.0);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn moment_order_validation() {
        assert!(gaussian_moment_mc(3, 3, 10_000, 0).is_err());
        assert!(gaussian_moment_mc(3, 2, 100, 0).is_err());
    }
}
