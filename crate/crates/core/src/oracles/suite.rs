//! Fixed-seed Monte-Carlo and enumeration checks of the moment and variance
//! bounds the estimators rely on.
//!
//! Inequality rows pass when `measured ≤ bound + 3·stderr`; equality rows pass
//! when `|measured − bound| ≤ 1e-12`.

use std::fmt;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::Result;
use crate::estimators::{anchor_gradient, two_point_estimate, DirectionSet, SampleBatch};
use crate::problem::{BlackBoxProblem, FnProblem, QueryLedger, Smoothness};
use crate::problems::{make_norm, make_quadratic, make_shifted_quadratics, Quadratic};
use crate::rng::mix;

use super::enumerate::{pair_average_bruteforce, subset_mean_sq_bruteforce, subset_mean_sq_formula};
use super::mc::{
    directional_moment_mc, fill_standard_normal, gaussian_moment_mc, oracle_rng, smoothed_gradient_mc, ScalarStats,
};

pub const GRID_DIMS: [usize; 4] = [2, 5, 10, 20];
pub const GRID_MUS: [f64; 2] = [0.01, 0.1];
pub const GRID_DIRECTIONS: [usize; 3] = [1, 4, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckKind {
    Inequality,
    Equality,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub params: String,
    pub kind: CheckKind,
    pub measured: f64,
    pub bound: f64,
    pub stderr: f64,
    /// `bound − measured` for inequalities, `|measured − bound|` for equalities.
    pub margin: f64,
    pub passed: bool,
}

impl LemmaCheck {
    fn inequality(name: &'static str, params: String, measured: f64, stderr: f64, bound: f64) -> Self {
        Self {
            name,
            params,
            kind: CheckKind::Inequality,
            measured,
            bound,
            stderr,
            margin: bound - measured,
            passed: measured <= bound + 3.0 * stderr,
        }
    }

    fn equality(name: &'static str, params: String, measured: f64, bound: f64) -> Self {
        let margin = (measured - bound).abs();
        Self {
            name,
            params,
            kind: CheckKind::Equality,
            measured,
            bound,
            stderr: 0.0,
            margin,
            passed: margin <= 1e-12,
        }
    }
}

impl fmt::Display for LemmaCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.kind {
            CheckKind::Inequality => "<=",
            CheckKind::Equality => "==",
        };
        write!(
            f,
            "{:<4} {:<28} {:<24} measured={:<12.6e} {rel} bound={:<12.6e} stderr={:<10.3e} margin={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.params,
            self.measured,
            self.bound,
            self.stderr,
            self.margin
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Multiplier on every sample count.
    pub sample_scale: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 20_240_601,
            sample_scale: 1.0,
        }
    }
}

impl SuiteOptions {
    fn samples(&self, base: u64) -> u64 {
        ((base as f64 * self.sample_scale).round() as u64).max(2)
    }
}

fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn diff_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    fill_standard_normal(rng, &mut v);
    v
}

/// Diagonal quadratic with curvatures in `[0.5, 2]`.
fn diag_quadratic<R: Rng>(rng: &mut R, d: usize) -> Quadratic {
    let rows = (0..d)
        .map(|i| {
            let mut r = vec![0.0; d];
            r[i] = rng.random_range(0.5..2.0);
            r
        })
        .collect();
    make_quadratic(d, Some(rows)).expect("diagonal PSD curvature")
}

struct Suite {
    opts: SuiteOptions,
    rows: Vec<LemmaCheck>,
    counter: u64,
}

impl Suite {
    fn next_seed(&mut self) -> u64 {
        self.counter += 1;
        mix(self.opts.seed, self.counter)
    }

    fn gaussian_moments(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for p in [2u32, 4, 6] {
                let seed = self.next_seed();
                let e = gaussian_moment_mc(d, p, self.opts.samples(200_000), seed)?;
                let bound = ((p + d as u32) as f64).powf(p as f64 / 2.0);
                self.rows.push(LemmaCheck::inequality(
                    "gaussian moment E|u|^p",
                    format!("d={d} p={p}"),
                    e.mean,
                    e.stderr,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn directional_moments(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            let seed = self.next_seed();
            let g = random_vector(&mut oracle_rng(seed ^ 1), d);
            let e = directional_moment_mc(&g, self.opts.samples(200_000), seed)?;
            self.rows.push(LemmaCheck::inequality(
                "directional moment",
                format!("d={d} exact=(d+2)|g|^2"),
                e.mean,
                e.stderr,
                (d as f64 + 4.0) * norm_sq(&g),
            ));
        }
        Ok(())
    }

    fn smoothing_gap_nonsmooth(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let seed = self.next_seed();
                let mut rng = oracle_rng(seed);
                let p = make_norm(d)?;
                let x = random_vector(&mut rng, d);
                let fx = p.component_value(&x, 0);
                let mut stats = ScalarStats::default();
                let mut u = vec![0.0; d];
                let mut point = vec![0.0; d];
                for _ in 0..self.opts.samples(100_000) {
                    fill_standard_normal(&mut rng, &mut u);
                    for l in 0..d {
                        point[l] = x[l] + mu * u[l];
                    }
                    stats.push(p.component_value(&point, 0) - fx);
                }
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "smoothing gap |f_mu-f| (C00)",
                    format!("d={d} mu={mu}"),
                    e.mean.abs(),
                    e.stderr,
                    mu * (d as f64).sqrt(),
                ));
            }
        }
        Ok(())
    }

    fn gradient_relation(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let mut rng = oracle_rng(self.next_seed());
                let q = diag_quadratic(&mut rng, d);
                let x = random_vector(&mut rng, d);
                let grad = q.gradient(&x).expect("quadratic gradient");
                let smoothed = q.smoothed_gradient(&x);
                let l1 = q.l1();
                let bound = 2.0 * norm_sq(&smoothed) + 0.5 * mu * mu * l1 * l1 * (d as f64 + 6.0).powi(3);
                self.rows.push(LemmaCheck::inequality(
                    "gradient relation (C11)",
                    format!("d={d} mu={mu}"),
                    norm_sq(&grad),
                    0.0,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn estimator_variance(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let mut rng = oracle_rng(self.next_seed());
                let q = diag_quadratic(&mut rng, d);
                let x = random_vector(&mut rng, d);
                let target = q.smoothed_gradient(&x);
                let base = q.value(&x);
                let mut ledger = QueryLedger::new();
                let mut stats = ScalarStats::default();
                let mut u = vec![0.0; d];
                for _ in 0..self.opts.samples(100_000) {
                    fill_standard_normal(&mut rng, &mut u);
                    let g = two_point_estimate(&q, &x, &u, 0, mu, &mut ledger, Some(base))?;
                    stats.push(diff_sq(&g, &target));
                }
                let l1 = q.l1();
                let grad = q.gradient(&x).expect("quadratic gradient");
                let bound =
                    0.5 * mu * mu * l1 * l1 * (d as f64 + 6.0).powi(3) + 2.0 * (d as f64 + 4.0) * norm_sq(&grad);
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "estimator variance (C11)",
                    format!("d={d} mu={mu}"),
                    e.mean,
                    e.stderr,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn subset_identity(&mut self) -> Result<()> {
        for n in 2..=8usize {
            let mut rng = oracle_rng(self.next_seed());
            let mut worst = (0.0f64, 0.0, 0.0);
            for _ in 0..5 {
                let mut family: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, 3)).collect();
                let mean: Vec<f64> = (0..3)
                    .map(|l| family.iter().map(|v| v[l]).sum::<f64>() / n as f64)
                    .collect();
                family
                    .iter_mut()
                    .for_each(|v| v.iter_mut().zip(&mean).for_each(|(a, m)| *a -= m));
                for b in 1..=n {
                    let brute = subset_mean_sq_bruteforce(&family, b)?;
                    let formula = subset_mean_sq_formula(&family, b);
                    if (brute - formula).abs() >= worst.0 {
                        worst = ((brute - formula).abs(), brute, formula);
                    }
                }
            }
            self.rows.push(LemmaCheck::equality(
                "subset mean identity",
                format!("n={n} all B"),
                worst.1,
                worst.2,
            ));
        }
        Ok(())
    }

    fn subset_direction_average(&mut self) -> Result<()> {
        let (n, d) = (8usize, 5usize);
        for directions in GRID_DIRECTIONS {
            for batch in [2usize, 8] {
                let mut rng = oracle_rng(self.next_seed());
                let g: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
                let gbar: Vec<f64> = (0..d).map(|l| g.iter().map(|v| v[l]).sum::<f64>() / n as f64).collect();
                let second: f64 = g
                    .iter()
                    .map(|gi| {
                        let cross: f64 = gi.iter().zip(&gbar).map(|(a, b)| a * b).sum();
                        (d as f64 + 2.0) * norm_sq(gi) - 2.0 * cross + norm_sq(&gbar)
                    })
                    .sum::<f64>()
                    / n as f64;
                let indicator = if batch < n { 1.0 / batch as f64 } else { 0.0 };
                let bound = (1.0 / directions as f64 + indicator) * second;

                let mut stats = ScalarStats::default();
                for _ in 0..self.opts.samples(20_000) {
                    let subset = sample(&mut rng, n, batch).into_vec();
                    let dirs: Vec<Vec<f64>> = (0..directions).map(|_| random_vector(&mut rng, d)).collect();
                    let h = |b: usize, j: usize| -> Vec<f64> {
                        let gi = &g[subset[b]];
                        let u = &dirs[j];
                        let dot: f64 = gi.iter().zip(u).map(|(a, c)| a * c).sum();
                        u.iter().zip(&gbar).map(|(ul, gl)| dot * ul - gl).collect()
                    };
                    stats.push(norm_sq(&pair_average_bruteforce(h, batch, directions)?));
                }
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "subset x direction average",
                    format!("n={n} B={batch} D={directions}"),
                    e.mean,
                    e.stderr,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn anchor_error_smooth(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                for directions in GRID_DIRECTIONS {
                    let seed = self.next_seed();
                    let mut rng = oracle_rng(seed);
                    let n = 4;
                    let centers: Vec<Vec<f64>> = (0..n).map(|_| random_vector(&mut rng, d)).collect();
                    let p = make_shifted_quadratics(centers)?;
                    let x = random_vector(&mut rng, d);
                    let grad = p.gradient(&x).expect("shifted gradient");
                    let batch = SampleBatch::full(n);
                    let mut stats = ScalarStats::default();
                    let mut ledger = QueryLedger::new();
                    for t in 0..self.opts.samples(2_000) {
                        let set = DirectionSet::new(mix(seed, t), directions, d)?;
                        let cache = anchor_gradient(&p, &x, &set, &batch, mu, &mut ledger)?;
                        stats.push(diff_sq(cache.gradient(), &grad));
                    }
                    let bound = (1.0 / directions as f64)
                        * (0.5 * mu * mu * (d as f64 + 6.0).powi(3) + 2.0 * (d as f64 + 4.0) * norm_sq(&grad));
                    let e = stats.estimate();
                    self.rows.push(LemmaCheck::inequality(
                        "anchor error (B=n)",
                        format!("d={d} mu={mu} D={directions}"),
                        e.mean,
                        e.stderr,
                        bound,
                    ));
                }
            }
        }
        let d = 10;
        for mu in GRID_MUS {
            for directions in GRID_DIRECTIONS {
                let seed = self.next_seed();
                let mut rng = oracle_rng(seed);
                let q = diag_quadratic(&mut rng, d);
                let l1 = q.l1();
                let x = random_vector(&mut rng, d);
                let grad = q.gradient(&x).expect("quadratic gradient");
                let copies = FnProblem::new(d, 8, Smoothness::C11 { l1 }, move |x, _| q.value(x))?;
                let batch_size = 2;
                let mut stats = ScalarStats::default();
                let mut ledger = QueryLedger::new();
                for t in 0..self.opts.samples(2_000) {
                    let set = DirectionSet::new(mix(seed, t), directions, d)?;
                    let batch = SampleBatch::without_replacement(8, batch_size, &mut rng)?;
                    let cache = anchor_gradient(&copies, &x, &set, &batch, mu, &mut ledger)?;
                    stats.push(diff_sq(cache.gradient(), &grad));
                }
                let factor = 1.0 / directions as f64 + 1.0 / batch_size as f64;
                let bound = factor
                    * (0.5 * mu * mu * l1 * l1 * (d as f64 + 6.0).powi(3) + 2.0 * (d as f64 + 4.0) * norm_sq(&grad));
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "anchor error (B<n, H=0)",
                    format!("d={d} mu={mu} D={directions} B=2"),
                    e.mean,
                    e.stderr,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn difference_bound_smooth(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let mut rng = oracle_rng(self.next_seed());
                let q = diag_quadratic(&mut rng, d);
                let anchor = random_vector(&mut rng, d);
                let mut delta = random_vector(&mut rng, d);
                let scale = 0.5 / norm_sq(&delta).sqrt();
                delta.iter_mut().for_each(|v| *v *= scale);
                let x: Vec<f64> = anchor.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let mut ledger = QueryLedger::new();
                let mut stats = ScalarStats::default();
                let mut u = vec![0.0; d];
                for _ in 0..self.opts.samples(100_000) {
                    fill_standard_normal(&mut rng, &mut u);
                    let a = two_point_estimate(&q, &x, &u, 0, mu, &mut ledger, None)?;
                    let b = two_point_estimate(&q, &anchor, &u, 0, mu, &mut ledger, None)?;
                    stats.push(diff_sq(&a, &b));
                }
                let l1 = q.l1();
                let bound =
                    1.5 * l1 * l1 * mu * mu * (d as f64 + 6.0).powi(3) + 3.0 * l1 * l1 * (d as f64 + 4.0) * 0.25;
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "inner difference (C11)",
                    format!("d={d} mu={mu} |dx|=0.5"),
                    e.mean,
                    e.stderr,
                    bound,
                ));
            }
        }
        Ok(())
    }

    fn anchor_error_nonsmooth(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let seed = self.next_seed();
                let mut rng = oracle_rng(seed);
                let p = make_norm(d)?;
                let x = random_vector(&mut rng, d);
                let reference = smoothed_gradient_mc(&p, &x, mu, self.opts.samples(400_000), seed ^ 7)?.mean;
                for directions in GRID_DIRECTIONS {
                    let batch = SampleBatch::full(1);
                    let mut ledger = QueryLedger::new();
                    let mut stats = ScalarStats::default();
                    for t in 0..self.opts.samples(4_000) {
                        let set = DirectionSet::new(mix(seed, t), directions, d)?;
                        let cache = anchor_gradient(&p, &x, &set, &batch, mu, &mut ledger)?;
                        stats.push(diff_sq(cache.gradient(), &reference));
                    }
                    let e = stats.estimate();
                    self.rows.push(LemmaCheck::inequality(
                        "anchor error (C00)",
                        format!("d={d} mu={mu} D={directions}"),
                        e.mean,
                        e.stderr,
                        (d as f64 + 2.0).powi(2) / directions as f64,
                    ));
                }
            }
        }
        Ok(())
    }

    fn difference_bound_nonsmooth(&mut self) -> Result<()> {
        for d in GRID_DIMS {
            for mu in GRID_MUS {
                let mut rng = oracle_rng(self.next_seed());
                let p = make_norm(d)?;
                let anchor = random_vector(&mut rng, d);
                let mut delta = random_vector(&mut rng, d);
                let scale = 0.5 / norm_sq(&delta).sqrt();
                delta.iter_mut().for_each(|v| *v *= scale);
                let x: Vec<f64> = anchor.iter().zip(&delta).map(|(a, b)| a + b).collect();
                let mut ledger = QueryLedger::new();
                let mut stats = ScalarStats::default();
                let mut u = vec![0.0; d];
                for _ in 0..self.opts.samples(100_000) {
                    fill_standard_normal(&mut rng, &mut u);
                    let a = two_point_estimate(&p, &x, &u, 0, mu, &mut ledger, None)?;
                    let b = two_point_estimate(&p, &anchor, &u, 0, mu, &mut ledger, None)?;
                    stats.push(diff_sq(&a, &b));
                }
                let e = stats.estimate();
                self.rows.push(LemmaCheck::inequality(
                    "inner difference (C00)",
                    format!("d={d} mu={mu} |dx|=0.5"),
                    e.mean,
                    e.stderr,
                    (d as f64 + 2.0) * 0.25 / (mu * mu),
                ));
            }
        }
        Ok(())
    }
}

/// Run every check. Deterministic for fixed options.
pub fn run_lemma_suite(opts: &SuiteOptions) -> Result<Vec<LemmaCheck>> {
    let mut suite = Suite {
        opts: *opts,
        rows: Vec::new(),
        counter: 0,
    };
    suite.gaussian_moments()?;
    suite.directional_moments()?;
    suite.smoothing_gap_nonsmooth()?;
    suite.gradient_relation()?;
    suite.estimator_variance()?;
    suite.subset_identity()?;
    suite.subset_direction_average()?;
    suite.anchor_error_smooth()?;
    suite.difference_bound_smooth()?;
    suite.anchor_error_nonsmooth()?;
    suite.difference_bound_nonsmooth()?;
    Ok(suite.rows)
}
