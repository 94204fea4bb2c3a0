use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, Smoothness};

/// `F(x; ξ_i) = ⟨g, x⟩` for every component.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    g: Vec<f64>,
    n: usize,
}

pub fn make_linear(g: Vec<f64>, n: usize) -> Result<Linear> {
    if g.is_empty() || n == 0 {
        return Err(Error::Construction("linear problem needs d ≥ 1 and n ≥ 1".into()));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("gradient has non-finite entries".into()));
    }
    Ok(Linear { g, n })
}

impl BlackBoxProblem for Linear {
    fn dim(&self) -> usize {
        self.g.len()
    }
    fn num_components(&self) -> usize {
        self.n
    }
    fn component_value(&self, x: &[f64], _i: usize) -> f64 {
        self.g.iter().zip(x).map(|(a, b)| a * b).sum()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C11 { l1: 0.0 }
    }
    fn gradient(&self, _x: &[f64]) -> Option<Vec<f64>> {
        Some(self.g.clone())
    }
    fn variance_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `F(x) = ‖x‖`, non-smooth at the origin with `L0 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EuclideanNorm {
    d: usize,
}

pub fn make_norm(d: usize) -> Result<EuclideanNorm> {
    if d == 0 {
        return Err(Error::Construction("dimension must be at least 1".into()));
    }
    Ok(EuclideanNorm { d })
}

impl BlackBoxProblem for EuclideanNorm {
    fn dim(&self) -> usize {
        self.d
    }
    fn num_components(&self) -> usize {
        1
    }
    fn component_value(&self, x: &[f64], _i: usize) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C00 { l0: 1.0 }
    }
}

/// `F(x; ξ_i) = ½‖x − c_i‖²`: identical curvature, heterogeneous minimisers.
///
/// `∇f_μ(x) = x − c̄` and the component variance is exactly
/// `H = (1/n) Σ ‖c_i − c̄‖²` at every `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedQuadratics {
    d: usize,
    centers: Vec<f64>,
    mean: Vec<f64>,
    spread: f64,
}

pub fn make_shifted_quadratics(centers: Vec<Vec<f64>>) -> Result<ShiftedQuadratics> {
    let n = centers.len();
    let d = centers.first().map_or(0, Vec::len);
    if n == 0 || d == 0 || centers.iter().any(|c| c.len() != d) {
        return Err(Error::Construction(
            "centers must be a non-empty list of equal-length vectors".into(),
        ));
    }
    let flat: Vec<f64> = centers.into_iter().flatten().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("centers have non-finite entries".into()));
    }
    let mut mean = vec![0.0; d];
    for c in flat.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(c) {
            *m += v / n as f64;
        }
    }
    let spread = flat
        .chunks_exact(d)
        .map(|c| c.iter().zip(&mean).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum::<f64>()
        / n as f64;
    Ok(ShiftedQuadratics {
        d,
        centers: flat,
        mean,
        spread,
    })
}

impl ShiftedQuadratics {
    pub fn center(&self, i: usize) -> &[f64] {
        &self.centers[i * self.d..(i + 1) * self.d]
    }

    pub fn mean_center(&self) -> &[f64] {
        &self.mean
    }

    /// `∇F_μ(x; ξ_i) = x − c_i`
    pub fn component_gradient(&self, x: &[f64], i: usize) -> Vec<f64> {
        x.iter().zip(self.center(i)).map(|(a, b)| a - b).collect()
    }
}

impl BlackBoxProblem for ShiftedQuadratics {
    fn dim(&self) -> usize {
        self.d
    }
    fn num_components(&self) -> usize {
        self.centers.len() / self.d
    }
    fn component_value(&self, x: &[f64], i: usize) -> f64 {
        0.5 * x
            .iter()
            .zip(self.center(i))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }
    fn smoothness(&self) -> Smoothness {
        Smoothness::C11 { l1: 1.0 }
    }
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(x.iter().zip(&self.mean).map(|(a, b)| a - b).collect())
    }
    fn variance_bound(&self) -> Option<f64> {
        Some(self.spread)
    }
}
