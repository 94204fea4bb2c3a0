use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, Smoothness};

/// `F(x) = ½ xᵀAx` with `A` symmetric positive semidefinite; a single component.
///
/// Gaussian smoothing is available in closed form: `f_μ(x) = f(x) + (μ²/2) tr A`
/// and `∇f_μ(x) = Ax`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic {
    d: usize,
    /// Row-major `A`; `None` for the identity.
    matrix: Option<Vec<f64>>,
    trace: f64,
    l1: f64,
}

pub fn make_quadratic(d: usize, curvature: Option<Vec<Vec<f64>>>) -> Result<Quadratic> {
    if d == 0 {
        return Err(Error::Construction("dimension must be at least 1".into()));
    }
    let Some(rows) = curvature else {
        return Ok(Quadratic {
            d,
            matrix: None,
            trace: d as f64,
            l1: 1.0,
        });
    };
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Construction(format!("curvature must be {d}×{d}")));
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(Error::Construction("curvature has non-finite entries".into()));
    }
    let scale = flat.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..i {
            if (flat[i * d + j] - flat[j * d + i]).abs() > 1e-12 * scale {
                return Err(Error::Construction(format!("curvature is not symmetric at ({i}, {j})")));
            }
        }
    }
    let eig = DMatrix::from_row_slice(d, d, &flat).symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if lo < -1e-10 * scale {
        return Err(Error::Construction(format!(
            "curvature is not positive semidefinite (eigenvalue {lo})"
        )));
    }
    let trace = (0..d).map(|i| flat[i * d + i]).sum();
    Ok(Quadratic {
        d,
        matrix: Some(flat),
        trace,
        l1: hi.max(0.0),
    })
}

impl Quadratic {
    pub fn l1(&self) -> f64 {
        self.l1
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        match &self.matrix {
            None => x.to_vec(),
            Some(a) => a
                .chunks_exact(self.d)
                .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
                .collect(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.matrix {
            None => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            Some(_) => 0.5 * self.apply(x).iter().zip(x).map(|(a, b)| a * b).sum::<f64>(),
        }
    }

    /// `f_μ(x) = f(x) + (μ²/2) tr A`
    pub fn smoothed_value(&self, x: &[f64], mu: f64) -> f64 {
        self.value(x) + 0.5 * mu * mu * self.trace
    }

    /// `∇f_μ(x) = Ax`
    pub fn smoothed_gradient(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
    }
}

impl BlackBoxProblem for Quadratic {
    fn dim(&self) -> usize {
        self.d
    }

    fn num_components(&self) -> usize {
        1
    }

    fn component_value(&self, x: &[f64], _i: usize) -> f64 {
        self.value(x)
    }

    fn smoothness(&self) -> Smoothness {
        Smoothness::C11 { l1: self.l1 }
    }

    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        Some(self.apply(x))
    }

    fn variance_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_examples() {
        let q = make_quadratic(3, None).unwrap();
        assert_eq!(q.value(&[1.0, 0.0, 0.0]), 0.5);
        assert_eq!(q.gradient(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0, 0.0]);
        assert_eq!(q.value(&[0.0; 3]), 0.0);
        assert!((q.smoothed_value(&[0.0; 3], 0.2) - 0.06).abs() < 1e-15);
    }

    #[test]
    fn matrix_curvature() {
        let q = make_quadratic(2, Some(vec![vec![2.0, 1.0], vec![1.0, 2.0]])).unwrap();
        assert!((q.l1() - 3.0).abs() < 1e-12);
        assert_eq!(q.trace(), 4.0);
        // ½ (2 + 2 + 2·1) at x = (1, 1)
        assert_eq!(q.value(&[1.0, 1.0]), 3.0);
        assert_eq!(q.gradient(&[1.0, 0.0]).unwrap(), vec![2.0, 1.0]);
    }

    #[test]
    fn rejects_bad_curvature() {
        assert!(make_quadratic(2, Some(vec![vec![1.0, 2.0], vec![0.0, 1.0]])).is_err());
        assert!(make_quadratic(2, Some(vec![vec![1.0, 0.0], vec![0.0, -1.0]])).is_err());
        assert!(make_quadratic(2, Some(vec![vec![1.0, 0.0]])).is_err());
        assert!(make_quadratic(0, None).is_err());
    }
}
