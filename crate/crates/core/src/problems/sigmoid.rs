use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, Smoothness};

use super::data::Dataset;
use super::logistic::{dot, sigmoid};

/// Non-convex least squares on a sigmoid: `F(θ; ξ_i) = (σ(θᵀξ_i) − t_i)²` with
/// target `t_i = 1` for label 1 and `0` for label 0.
#[derive(Debug, Clone)]
pub struct SigmoidLeastSquares {
    data: Arc<Dataset>,
}

pub fn make_sigmoid_least_squares(dataset: impl Into<Arc<Dataset>>) -> Result<SigmoidLeastSquares> {
    let data = dataset.into();
    if data.num_classes() != 2 {
        return Err(Error::Construction(format!(
            "sigmoid least squares needs binary labels, got {} classes",
            data.num_classes()
        )));
    }
    Ok(SigmoidLeastSquares { data })
}

impl SigmoidLeastSquares {
    fn target(&self, i: usize) -> f64 {
        if self.data.label(i) == 1 {
            1.0
        } else {
            0.0
        }
    }
}

impl BlackBoxProblem for SigmoidLeastSquares {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_components(&self) -> usize {
        self.data.len()
    }

    fn component_value(&self, theta: &[f64], i: usize) -> f64 {
        let r = sigmoid(dot(theta, self.data.row(i))) - self.target(i);
        r * r
    }

    /// Second derivative in `z` is `2σ′² + 2(σ − t)σ″`, bounded by
    /// `2·(1/4)² + 2·1/(6√3)`; times `max ‖ξ_i‖²`.
    fn smoothness(&self) -> Smoothness {
        let curvature = 0.125 + 2.0 / (6.0 * 3f64.sqrt());
        Smoothness::C11 {
            l1: curvature * self.data.max_row_norm_sq(),
        }
    }

    fn gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let mut g = vec![0.0; self.dim()];
        for i in 0..self.data.len() {
            let xi = self.data.row(i);
            let s = sigmoid(dot(theta, xi));
            let coef = 2.0 * (s - self.target(i)) * s * (1.0 - s);
            for (gl, xl) in g.iter_mut().zip(xi) {
                *gl += coef * xl;
            }
        }
        let n = self.data.len() as f64;
        g.iter_mut().for_each(|v| *v /= n);
        Some(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters() {
        let ds = Dataset::new(vec![vec![1.0, -1.0], vec![2.0, 0.0]], vec![1, 1], Some(2)).unwrap();
        let p = make_sigmoid_least_squares(ds).unwrap();
        assert_eq!(p.component_value(&[0.0, 0.0], 0), 0.25);
    }

    #[test]
    fn loss_in_unit_interval() {
        let ds = Dataset::new(vec![vec![3.0], vec![-3.0]], vec![0, 1], None).unwrap();
        let p = make_sigmoid_least_squares(ds).unwrap();
        for t in [-100.0, -1.0, 0.0, 2.0, 100.0] {
            for i in 0..2 {
                let v = p.component_value(&[t], i);
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn rejects_multiclass() {
        let ds = Dataset::new(vec![vec![1.0]; 3], vec![0, 1, 2], None).unwrap();
        assert!(make_sigmoid_least_squares(ds).is_err());
    }
}
