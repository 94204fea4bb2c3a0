use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, Smoothness};

use super::data::Dataset;

/// `log(1 + eᶻ)` without overflow.
pub(crate) fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cross-entropy loss of a logistic model `h_θ(ξ) = σ(θᵀξ)`.
///
/// With two classes θ has `d` entries and label 1 is the positive class. With
/// `K ≥ 3` classes θ is the concatenation of `K` one-vs-all blocks of length `d`
/// and the per-sample loss is the sum of the `K` binary losses.
#[derive(Debug, Clone)]
pub struct Logistic {
    data: Arc<Dataset>,
    blocks: usize,
}

pub fn make_logistic(dataset: impl Into<Arc<Dataset>>) -> Result<Logistic> {
    let data = dataset.into();
    if data.num_classes() < 2 {
        return Err(Error::Construction(
            "logistic regression needs at least 2 classes".into(),
        ));
    }
    let blocks = if data.num_classes() == 2 { 1 } else { data.num_classes() };
    Ok(Logistic { data, blocks })
}

impl Logistic {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    fn target(&self, i: usize, block: usize) -> f64 {
        let label = self.data.label(i);
        let positive = if self.blocks == 1 { label == 1 } else { label == block };
        if positive {
            1.0
        } else {
            0.0
        }
    }
}

impl BlackBoxProblem for Logistic {
    fn dim(&self) -> usize {
        self.data.dim() * self.blocks
    }

    fn num_components(&self) -> usize {
        self.data.len()
    }

    fn component_value(&self, theta: &[f64], i: usize) -> f64 {
        let xi = self.data.row(i);
        let d = self.data.dim();
        let mut loss = 0.0;
        for k in 0..self.blocks {
            let z = dot(&theta[k * d..(k + 1) * d], xi);
            loss += softplus(z) - self.target(i, k) * z;
        }
        loss
    }

    /// `L1 = ¼ max_i ‖ξ_i‖²`; the Hessian is block diagonal with blocks `σ′ ξξᵀ`.
    fn smoothness(&self) -> Smoothness {
        Smoothness::C11 {
            l1: 0.25 * self.data.max_row_norm_sq(),
        }
    }

    fn gradient(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let d = self.data.dim();
        let n = self.data.len() as f64;
        let mut g = vec![0.0; self.dim()];
        for i in 0..self.data.len() {
            let xi = self.data.row(i);
            for k in 0..self.blocks {
                let z = dot(&theta[k * d..(k + 1) * d], xi);
                let r = sigmoid(z) - self.target(i, k);
                for (gl, xl) in g[k * d..(k + 1) * d].iter_mut().zip(xi) {
                    *gl += r * xl;
                }
            }
        }
        g.iter_mut().for_each(|v| *v /= n);
        Some(g)
    }
}
