use std::sync::Arc;

use crate::error::{Error, Result};
use crate::problem::{BlackBoxProblem, Smoothness};

use super::data::{Dataset, LinearSoftmaxModel};

/// Universal perturbation loss against a linear classifier.
///
/// Component `i` is
/// `C·max{[Z(x_i+θ)]_{l_i} − max_{j≠l_i} [Z(x_i+θ)]_j, −κ} + ‖θ‖²/N`,
/// so the average over the `N` images is the margin loss plus `‖θ‖²`.
#[derive(Debug, Clone)]
pub struct UniversalAttack {
    model: Arc<LinearSoftmaxModel>,
    images: Arc<Dataset>,
    c: f64,
    kappa: f64,
    radius: f64,
}

pub fn make_universal_attack(
    model: impl Into<Arc<LinearSoftmaxModel>>,
    images: impl Into<Arc<Dataset>>,
    c: f64,
    kappa: f64,
) -> Result<UniversalAttack> {
    let model = model.into();
    let images = images.into();
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Construction(format!("trade-off C must be positive, got {c}")));
    }
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Construction(format!(
            "confidence κ must be non-negative, got {kappa}"
        )));
    }
    if model.dim() != images.dim() {
        return Err(Error::Construction(format!(
            "model expects {} inputs, images have {}",
            model.dim(),
            images.dim()
        )));
    }
    if let Some((i, &l)) = images
        .labels()
        .iter()
        .enumerate()
        .find(|(_, &l)| l >= model.num_classes())
    {
        return Err(Error::Construction(format!(
            "image {i} has label {l} but the model has {} classes",
            model.num_classes()
        )));
    }
    Ok(UniversalAttack {
        model,
        images,
        c,
        kappa,
        radius: 1.0,
    })
}

impl UniversalAttack {
    /// Radius `R` of the box `‖θ‖ ≤ R` used for the documented `L0`.
    pub fn with_box_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn model(&self) -> &LinearSoftmaxModel {
        &self.model
    }

    pub fn images(&self) -> &Dataset {
        &self.images
    }

    /// Margin `[Z(x_i+θ)]_{l_i} − max_{j≠l_i} [Z(x_i+θ)]_j`.
    pub fn margin(&self, theta: &[f64], i: usize) -> f64 {
        let shifted: Vec<f64> = self.images.row(i).iter().zip(theta).map(|(a, b)| a + b).collect();
        let z = self.model.logits(&shifted);
        let l = self.images.label(i);
        let other = z
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != l)
            .map(|(_, &v)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        z[l] - other
    }
}

impl BlackBoxProblem for UniversalAttack {
    fn dim(&self) -> usize {
        self.images.dim()
    }

    fn num_components(&self) -> usize {
        self.images.len()
    }

    fn component_value(&self, theta: &[f64], i: usize) -> f64 {
        let reg = theta.iter().map(|v| v * v).sum::<f64>() / self.images.len() as f64;
        self.c * self.margin(theta, i).max(-self.kappa) + reg
    }

    /// `L0 = 2C·max_k ‖W_k‖ + 2R/N` on `‖θ‖ ≤ R`.
    fn smoothness(&self) -> Smoothness {
        Smoothness::C00 {
            l0: 2.0 * self.c * self.model.max_row_norm() + 2.0 * self.radius / self.images.len() as f64,
        }
    }
}
