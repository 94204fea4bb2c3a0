//! Small datasets shipped with the crate, and the generators that produced them.
//!
//! * `digits.csv`: 200 samples, 10 features, 5 classes. Each class is a noisy
//!   copy of a binary stroke pattern, 30% of labels are redrawn uniformly, and
//!   rows are scaled so `max ‖ξ‖ = 3`. The overlap keeps per-sample gradients
//!   spread out at the optimum, which is the regime where sampling noise matters.
//! * `attack_images.csv` / `attack_model.csv`: 30 images of 27 pixels in
//!   `[0, 1]` from 3 classes, and a linear classifier fitted to them by ridge
//!   least squares on one-hot targets.
//!
//! The shipped files are checked against the generators in the test suite; set
//! `ZOVR_REGENERATE_DATA=1` while running it to rewrite them.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

use super::data::{read_dataset_csv, read_model_csv, Dataset, LinearSoftmaxModel};

const DIGITS_CSV: &str = include_str!("../../data/digits.csv");
const ATTACK_IMAGES_CSV: &str = include_str!("../../data/attack_images.csv");
const ATTACK_MODEL_CSV: &str = include_str!("../../data/attack_model.csv");

pub const DIGITS_SEED: u64 = 0x6469_6769_7473;
pub const ATTACK_SEED: u64 = 0x6174_7461_636b;

/// Stroke patterns of the five digit-like classes over 10 features.
const STROKES: [[f64; 10]; 5] = [
    [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0],
    [1.0, 0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
    [1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
];

const LABEL_NOISE: f64 = 0.3;
const DIGITS_MAX_NORM: f64 = 3.0;

pub fn generate_digits(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.7).expect("valid normal");
    let per_class = 40;
    let mut rows = Vec::with_capacity(STROKES.len() * per_class);
    let mut labels = Vec::with_capacity(rows.capacity());
    for _ in 0..per_class {
        for (class, stroke) in STROKES.iter().enumerate() {
            rows.push(stroke.iter().map(|s| s + noise.sample(&mut rng)).collect::<Vec<f64>>());
            let relabel = rng.random::<f64>() < LABEL_NOISE;
            labels.push(if relabel {
                rng.random_range(0..STROKES.len())
            } else {
                class
            });
        }
    }
    let max_norm = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    for r in &mut rows {
        r.iter_mut().for_each(|v| *v *= DIGITS_MAX_NORM / max_norm);
    }
    Dataset::new(rows, labels, Some(STROKES.len())).expect("generated digits are well formed")
}

pub fn generate_attack_images(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (classes, d, per_class) = (3, 27, 10);
    let prototypes: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..d).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    let noise = Normal::new(0.0, 0.15).expect("valid normal");
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..per_class {
        for (class, proto) in prototypes.iter().enumerate() {
            rows.push(
                proto
                    .iter()
                    .map(|p| (p + noise.sample(&mut rng)).clamp(0.0, 1.0))
                    .collect::<Vec<f64>>(),
            );
            labels.push(class);
        }
    }
    Dataset::new(rows, labels, Some(classes)).expect("generated images are well formed")
}

/// Ridge least-squares fit of one-hot targets: `[W b] = argmin ‖[X 1][W b]ᵀ − Y‖² + λ‖[W b]‖²`.
pub fn fit_linear_classifier(data: &Dataset, lambda: f64) -> Result<LinearSoftmaxModel> {
    let (n, d, k) = (data.len(), data.dim(), data.num_classes());
    let x = DMatrix::from_fn(n, d + 1, |i, j| if j < d { data.row(i)[j] } else { 1.0 });
    let mut gram = x.transpose() * &x;
    for j in 0..=d {
        gram[(j, j)] += lambda;
    }
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Construction("ridge system is not positive definite".into()))?;
    let mut weights = Vec::with_capacity(k);
    let mut bias = Vec::with_capacity(k);
    for class in 0..k {
        let y = DVector::from_fn(n, |i, _| if data.label(i) == class { 1.0 } else { 0.0 });
        let coef = chol.solve(&(x.transpose() * y));
        weights.push(coef.rows(0, d).iter().copied().collect());
        bias.push(coef[d]);
    }
    LinearSoftmaxModel::new(weights, bias)
}

pub fn generate_attack_model(images: &Dataset) -> LinearSoftmaxModel {
    fit_linear_classifier(images, 0.1).expect("ridge fit of generated images")
}

/// Shipped digit-like dataset (`d = 10`, `n = 200`, 5 classes).
pub fn digits() -> Dataset {
    read_dataset_csv(DIGITS_CSV.as_bytes(), Some(5)).expect("shipped digits.csv parses")
}

/// The shipped digits with odd classes as label 1 and even classes as label 0.
pub fn digits_binary() -> Dataset {
    let ds = digits();
    let rows = ds.rows().map(<[f64]>::to_vec).collect();
    let labels = ds.labels().iter().map(|l| l % 2).collect();
    Dataset::new(rows, labels, Some(2)).expect("relabelled digits are well formed")
}

/// Shipped attack images (`d = 27`, `N = 30`, 3 classes).
pub fn attack_images() -> Dataset {
    read_dataset_csv(ATTACK_IMAGES_CSV.as_bytes(), Some(3)).expect("shipped attack_images.csv parses")
}

/// Shipped 3-class linear model for the attack images.
pub fn attack_model() -> LinearSoftmaxModel {
    read_model_csv(ATTACK_MODEL_CSV.as_bytes()).expect("shipped attack_model.csv parses")
}
