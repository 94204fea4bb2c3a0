//! Objective families and data ingestion.

mod attack;
pub mod builtin;
mod data;
mod logistic;
mod quadratic;
mod sigmoid;
mod synthetic;

pub use attack::{make_universal_attack, UniversalAttack};
pub use data::{load_dataset_csv, load_model_csv, read_dataset_csv, read_model_csv, Dataset, LinearSoftmaxModel};
pub use logistic::{make_logistic, Logistic};
pub use quadratic::{make_quadratic, Quadratic};
pub use sigmoid::{make_sigmoid_least_squares, SigmoidLeastSquares};
pub use synthetic::{make_linear, make_norm, make_shifted_quadratics, EuclideanNorm, Linear, ShiftedQuadratics};
