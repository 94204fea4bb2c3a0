//! Independent ground truth for tests and the `verify` command: Monte-Carlo
//! estimates with standard errors, exhaustive enumerations, finite differences,
//! and the fixed-seed bound-check suite.
//!
//! Gaussian draws here come from ChaCha12 through `rand_distr`'s
//! `StandardNormal`, not from the optimizer's Philox stream.

mod enumerate;
mod mc;
mod suite;

pub use enumerate::{pair_average_bruteforce, subset_mean_sq_bruteforce, subset_mean_sq_formula};
pub use mc::{
    directional_moment_mc, fill_standard_normal, finite_diff_gradient, gaussian_moment_mc, oracle_rng,
    smoothed_gradient_mc, smoothed_value_mc, MCEstimate, MCVectorEstimate, ScalarStats, VectorStats,
};
pub use suite::{run_lemma_suite, CheckKind, LemmaCheck, SuiteOptions, GRID_DIMS, GRID_DIRECTIONS, GRID_MUS};
