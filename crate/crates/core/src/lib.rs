//! Zeroth-order optimization of finite sums with Gaussian smoothing and
//! SVRG-style variance reduction.
//!
//! Objectives implement [`BlackBoxProblem`] and are touched only through
//! single-component evaluations charged to a [`QueryLedger`]. The optimizers in
//! [`optimizers`] produce a [`Trace`] of checkpoints keyed by the cumulative
//! evaluation count.
//!
//! ```
//! use zovr_core::problems::make_quadratic;
//! use zovr_core::{run_szvr_g, OptimizerConfig, QueryLedger};
//!
//! let problem = make_quadratic(5, None).unwrap();
//! let mut config = OptimizerConfig::manual(0.05, 1e-3, 20, 5, 1, 1);
//! config.initial_point = Some(vec![1.0; 5]);
//! let mut ledger = QueryLedger::new();
//! let trace = run_szvr_g(&problem, &config, &mut ledger).unwrap();
//! assert!(trace.last().unwrap().f_value < trace.records[0].f_value);
//! ```

pub mod error;
pub mod estimators;
pub mod optimizers;
pub mod oracles;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod trace;

pub use error::{Error, Result};
pub use estimators::{
    anchor_gradient, gaussian_direction, minibatch_vr_estimate, two_point_estimate, vr_estimate, AnchorCache,
    DirectionSet, SampleBatch,
};
pub use optimizers::{
    auto_config_nonsmooth, auto_config_smooth, run_rgf, run_rsg, run_szvr_g, run_szvr_g_minibatch, Algorithm,
    BaselineConfig, EpochSizing, OptimizerConfig, Provenance, StepSchedule, TheoryConstants,
};
pub use problem::{
    evaluate_component, full_objective, report_point, BlackBoxProblem, FnProblem, Phase, QueryLedger, Smoothness,
};
pub use trace::{read_trace_csv, RunConfig, Trace, TraceRecord, TraceRow, TRACE_HEADER};
