use crate::error::{Error, Result};
use crate::problem::BlackBoxProblem;

/// Where an [`OptimizerConfig`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Manual,
    AutoSmooth,
    AutoNonsmooth,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Manual => "manual",
            Provenance::AutoSmooth => "auto_smooth",
            Provenance::AutoNonsmooth => "auto_nonsmooth",
        }
    }
}

/// Every tunable of the variance-reduced methods.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// η
    pub step_size: f64,
    /// μ
    pub smoothing: f64,
    /// K, inner steps per epoch.
    pub inner_iterations: usize,
    /// S
    pub epochs: usize,
    /// D, directions per epoch.
    pub directions: usize,
    /// B, anchor sample-batch size.
    pub batch_size: usize,
    /// b₀, picks averaged per inner step.
    pub inner_batch: usize,
    /// Coupling parameter q; diagnostic only.
    pub coupling: Option<f64>,
    pub eval_budget: Option<u64>,
    /// Inner steps between trace records; `None` means `⌈K/10⌉`.
    pub checkpoint_stride: Option<usize>,
    pub master_seed: u64,
    pub provenance: Provenance,
    /// Starting point; the origin when absent.
    pub initial_point: Option<Vec<f64>>,
}

impl OptimizerConfig {
    pub fn manual(
        step_size: f64,
        smoothing: f64,
        inner_iterations: usize,
        epochs: usize,
        directions: usize,
        batch_size: usize,
    ) -> Self {
        Self {
            step_size,
            smoothing,
            inner_iterations,
            epochs,
            directions,
            batch_size,
            inner_batch: 1,
            coupling: None,
            eval_budget: None,
            checkpoint_stride: None,
            master_seed: 0,
            provenance: Provenance::Manual,
            initial_point: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn with_inner_batch(mut self, b0: usize) -> Self {
        self.inner_batch = b0;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.eval_budget = Some(budget);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.checkpoint_stride = Some(stride);
        self
    }

    pub fn stride(&self) -> usize {
        self.checkpoint_stride
            .unwrap_or_else(|| self.inner_iterations.div_ceil(10))
            .max(1)
    }

    /// T = S·K
    pub fn total_iterations(&self) -> u64 {
        self.epochs as u64 * self.inner_iterations as u64
    }

    /// B·(D+1), the cost of one anchor gradient.
    pub fn anchor_cost(&self) -> u64 {
        self.batch_size as u64 * (self.directions as u64 + 1)
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("step size", self.step_size)?;
        positive("smoothing radius", self.smoothing)?;
        if let Some(q) = self.coupling {
            positive("coupling q", q)?;
        }
        for (name, v) in [
            ("inner iterations K", self.inner_iterations),
            ("epochs S", self.epochs),
            ("directions D", self.directions),
            ("inner batch b0", self.inner_batch),
        ] {
            if v == 0 {
                return Err(Error::param(format!("{name} must be at least 1")));
            }
        }
        if self.batch_size == 0 || self.batch_size > n {
            return Err(Error::param(format!(
                "batch size B must lie in [1, {n}], got {}",
                self.batch_size
            )));
        }
        if self.checkpoint_stride == Some(0) {
            return Err(Error::param("checkpoint stride must be at least 1"));
        }
        if let Some(x0) = &self.initial_point {
            crate::problem::check_point(x0, d)?;
        }
        Ok(())
    }

    pub fn validate_for<P: BlackBoxProblem + ?Sized>(&self, problem: &P) -> Result<()> {
        self.validate(problem.num_components(), problem.dim())
    }
}

/// Multipliers for the order-of-magnitude schedules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryConstants {
    pub c_eta: f64,
    pub c_k: f64,
    pub c_d: f64,
    pub c_mu: f64,
    pub c_b: f64,
}

impl Default for TheoryConstants {
    fn default() -> Self {
        Self {
            c_eta: 1.0,
            c_k: 1.0,
            c_d: 1.0,
            c_mu: 1.0,
            c_b: 1.0,
        }
    }
}

impl TheoryConstants {
    /// Constants used by the benchmark harness for the logistic comparison.
    pub fn benchmark_preset() -> Self {
        Self {
            c_eta: 0.3,
            c_k: 128.0,
            c_d: 150.0,
            c_mu: 1.0,
            c_b: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_eta", self.c_eta),
            ("c_k", self.c_k),
            ("c_d", self.c_d),
            ("c_mu", self.c_mu),
            ("c_b", self.c_b),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
