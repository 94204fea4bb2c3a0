use crate::error::{Error, Result};
use crate::rng;

/// `D` Gaussian directions in `ℝ^d`, regenerated on demand from a single seed.
///
/// Direction `j` is the Philox stream at `(seed; j, lane)` pushed through
/// Box–Muller, so only the seed needs to be stored per epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionSet {
    seed: u64,
    count: usize,
    dim: usize,
}

impl DirectionSet {
    pub fn new(seed: u64, count: usize, dim: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::param("direction set size D must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::param("dimension must be at least 1"));
        }
        Ok(Self { seed, count, dim })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Write direction `j` (zero-based) into `out`.
    pub fn fill(&self, j: usize, out: &mut [f64]) -> Result<()> {
        if j >= self.count {
            return Err(Error::Index {
                what: "direction",
                index: j,
                len: self.count,
            });
        }
        if out.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: out.len(),
            });
        }
        rng::fill_normal_vector(self.seed, j as u64, out);
        Ok(())
    }

    pub fn direction(&self, j: usize) -> Result<Vec<f64>> {
        let mut u = vec![0.0; self.dim];
        self.fill(j, &mut u)?;
        Ok(u)
    }
}

/// Direction `j` of `set`.
pub fn gaussian_direction(set: &DirectionSet, j: usize) -> Result<Vec<f64>> {
    set.direction(j)
}
