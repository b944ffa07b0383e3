use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positions of a path on a finite, strictly increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSkeleton {
    times: Vec<f64>,
    /// Row-major `times.len() x dim` positions.
    positions: Vec<f64>,
    dim: usize,
}

impl PathSkeleton {
    pub fn new(times: Vec<f64>, positions: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be positive"));
        }
        if positions.len() != times.len() * dim {
            return Err(Error::param(
                "positions",
                format!("expected {} coordinates, got {}", times.len() * dim, positions.len()),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        Ok(Self {
            times,
            positions,
            dim,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    /// All coordinates, row-major.
    pub fn flat_positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.positions.chunks(self.dim))
    }
}
