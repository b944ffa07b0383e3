use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of grid points accepted by default.
pub const DEFAULT_POINT_BUDGET: usize = 1 << 22;

/// Uniform periodic grid on the box `[-L, L)^d`, `d ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub half_width: f64,
    /// Points per axis; a power of two.
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, half_width: f64, n_points: usize) -> Result<Self> {
        let g = Self {
            dim,
            half_width,
            n_points,
        };
        g.validate(DEFAULT_POINT_BUDGET)?;
        Ok(g)
    }

    pub fn line(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(1, half_width, n_points)
    }

    pub fn validate(&self, budget: usize) -> Result<()> {
        if !(self.dim == 1 || self.dim == 2) {
            return Err(Error::param("dim", "spectral grids support d = 1 or d = 2"));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::param("half_width", "must be positive"));
        }
        if self.n_points < 4 || !self.n_points.is_power_of_two() {
            return Err(Error::param("n_points", "must be a power of two and at least 4"));
        }
        if self.total_points() > budget {
            return Err(Error::param(
                "n_points",
                format!("{} grid points exceed the budget of {budget}", self.total_points()),
            ));
        }
        Ok(())
    }

    /// Spacing `h = 2L / n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    /// Volume element `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn total_points(&self) -> usize {
        self.n_points.pow(self.dim as u32)
    }

    /// Coordinate of axis index `i`: `-L + i h`.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    /// Point of flat index `idx` (row-major, first axis slowest).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match self.dim {
            1 => vec![self.coord(idx)],
            _ => vec![self.coord(idx / self.n_points), self.coord(idx % self.n_points)],
        }
    }

    /// Euclidean norm of the point with flat index `idx`.
    pub fn radius(&self, idx: usize) -> f64 {
        crate::stable::norm(&self.point(idx))
    }

    /// Axis index nearest to `x`, or an error outside `[-L, L)`.
    pub fn axis_index(&self, x: f64) -> Result<usize> {
        let h = self.spacing();
        let f = ((x + self.half_width) / h).round();
        if !(f >= 0.0 && f < self.n_points as f64) {
            return Err(Error::OutOfRange(format!(
                "coordinate {x} outside the grid [-{L}, {L})",
                L = self.half_width
            )));
        }
        Ok(f as usize)
    }

    /// Flat index of the grid point nearest to `x`.
    pub fn index_of(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.dim {
            return Err(Error::param("x", "dimension mismatch with the grid"));
        }
        match self.dim {
            1 => self.axis_index(x[0]),
            _ => Ok(self.axis_index(x[0])? * self.n_points + self.axis_index(x[1])?),
        }
    }

    /// Index of the origin.
    pub fn origin(&self) -> usize {
        let c = self.n_points / 2;
        match self.dim {
            1 => c,
            _ => c * self.n_points + c,
        }
    }

    /// Flat indices on the positive first half-axis, `x = (r, 0)`, `r > 0`.
    pub fn positive_axis(&self) -> Vec<usize> {
        let c = self.n_points / 2;
        (c + 1..self.n_points)
            .map(|i| match self.dim {
                1 => i,
                _ => i * self.n_points + c,
            })
            .collect()
    }

    /// Lowest nonzero frequency `π / L`.
    pub fn base_frequency(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let g = GridSpec::line(40.0, 4096).unwrap();
        assert_eq!(g.coord(g.origin()), 0.0);
        assert_eq!(g.index_of(&[0.0]).unwrap(), 2048);
        assert!(g.index_of(&[40.0]).is_err());
        assert!(GridSpec::line(1.0, 1000).is_err());
        let g2 = GridSpec::new(2, 4.0, 8).unwrap();
        assert_eq!(g2.point(g2.origin()), vec![0.0, 0.0]);
        assert_eq!(g2.index_of(&[1.0, -2.0]).unwrap(), 5 * 8 + 2);
    }
}
