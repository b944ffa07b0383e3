//! `(-Δ)^{α/2} + V` on a periodic grid: the kinetic part is the Fourier
//! multiplier `|k|^α`, the potential acts by pointwise multiplication.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::GridSpec;
use crate::error::Result;
use crate::potentials::PotentialSpec;
use crate::stable::StableParams;

/// Default clipping level for singular potentials.
pub const DEFAULT_V_CAP: f64 = 1e6;

/// Discretised Hamiltonian; immutable and shareable across threads.
#[derive(Clone)]
pub struct Hamiltonian {
    grid: GridSpec,
    params: StableParams,
    /// `|k|^α` in FFT index order (row-major in 2D).
    multiplier: Vec<f64>,
    potential: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    cap: Option<f64>,
}

impl std::fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("grid", &self.grid)
            .field("params", &self.params)
            .field("cap", &self.cap)
            .finish()
    }
}

impl Hamiltonian {
    /// Samples `V` on the grid, clipping to `[-cap, cap]`; with `cap = None`
    /// a singular grid value is an error.
    pub fn new(grid: GridSpec, params: StableParams, v: &PotentialSpec, cap: Option<f64>) -> Result<Self> {
        grid.validate(super::grid::DEFAULT_POINT_BUDGET)?;
        if params.dim() != grid.dim || v.dim() != grid.dim {
            return Err(crate::Error::param("grid", "dimension differs from the process or potential"));
        }
        let potential = (0..grid.total_points())
            .map(|i| v.evaluate_capped(&grid.point(i), cap))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self::from_values(grid, params, potential, cap))
    }

    /// Hamiltonian with explicit grid values of the potential.
    pub fn from_values(grid: GridSpec, params: StableParams, potential: Vec<f64>, cap: Option<f64>) -> Self {
        let n = grid.n_points;
        let k0 = grid.base_frequency();
        let freq = |j: usize| -> f64 {
            let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            s * k0
        };
        let a = params.alpha();
        let multiplier = match grid.dim {
            1 => (0..n).map(|j| freq(j).abs().powf(a)).collect(),
            _ => (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    freq(i).hypot(freq(j)).powf(a)
                })
                .collect(),
        };
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            grid,
            params,
            multiplier,
            potential,
            cap,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    pub fn dim(&self) -> usize {
        self.potential.len()
    }

    /// Grid values of the potential.
    pub fn potential_values(&self) -> &[f64] {
        &self.potential
    }

    /// Upper bound for the spectrum: `max |k|^α + max V`.
    pub fn spectral_upper_bound(&self) -> f64 {
        let k = self.multiplier.iter().copied().fold(0.0, f64::max);
        let v = self.potential.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        k + v
    }

    /// Lower bound for the spectrum: `min V`.
    pub fn spectral_lower_bound(&self) -> f64 {
        self.potential.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Diagonal `Σ_k e^{-|k|^α t} / (2L)^d` of the free periodic heat kernel.
    pub fn free_diagonal(&self, t: f64) -> f64 {
        let vol = (2.0 * self.grid.half_width).powi(self.grid.dim as i32);
        self.multiplier.iter().map(|m| (-m * t).exp()).sum::<f64>() / vol
    }

    /// `y = (-Δ)^{α/2} x`.
    pub fn apply_kinetic(&self, x: &[f64], y: &mut [f64]) {
        let n = self.grid.n_points;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let scale = 1.0 / self.grid.total_points() as f64;
        match self.grid.dim {
            1 => {
                self.forward.process(&mut buf);
                for (b, m) in buf.iter_mut().zip(&self.multiplier) {
                    *b *= m * scale;
                }
                self.inverse.process(&mut buf);
            }
            _ => {
                // Rows, transpose, rows again (= columns), multiply, and back.
                self.forward.process(&mut buf);
                let mut t = transpose(&buf, n);
                self.forward.process(&mut t);
                for (idx, b) in t.iter_mut().enumerate() {
                    let (j, i) = (idx / n, idx % n);
                    *b *= self.multiplier[i * n + j] * scale;
                }
                self.inverse.process(&mut t);
                buf = transpose(&t, n);
                self.inverse.process(&mut buf);
            }
        }
        for (o, b) in y.iter_mut().zip(&buf) {
            *o = b.re;
        }
    }

    /// `y = H x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_kinetic(x, y);
        for ((o, v), xi) in y.iter_mut().zip(&self.potential).zip(x) {
            *o += v * xi;
        }
    }

    /// `H` applied to each column of a block, in parallel.
    pub fn apply_block(&self, xs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        xs.par_iter()
            .map(|x| {
                let mut y = vec![0.0; x.len()];
                self.apply(x, &mut y);
                y
            })
            .collect()
    }
}

fn transpose(a: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j];
        }
    }
    out
}
