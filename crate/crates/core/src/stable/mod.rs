//! Rotationally invariant α-stable processes: sampling, transition
//! densities, kernels and bridges.

mod bridge;
pub mod density;
mod kernel;
mod params;
pub mod sample;
mod skeleton;
mod table;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bridge::BRIDGE_MAX_ROUNDS;
pub use kernel::{levy_measure_density, potential_kernel, potential_kernel_radial};
pub use params::{norm, riesz_constant, StableParams};
pub use sample::sample_increment;
pub use skeleton::PathSkeleton;
pub use table::{DensityTable, TableConfig};

use params::{check_point, check_time};

use crate::error::{Error, Result};

/// Transition density and its two-sided envelope at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    /// Fitted constant `C` of the envelope.
    pub constant: f64,
}

/// A stable law bound to its density table. Cheap to clone and share.
#[derive(Debug, Clone)]
pub struct StableLaw {
    params: StableParams,
    table: Arc<DensityTable>,
    inv_alpha: f64,
}

impl StableLaw {
    pub fn new(params: StableParams) -> Result<Self> {
        Self::with_config(params, &TableConfig::default())
    }

    pub fn with_config(params: StableParams, config: &TableConfig) -> Result<Self> {
        let table = DensityTable::shared(&params, config)?;
        Ok(Self {
            params,
            table,
            inv_alpha: 1.0 / params.alpha(),
        })
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn table(&self) -> &DensityTable {
        &self.table
    }

    /// `t^{1/α}`, the natural length scale at time `t`.
    #[inline]
    pub fn length_scale(&self, t: f64) -> f64 {
        t.powf(self.inv_alpha)
    }

    /// `p(t, x)` as a function of `r = |x|`; `t` must be positive.
    #[inline]
    pub fn density_radial(&self, t: f64, r: f64) -> f64 {
        let s = t.powf(-self.inv_alpha);
        s.powi(self.params.dim() as i32) * self.table.eval(r * s)
    }

    /// `p(t, 0)`.
    #[inline]
    pub fn peak_density(&self, t: f64) -> f64 {
        t.powf(-self.inv_alpha).powi(self.params.dim() as i32) * self.table.peak()
    }

    /// Transition density `p(t, x)`.
    pub fn density(&self, t: f64, x: &[f64]) -> Result<f64> {
        check_time(t)?;
        check_point(&self.params, x)?;
        Ok(self.density_radial(t, norm(x)))
    }

    /// `p(t, x)` together with `min(t/|x|^{d+α}, t^{-d/α})` scaled by the
    /// fitted constant.
    pub fn density_bounds(&self, t: f64, x: &[f64]) -> Result<DensityBounds> {
        let value = self.density(t, x)?;
        let r = norm(x);
        let d = self.params.dim() as f64;
        let diag = t.powf(-d * self.inv_alpha);
        let env = if r == 0.0 {
            diag
        } else {
            (t * r.powf(-self.params.tail_exponent())).min(diag)
        };
        let c = self.table.envelope_constant();
        let out = DensityBounds {
            lower: env / c,
            value,
            upper: env * c,
            constant: c,
        };
        if !(out.lower <= value && value <= out.upper) {
            return Err(Error::Invariant(format!(
                "density {value:e} outside envelope [{:e}, {:e}]",
                out.lower, out.upper
            )));
        }
        Ok(out)
    }

    /// Total mass `p(t - s, y - x)` of the unnormalised bridge measure.
    pub fn bridge_weight(&self, x: &[f64], y: &[f64], s: f64, t: f64) -> Result<f64> {
        if !(s < t) {
            return Err(Error::param("s", format!("need s < t, got s = {s}, t = {t}")));
        }
        check_point(&self.params, x)?;
        check_point(&self.params, y)?;
        let r = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        Ok(self.density_radial(t - s, r))
    }

    /// Free path started at `x` at time `times[0]`, observed on `times`.
    pub fn sample_path(&self, x: &[f64], times: &[f64], rng: &mut crate::mc::Rng) -> Result<PathSkeleton> {
        check_point(&self.params, x)?;
        let d = self.params.dim();
        let mut pos = Vec::with_capacity(times.len() * d);
        if times.is_empty() {
            return PathSkeleton::new(Vec::new(), pos, d);
        }
        pos.extend_from_slice(x);
        let mut buf = vec![0.0; d];
        for i in 1..times.len() {
            let dt = times[i] - times[i - 1];
            if !(dt > 0.0) {
                return Err(Error::param("times", "must be strictly increasing"));
            }
            sample::unit_variate_into(&self.params, rng, &mut buf);
            let sc = self.length_scale(dt);
            for k in 0..d {
                let prev = pos[(i - 1) * d + k];
                pos.push(prev + sc * buf[k]);
            }
        }
        PathSkeleton::new(times.to_vec(), pos, d)
    }
}

/// `p(t, x)` using the shared default table.
pub fn transition_density(params: &StableParams, t: f64, x: &[f64]) -> Result<f64> {
    StableLaw::new(*params)?.density(t, x)
}

/// Envelope check with the shared default table.
pub fn density_bounds_check(params: &StableParams, t: f64, x: &[f64]) -> Result<DensityBounds> {
    StableLaw::new(*params)?.density_bounds(t, x)
}

/// Bridge mass with the shared default table.
pub fn bridge_weight(params: &StableParams, x: &[f64], y: &[f64], s: f64, t: f64) -> Result<f64> {
    StableLaw::new(*params)?.bridge_weight(x, y, s, t)
}

/// Bridge skeleton with the shared default table.
pub fn sample_bridge_skeleton(
    params: &StableParams,
    x: &[f64],
    s: f64,
    y: &[f64],
    t: f64,
    times: &[f64],
    rng: &mut crate::mc::Rng,
) -> Result<PathSkeleton> {
    StableLaw::new(*params)?.sample_bridge(x, s, y, t, times, rng)
}
