//! Closed-form kernels: Lévy density and (compensated) potential kernel.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::params::{check_point, norm, riesz_constant, StableParams};
use crate::error::{Error, Result};

/// Density of the Lévy measure, `𝒜_{d,-α} |x|^{-d-α}`.
pub fn levy_measure_density(params: &StableParams, x: &[f64]) -> Result<f64> {
    check_point(params, x)?;
    let r = norm(x);
    if r == 0.0 {
        return Err(Error::param("x", "the Lévy density has a pole at the origin"));
    }
    Ok(params.levy_constant() * r.powf(-params.tail_exponent()))
}

/// Green kernel of the process (transient case) or its compensated version
/// (recurrent one-dimensional case), as a function of `|x|`.
pub fn potential_kernel_radial(params: &StableParams, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::param("x", "the potential kernel has a pole at the origin"));
    }
    let a = params.alpha();
    let d = params.dim();
    let df = d as f64;
    if a < df {
        Ok(riesz_constant(d, a) * r.powf(a - df))
    } else if d == 1 && a == 1.0 {
        Ok((1.0 / r).ln() / PI)
    } else if d == 1 {
        Ok(r.powf(a - 1.0) / (2.0 * gamma(a) * (PI * a / 2.0).cos()))
    } else {
        Err(Error::Unsupported(format!(
            "no potential kernel for alpha = {a} >= d = {d} with d >= 2"
        )))
    }
}

pub fn potential_kernel(params: &StableParams, x: &[f64]) -> Result<f64> {
    check_point(params, x)?;
    potential_kernel_radial(params, norm(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_kernel_vanishes_at_unit_radius() {
        let p = StableParams::new(1.0, 1).unwrap();
        assert_eq!(potential_kernel(&p, &[1.0]).unwrap(), 0.0);
        assert!(potential_kernel(&p, &[0.0]).is_err());
    }

    #[test]
    fn recurrent_kernel_is_negative() {
        let p = StableParams::new(1.5, 1).unwrap();
        let v = potential_kernel(&p, &[1.0]).unwrap();
        let want = 1.0 / (2.0 * gamma(1.5) * (0.75 * PI).cos());
        assert!((v - want).abs() < 1e-14);
        assert!((v + 0.7979).abs() < 1e-3);
    }

    #[test]
    fn planar_kernel_is_riesz() {
        let p = StableParams::new(1.5, 2).unwrap();
        let v = potential_kernel(&p, &[0.0, 4.0]).unwrap();
        assert!((v - riesz_constant(2, 1.5) * 0.5).abs() < 1e-14);
        let q = StableParams::new(1.999, 3).unwrap();
        assert!(potential_kernel(&q, &[1.0, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn levy_density_homogeneity() {
        let p = StableParams::new(0.7, 2).unwrap();
        let a = levy_measure_density(&p, &[0.3, 0.4]).unwrap();
        let b = levy_measure_density(&p, &[0.6, 0.8]).unwrap();
        assert!((a / b - 2f64.powf(2.7)).abs() < 1e-12);
    }
}
