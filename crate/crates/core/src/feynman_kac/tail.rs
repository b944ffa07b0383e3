//! Far-field integral `∫_{|y-x| > |x|/4} (1+|y|)^{-γ} |x-y|^{-d-α} dy` and its
//! power-law envelope.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{linear_fit, Quadrature};
use crate::stable::StableParams;

/// Quadrature value of the far-field integral in `d = 1`.
pub fn tail_integral(gamma: f64, x: f64, params: &StableParams) -> Result<f64> {
    if params.dim() != 1 {
        return Err(Error::Unsupported("tail integral is implemented for d = 1".into()));
    }
    let r = x.abs();
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::param("x", "need |x| >= 1"));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) || gamma == 1.0 {
        return Err(Error::param("gamma", "need gamma >= 0 and gamma != d"));
    }
    let a = params.alpha();
    let rho = r / 4.0;
    let q = Quadrature::with_tol(0.0, 1e-10);
    // y = x + s on one side, y = x - s on the other; s runs over [ρ, ∞).
    let side = |sign: f64| -> Result<f64> {
        let f = |s: f64| (1.0 + (x + sign * s).abs()).powf(-gamma) * s.powf(-1.0 - a);
        // The weight has a kink where y crosses the origin, at s = |x| on the inner side.
        let inner = if x * sign < 0.0 { r } else { 2.0 * r };
        let near = q.integrate(f, rho, inner)?.value;
        let far = q.integrate_to_infinity(f, inner)?.value;
        Ok(near + far)
    };
    Ok(side(1.0)? + side(-1.0)?)
}

/// Envelope `C |x|^{-γ'}` with `γ' = min(γ + α, d + α)` over `radii`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEnvelope {
    pub exponent: f64,
    /// Smallest constant with `integral <= C |x|^{-exponent}` on all radii.
    pub constant: f64,
    /// Fitted log-log slope of the integral.
    pub fitted_slope: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

pub fn tail_envelope(gamma: f64, radii: &[f64], params: &StableParams) -> Result<TailEnvelope> {
    if radii.len() < 2 {
        return Err(Error::param("radii", "need at least two radii"));
    }
    let d = params.dim() as f64;
    let a = params.alpha();
    let exponent = (gamma + a).min(d + a);
    let values = radii
        .iter()
        .map(|&r| tail_integral(gamma, r, params))
        .collect::<Result<Vec<f64>>>()?;
    let constant = radii
        .iter()
        .zip(&values)
        .map(|(r, v)| v * r.powf(exponent))
        .fold(0.0, f64::max);
    let lx: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fitted_slope = linear_fit(&lx, &ly)?.slope;
    Ok(TailEnvelope {
        exponent,
        constant,
        fitted_slope,
        radii: radii.to_vec(),
        values,
    })
}
