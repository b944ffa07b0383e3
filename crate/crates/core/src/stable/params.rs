use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Stability index and dimension of a rotationally invariant α-stable process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct StableParams {
    alpha: f64,
    d: usize,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    alpha: f64,
    d: usize,
}

impl TryFrom<RawParams> for StableParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        StableParams::new(r.alpha, r.d)
    }
}

impl From<StableParams> for RawParams {
    fn from(p: StableParams) -> Self {
        RawParams {
            alpha: p.alpha,
            d: p.d,
        }
    }
}

impl StableParams {
    pub fn new(alpha: f64, d: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::param("alpha", format!("{alpha} is not in (0, 2)")));
        }
        if d == 0 {
            return Err(Error::param("d", "dimension must be at least 1"));
        }
        Ok(Self { alpha, d })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `d + α`, the exponent of the Lévy density and of the heavy tails.
    pub fn tail_exponent(&self) -> f64 {
        self.d as f64 + self.alpha
    }

    /// `𝒜_{d,-α}`, the Lévy measure constant.
    pub fn levy_constant(&self) -> f64 {
        riesz_constant(self.d, -self.alpha)
    }
}

/// `𝒜_{d,γ} = 2^{-γ} π^{-d/2} Γ((d-γ)/2) / |Γ(γ/2)|`.
pub fn riesz_constant(d: usize, gamma_exp: f64) -> f64 {
    let df = d as f64;
    2f64.powf(-gamma_exp) * std::f64::consts::PI.powf(-df / 2.0) * gamma((df - gamma_exp) / 2.0)
        / gamma(gamma_exp / 2.0).abs()
}

/// Euclidean norm of a point.
pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::param("t", format!("time must be positive and finite, got {t}")));
    }
    Ok(())
}

pub(crate) fn check_point(params: &StableParams, x: &[f64]) -> Result<()> {
    if x.len() != params.dim() {
        return Err(Error::param(
            "x",
            format!("point has dimension {} but d = {}", x.len(), params.dim()),
        ));
    }
    Ok(())
}
