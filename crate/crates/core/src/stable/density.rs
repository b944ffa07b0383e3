//! Direct evaluation of the unit-time density `p(1, r)` and its radial
//! derivative by inverse Fourier transform.
//!
//! `d = 1` and `d = 3` use the one-sided transform `∫ ρ^k e^{-ρ^α} e^{irρ} dρ`
//! along a ray rotated into the upper half plane, where the integrand decays
//! exponentially and no longer oscillates badly. `d = 2` integrates the
//! Hankel transform against `J0`/`J1` on half-period panels.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use super::params::{riesz_constant, StableParams};
use crate::error::{Error, Result};
use crate::numerics::GaussLegendre;

/// Density value with its radial derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValue {
    pub p: f64,
    pub dp: f64,
}

/// Largest scaled radius at which direct quadrature is trusted.
pub fn quadrature_limit(d: usize) -> f64 {
    match d {
        2 => 1e3,
        _ => 1e4,
    }
}

/// `p(1, 0)`.
pub fn density_at_origin(params: &StableParams) -> f64 {
    let d = params.dim() as f64;
    let a = params.alpha();
    (2.0 * PI).powf(-d) * sphere_area(params.dim()) * gamma(d / a) / a
}

/// Coefficient `c` of `p(1, r) = p(1, 0) - c r² + O(r⁴)`.
pub fn origin_curvature(params: &StableParams) -> f64 {
    let d = params.dim() as f64;
    let a = params.alpha();
    (2.0 * PI).powf(-d) * sphere_area(params.dim()) * gamma((d + 2.0) / a) / a / (2.0 * d)
}

/// Surface area of the unit sphere in `ℝ^d`.
pub fn sphere_area(d: usize) -> f64 {
    let df = d as f64;
    2.0 * PI.powf(df / 2.0) / gamma(df / 2.0)
}

/// Coefficients `c_k` of the large-radius expansion `p(1, r) ~ Σ c_k r^{-αk-d}`.
///
/// Convergent for `α < 1`, asymptotic otherwise; terms are kept while they
/// decrease at `r = r_ref`.
pub fn tail_coefficients(params: &StableParams, r_ref: f64) -> Vec<f64> {
    let a = params.alpha();
    let d = params.dim() as f64;
    let mut out = Vec::new();
    let mut last = f64::INFINITY;
    for k in 1..=60 {
        let kf = k as f64;
        let s = (PI * a * kf / 2.0).sin();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let log_mag = a * kf * 2f64.ln() + ln_gamma((a * kf + d) / 2.0) + ln_gamma(a * kf / 2.0 + 1.0)
            - ln_gamma(kf + 1.0)
            - (d / 2.0 + 1.0) * PI.ln();
        let c = sign * s * log_mag.exp();
        let size = (log_mag - a * kf * r_ref.ln()).exp();
        if k > 1 && size > last {
            break;
        }
        if s.abs() > 1e-12 {
            last = size;
        }
        out.push(c);
        if k > 1 && size < 1e-18 * out[0].abs() {
            break;
        }
    }
    // First coefficient is the Lévy constant; recompute it exactly.
    out[0] = riesz_constant(params.dim(), -a);
    out
}

/// Evaluates the tail expansion and its derivative.
pub fn tail_value(params: &StableParams, coeffs: &[f64], r: f64) -> RadialValue {
    let a = params.alpha();
    let d = params.dim() as f64;
    let (mut p, mut dp) = (0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate() {
        let e = a * (k + 1) as f64 + d;
        let term = c * r.powf(-e);
        p += term;
        dp -= e * term / r;
    }
    RadialValue { p, dp }
}

/// `p(1, r)` and `∂_r p(1, r)` by quadrature.
pub fn radial_by_quadrature(params: &StableParams, r: f64) -> Result<RadialValue> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::param("r", format!("radius must be finite and nonnegative, got {r}")));
    }
    let limit = quadrature_limit(params.dim());
    if r > limit {
        return Err(Error::DensityRange { radius: r, limit });
    }
    if r == 0.0 {
        return Ok(RadialValue {
            p: density_at_origin(params),
            dp: 0.0,
        });
    }
    let a = params.alpha();
    let v = match params.dim() {
        1 => {
            let f = rotated_transform(a, r, 2);
            RadialValue {
                p: f[0].re / PI,
                dp: -f[1].im / PI,
            }
        }
        3 => {
            let f = rotated_transform(a, r, 3);
            let s1 = f[1].im;
            let c2 = f[2].re;
            RadialValue {
                p: s1 / (2.0 * PI * PI * r),
                dp: (r * c2 - s1) / (2.0 * PI * PI * r * r),
            }
        }
        2 => hankel_2d(a, r),
        d => {
            return Err(Error::Unsupported(format!(
                "density quadrature is implemented for d <= 3, got d = {d}"
            )))
        }
    };
    if !(v.p.is_finite() && v.dp.is_finite()) || v.p <= 0.0 {
        return Err(Error::Quadrature(format!(
            "density quadrature lost accuracy at r = {r} (value {})",
            v.p
        )));
    }
    Ok(v)
}

/// Half the largest admissible rotation angle.
fn rotation_angle(alpha: f64) -> f64 {
    0.5 * (PI / 2.0).min(PI / (2.0 * alpha))
}

/// `F_k(r) = ∫_0^∞ ρ^k e^{-ρ^α} e^{irρ} dρ` for `k = 0..n_moments`.
fn rotated_transform(alpha: f64, r: f64, n_moments: usize) -> Vec<Complex64> {
    let theta = rotation_angle(alpha);
    let (ca, sa) = ((alpha * theta).cos(), (alpha * theta).sin());
    let (ct, st) = (theta.cos(), theta.sin());
    let kmax = (n_moments - 1) as f64;
    let log_mag = |s: f64| kmax * s.max(1e-300).ln() - ca * s.powf(alpha) - r * st * s;
    let decreasing = |s: f64| kmax / s <= alpha * ca * s.powf(alpha - 1.0) + r * st;

    let mut s_end = 1.0;
    while !(log_mag(s_end) < -48.0 && decreasing(s_end)) {
        s_end *= 1.5;
    }
    let s_lo = 1e-18 * s_end.min(1.0);

    let gl = GaussLegendre::cached(16);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_moments];
    let mut a = s_lo;
    while a < s_end {
        let b = (2.0 * a).min(s_end);
        let da = b.powf(alpha) - a.powf(alpha);
        let phase = da * sa + r * (b - a) * ct;
        let decay = da * ca + r * (b - a) * st;
        let n_sub = ((phase / 2.5).max(decay / 5.0).ceil() as usize).max(1);
        let w = (b - a) / n_sub as f64;
        for j in 0..n_sub {
            let (lo, hi) = (a + j as f64 * w, a + (j + 1) as f64 * w);
            for (s, wt) in gl.mapped(lo, hi) {
                let sa_pow = s.powf(alpha);
                let exponent = Complex64::new(-sa_pow * ca - r * s * st, -sa_pow * sa + r * s * ct);
                let mut term = exponent.exp() * wt;
                for m in acc.iter_mut() {
                    *m += term;
                    term *= s;
                }
            }
        }
        a = b;
    }
    // Undo the rotation: ρ = s e^{iθ}, dρ = e^{iθ} ds, ρ^k = s^k e^{ikθ}.
    acc.iter()
        .enumerate()
        .map(|(k, v)| v * Complex64::from_polar(1.0, (k + 1) as f64 * theta))
        .collect()
}

fn hankel_2d(alpha: f64, r: f64) -> RadialValue {
    let log_mag = |s: f64| 2.0 * s.ln() - s.powf(alpha);
    let mut s_end = 1.0;
    while !(log_mag(s_end) < -48.0 && 2.0 / s_end <= alpha * s_end.powf(alpha - 1.0)) {
        s_end *= 1.5;
    }
    let gl = GaussLegendre::cached(16);
    let half_period = PI / r;
    let (mut p, mut dp) = (0.0, 0.0);
    let mut a = 1e-9f64.min(half_period * 1e-9);
    while a < s_end {
        let mut b = (2.0 * a).min(a + half_period).min(s_end);
        // Keep e^{-ρ^α} from dropping by more than e^{-4} across a panel.
        let cap = (a.powf(alpha) + 4.0).powf(1.0 / alpha);
        b = b.min(cap.max(a * 1.01));
        for (s, w) in gl.mapped(a, b) {
            let e = (-s.powf(alpha)).exp() * w;
            let z = r * s;
            p += s * libm::j0(z) * e;
            dp -= s * s * libm::j1(z) * e;
        }
        a = b;
    }
    RadialValue {
        p: p / (2.0 * PI),
        dp: dp / (2.0 * PI),
    }
}
