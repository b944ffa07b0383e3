//! Exact variate generation for the rotationally invariant α-stable law with
//! characteristic function `exp(-t|ξ|^α)`.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::params::{check_time, StableParams};
use crate::error::Result;
use crate::mc::Rng;

/// Open-interval uniform on `(0, 1)`.
fn open_unit(rng: &mut Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Symmetric unit-scale variate by the Chambers-Mallows-Stuck transform.
pub fn symmetric_unit(alpha: f64, rng: &mut Rng) -> f64 {
    let v = PI * (open_unit(rng) - 0.5);
    let w: f64 = Exp1.sample(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    let a = (alpha * v).sin() / v.cos().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Positive stable variate with Laplace transform `exp(-λ^a)`, `0 < a < 1`
/// (Kanter's representation).
pub fn positive_unit(a: f64, rng: &mut Rng) -> f64 {
    let u = PI * open_unit(rng);
    let e: f64 = Exp1.sample(rng);
    let left = (a * u).sin() / u.sin().powf(1.0 / a);
    let right = (((1.0 - a) * u).sin() / e).powf((1.0 - a) / a);
    left * right
}

/// One variate of `X_1` written into `out`.
pub fn unit_variate_into(params: &StableParams, rng: &mut Rng, out: &mut [f64]) {
    let alpha = params.alpha();
    if params.dim() == 1 {
        out[0] = symmetric_unit(alpha, rng);
        return;
    }
    // Gaussian at an independent (α/2)-stable time: E exp(iξ·√(2S)G) = exp(-|ξ|^α).
    let s = positive_unit(alpha / 2.0, rng);
    let scale = (2.0 * s).sqrt();
    for o in out.iter_mut() {
        let g: f64 = StandardNormal.sample(rng);
        *o = scale * g;
    }
}

/// Increment `X_t - X_0`.
pub fn sample_increment(params: &StableParams, t: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    check_time(t)?;
    let mut out = vec![0.0; params.dim()];
    unit_variate_into(params, rng, &mut out);
    let s = t.powf(1.0 / params.alpha());
    out.iter_mut().for_each(|v| *v *= s);
    Ok(out)
}

/// One-dimensional increment without allocation; `t` must be positive.
#[inline]
pub fn increment_1d(alpha: f64, t: f64, rng: &mut Rng) -> f64 {
    t.powf(1.0 / alpha) * symmetric_unit(alpha, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::chunk_rng;

    #[test]
    fn rejects_nonpositive_time() {
        let p = StableParams::new(1.0, 1).unwrap();
        let mut rng = chunk_rng(1, 0);
        assert!(sample_increment(&p, 0.0, &mut rng).is_err());
        assert!(sample_increment(&p, -1.0, &mut rng).is_err());
    }

    #[test]
    fn positive_stable_laplace_transform() {
        let mut rng = chunk_rng(3, 0);
        for &a in &[0.35, 0.5, 0.75] {
            let n = 200_000;
            let mean: f64 = (0..n).map(|_| (-positive_unit(a, &mut rng)).exp()).sum::<f64>() / n as f64;
            assert!((mean - (-1f64).exp()).abs() < 0.004, "a={a} mean={mean}");
        }
    }

    #[test]
    fn tiny_time_concentrates_at_origin() {
        let p = StableParams::new(0.8, 2).unwrap();
        let mut rng = chunk_rng(11, 0);
        let n = 10_000;
        let close = (0..n)
            .filter(|_| {
                let x = sample_increment(&p, 1e-12, &mut rng).unwrap();
                super::super::params::norm(&x) < 1e-3
            })
            .count();
        assert!(close as f64 / n as f64 > 0.99);
    }

    #[test]
    fn two_dimensional_law_is_rotation_invariant() {
        let p = StableParams::new(1.3, 2).unwrap();
        let mut rng = chunk_rng(5, 0);
        let n = 200_000;
        let (mut c1, mut c2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_increment(&p, 1.0, &mut rng).unwrap();
            c1 += x[0].cos();
            c2 += ((x[0] + x[1]) / 2f64.sqrt()).cos();
        }
        let want = (-1f64).exp();
        assert!((c1 / n as f64 - want).abs() < 0.006);
        assert!((c2 / n as f64 - want).abs() < 0.006);
    }
}
