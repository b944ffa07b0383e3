use super::PotentialSpec;
use crate::error::{Error, Result};

/// `n` points of the closed ball `B(x, radius)` spread along the first axis
/// through `x` (for radial potentials this line contains both extremes) and,
/// in `d >= 2`, along the second axis as well.
pub fn ball_samples(x: &[f64], radius: f64, n: usize) -> Vec<Vec<f64>> {
    let n = n.max(2);
    let mut out = Vec::with_capacity(2 * n);
    for axis in 0..x.len().min(2) {
        for i in 0..n {
            let s = -radius + 2.0 * radius * i as f64 / (n - 1) as f64;
            let mut p = x.to_vec();
            p[axis] += s;
            out.push(p);
        }
    }
    out
}

/// `sup_{|x| >= R} sup_{z, y ∈ B(x, 1)} V(z) / V(y)` over a sampled region.
///
/// Centres run over a logarithmic grid of radii in `[R, 1000 R]` in both
/// directions of the first axis; each unit ball is sampled at 17 points per
/// axis. Fails with a witness if `V < 1` somewhere in a sampled ball.
pub fn comparability_constant(v: &PotentialSpec, region_radius: f64) -> Result<f64> {
    if !(region_radius > 0.0) {
        return Err(Error::param("region_radius", "must be positive"));
    }
    let d = v.dim();
    let n_centres = 200;
    let (lo, hi) = (region_radius.ln(), (1000.0 * region_radius).ln());
    let mut m: f64 = 1.0;
    for i in 0..n_centres {
        let r = (lo + (hi - lo) * i as f64 / (n_centres - 1) as f64).exp();
        for sign in [1.0, -1.0] {
            let mut x = vec![0.0; d];
            x[0] = sign * r;
            let vals: Vec<f64> = ball_samples(&x, 1.0, 17).iter().map(|p| v.evaluate(p)).collect();
            let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(min >= 1.0) {
                return Err(Error::Precondition(format!(
                    "V = {min} < 1 in the unit ball around x = {x:?}"
                )));
            }
            m = m.max(max / min);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::super::{catalog, PotentialKind};
    use super::*;
    use crate::stable::StableParams;

    #[test]
    fn examples() {
        let params = StableParams::new(1.0, 1).unwrap();
        let v = catalog(PotentialKind::Power { delta: 2.0 }, &params).unwrap();
        assert!((comparability_constant(&v, 2.0).unwrap() - 9.0).abs() < 1e-12);
        let c = catalog(PotentialKind::Constant { c: 3.0 }, &params).unwrap();
        assert_eq!(comparability_constant(&c, 5.0).unwrap(), 1.0);
        let e = catalog(PotentialKind::Exponential { beta: 0.7 }, &params).unwrap();
        for r in [1.0, 10.0] {
            let m = comparability_constant(&e, r).unwrap();
            assert!((m / (1.4f64).exp() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn precondition_witness() {
        let params = StableParams::new(1.0, 1).unwrap();
        let v = catalog(PotentialKind::Power { delta: 2.0 }, &params).unwrap();
        assert!(matches!(comparability_constant(&v, 1.0), Err(Error::Precondition(_))));
    }
}
