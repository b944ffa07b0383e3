//! Exact sequential sampling of stable bridges on a time grid.

use rand::Rng as _;

use super::params::{check_point, norm};
use super::sample::unit_variate_into;
use super::{PathSkeleton, StableLaw};
use crate::error::{Error, Result};
use crate::mc::Rng;

/// Rejection rounds allowed per grid point before the fallback sampler.
pub const BRIDGE_MAX_ROUNDS: u64 = 1_000_000;

impl StableLaw {
    /// Path pinned at `x` at time `s` and at `y` at time `t`, sampled at the
    /// interior grid `times` from the exact finite-dimensional bridge law.
    pub fn sample_bridge(
        &self,
        x: &[f64],
        s: f64,
        y: &[f64],
        t: f64,
        times: &[f64],
        rng: &mut Rng,
    ) -> Result<PathSkeleton> {
        self.sample_bridge_capped(x, s, y, t, times, rng, BRIDGE_MAX_ROUNDS)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn sample_bridge_capped(
        &self,
        x: &[f64],
        s: f64,
        y: &[f64],
        t: f64,
        times: &[f64],
        rng: &mut Rng,
        max_rounds: u64,
    ) -> Result<PathSkeleton> {
        check_point(&self.params, x)?;
        check_point(&self.params, y)?;
        if !(s < t) {
            return Err(Error::param("s", format!("need s < t, got s = {s}, t = {t}")));
        }
        if let Some(&first) = times.first() {
            if !(s < first && *times.last().unwrap() < t) {
                return Err(Error::param("times", "interior grid must lie strictly inside (s, t)"));
            }
        }
        let d = self.params.dim();
        let mut all_times = Vec::with_capacity(times.len() + 2);
        all_times.push(s);
        all_times.extend_from_slice(times);
        all_times.push(t);
        let mut pos = Vec::with_capacity(all_times.len() * d);
        pos.extend_from_slice(x);
        let mut z = vec![0.0; d];
        for (i, &ti) in times.iter().enumerate() {
            let prev_t = all_times[i];
            let prev = pos[i * d..(i + 1) * d].to_vec();
            self.bridge_step(&prev, ti - prev_t, y, t - ti, rng, max_rounds, &mut z)
                .map_err(|e| match e {
                    Error::SamplerFailure { detail, .. } => Error::SamplerFailure { step: i + 1, detail },
                    other => other,
                })?;
            pos.extend_from_slice(&z);
        }
        pos.extend_from_slice(y);
        PathSkeleton::new(all_times, pos, d)
    }

    /// Draws `z` with density proportional to `p(dt, z - prev) p(rest, y - z)`.
    #[allow(clippy::too_many_arguments)]
    fn bridge_step(
        &self,
        prev: &[f64],
        dt: f64,
        y: &[f64],
        rest: f64,
        rng: &mut Rng,
        max_rounds: u64,
        z: &mut [f64],
    ) -> Result<()> {
        if !(dt > 0.0 && rest > 0.0) {
            return Err(Error::param("times", "must be strictly increasing"));
        }
        let d = self.params.dim();
        let p0 = self.table.peak();
        // Propose from the shorter-lived factor, accept by the longer one;
        // the acceptance ratio is then bounded by p(long, ·)/p(long, 0).
        let (center, other, short, long) = if rest >= dt {
            (prev, y, dt, rest)
        } else {
            (y, prev, rest, dt)
        };
        let sc_short = self.length_scale(short);
        let inv_long = 1.0 / self.length_scale(long);
        for _ in 0..max_rounds {
            unit_variate_into(&self.params, rng, z);
            for k in 0..d {
                z[k] = center[k] + sc_short * z[k];
            }
            let r = (0..d).map(|k| (z[k] - other[k]).powi(2)).sum::<f64>().sqrt();
            let accept = self.table.eval(r * inv_long) / p0;
            if rng.random::<f64>() < accept {
                return Ok(());
            }
        }
        if d == 1 {
            z[0] = self.bridge_step_by_grid(prev[0], dt, y[0], rest, rng)?;
            return Ok(());
        }
        let gap = norm(&prev.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>());
        Err(Error::SamplerFailure {
            step: 0,
            detail: format!(
                "{max_rounds} rejection rounds exhausted (dt = {dt:e}, remaining = {rest:e}, distance to endpoint = {gap:e}, expected acceptance = {:e})",
                self.density_radial(dt + rest, gap) / self.peak_density(long)
            ),
        })
    }

    /// Inverse-CDF draw from the one-dimensional step density tabulated on a
    /// grid refined around both factors' centres.
    fn bridge_step_by_grid(&self, a: f64, dt: f64, y: f64, rest: f64, rng: &mut Rng) -> Result<f64> {
        let mut nodes = Vec::with_capacity(6000);
        for (c, sc) in [(a, self.length_scale(dt)), (y, self.length_scale(rest))] {
            let u_max = 1e6f64.asinh();
            let n = 2900;
            for j in 0..=n {
                let u = -u_max + 2.0 * u_max * j as f64 / n as f64;
                nodes.push(c + sc * u.sinh());
            }
        }
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let f: Vec<f64> = nodes
            .iter()
            .map(|&z| self.density_radial(dt, (z - a).abs()) * self.density_radial(rest, (y - z).abs()))
            .collect();
        let mut cdf = vec![0.0; nodes.len()];
        for i in 1..nodes.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (f[i] + f[i - 1]) * (nodes[i] - nodes[i - 1]);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::SamplerFailure {
                step: 0,
                detail: format!("grid fallback found no mass (total = {total:e})"),
            });
        }
        let target = rng.random::<f64>() * total;
        let i = cdf.partition_point(|&c| c < target).clamp(1, nodes.len() - 1);
        let span = cdf[i] - cdf[i - 1];
        let frac = if span > 0.0 { (target - cdf[i - 1]) / span } else { 0.5 };
        Ok(nodes[i - 1] + frac * (nodes[i] - nodes[i - 1]))
    }
}

#[cfg(test)]
mod tests {
    use super::super::StableParams;
    use super::*;
    use crate::mc::chunk_rng;

    fn law(alpha: f64) -> StableLaw {
        StableLaw::new(StableParams::new(alpha, 1).unwrap()).unwrap()
    }

    #[test]
    fn empty_grid_gives_endpoints() {
        let l = law(1.0);
        let mut rng = chunk_rng(0, 0);
        let p = l.sample_bridge(&[0.5], 0.0, &[2.0], 1.0, &[], &mut rng).unwrap();
        assert_eq!(p.times(), &[0.0, 1.0]);
        assert_eq!(p.flat_positions(), &[0.5, 2.0]);
    }

    #[test]
    fn endpoints_pinned_exactly() {
        let l = law(1.5);
        let mut rng = chunk_rng(1, 0);
        let times: Vec<f64> = (1..10).map(|i| i as f64 * 0.1).collect();
        let p = l.sample_bridge(&[-1.25], 0.0, &[3.5], 1.0, &times, &mut rng).unwrap();
        assert_eq!(p.position(0), &[-1.25]);
        assert_eq!(p.position(10), &[3.5]);
        assert!(l.sample_bridge(&[0.0], 0.0, &[0.0], 1.0, &[1.0], &mut rng).is_err());
    }

    #[test]
    fn grid_fallback_matches_midpoint_law() {
        // With a zero rejection budget every step goes through the grid sampler.
        let l = law(1.0);
        let mut rng = chunk_rng(2, 0);
        let n = 20_000;
        let inside = (0..n)
            .filter(|_| {
                let p = l.sample_bridge_capped(&[0.0], 0.0, &[0.0], 2.0, &[1.0], &mut rng, 0).unwrap();
                p.position(1)[0].abs() < 1.0
            })
            .count() as f64
            / n as f64;
        // Midpoint density p(1,z)²/p(2,0) = 2/(π(1+z²)²).
        let want = (2.0 / std::f64::consts::PI) * (0.5 + std::f64::consts::PI / 4.0);
        let se = (want * (1.0 - want) / n as f64).sqrt();
        assert!((inside - want).abs() < 4.0 * se, "{inside} vs {want}");
    }
}
