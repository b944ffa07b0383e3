//! Monte Carlo Feynman-Kac estimators: the semigroup, its kernel through
//! stable bridges, growth of the total mass and exit-time functionals.

mod exit;
mod tail;

pub use exit::{exit_functionals, Ball, ExitEstimate};
pub use tail::{tail_envelope, tail_integral, TailEnvelope};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{Accumulator, Chunking, MCEstimate, Rng};
use crate::potentials::PotentialSpec;
use crate::spectral::DEFAULT_V_CAP;
use crate::stable::sample::unit_variate_into;
use crate::stable::{StableLaw, StableParams};

/// Largest admissible `-∫V ds` along a path.
pub const MASS_LOG_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralRule {
    Left,
    Trapezoid,
}

/// Monte Carlo settings shared by all estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FKConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub chunk_size: usize,
    pub rule: IntegralRule,
    /// Potential values are clipped to `[-v_cap, v_cap]` along paths.
    pub v_cap: f64,
    /// Time horizon for exit sampling when `V` has no positive lower bound on the set.
    pub horizon: f64,
}

impl Default for FKConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            n_paths: 10_000,
            seed: 0,
            chunk_size: 4096,
            rule: IntegralRule::Trapezoid,
            v_cap: DEFAULT_V_CAP,
            horizon: 100.0,
        }
    }
}

impl FKConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        if self.n_paths < 100 {
            return Err(Error::param("n_paths", "need at least 100 paths"));
        }
        if self.chunk_size == 0 {
            return Err(Error::param("chunk_size", "must be positive"));
        }
        if !(self.v_cap > 0.0) {
            return Err(Error::param("v_cap", "must be positive"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::param("horizon", "must be positive"));
        }
        Ok(())
    }

    pub fn chunking(&self) -> Chunking {
        Chunking {
            seed: self.seed,
            chunk_size: self.chunk_size,
        }
    }

    /// Number of equal steps covering `[0, t]` with step at most `dt`.
    pub fn steps(&self, t: f64) -> usize {
        ((t / self.dt).ceil() as usize).max(1)
    }
}

/// Contribution of one step to `∫V ds`.
#[inline]
pub(crate) fn step_integral(rule: IntegralRule, v_start: f64, v_end: f64, dt: f64) -> f64 {
    match rule {
        IntegralRule::Left => v_start * dt,
        IntegralRule::Trapezoid => 0.5 * (v_start + v_end) * dt,
    }
}

pub(crate) fn guard_mass(integral: f64) -> Result<()> {
    if -integral > MASS_LOG_LIMIT {
        return Err(Error::MassBlowup {
            log_weight: -integral,
            limit: MASS_LOG_LIMIT,
        });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param("t", "must be positive"));
    }
    Ok(())
}

fn check_dims(params: &StableParams, v: &PotentialSpec, points: &[&[f64]]) -> Result<()> {
    if v.dim() != params.dim() {
        return Err(Error::param("V", "dimension differs from the process"));
    }
    if points.iter().any(|p| p.len() != params.dim()) {
        return Err(Error::param("x", "dimension differs from the process"));
    }
    Ok(())
}

/// Runs `n_paths` samples chunk by chunk and merges in chunk order.
pub(crate) fn run_chunks<F>(cfg: &FKConfig, sample: F) -> Result<Accumulator>
where
    F: Fn(&mut Rng) -> Result<f64> + Sync + Send,
{
    let parts = cfg.chunking().map(cfg.n_paths, |rng, count, _| -> Result<Accumulator> {
        let mut acc = Accumulator::default();
        for _ in 0..count {
            acc.push(sample(rng)?);
        }
        Ok(acc)
    });
    let mut total = Accumulator::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

/// Free path from `x` over `n` equal steps of length `h`; returns `∫V ds` and
/// the end point.
pub(crate) fn free_path_integral(
    law: &StableLaw,
    v: &PotentialSpec,
    x: &[f64],
    n: usize,
    h: f64,
    cfg: &FKConfig,
    rng: &mut Rng,
) -> Result<(f64, Vec<f64>)> {
    let d = x.len();
    let scale = law.length_scale(h);
    let mut pos = x.to_vec();
    let mut z = vec![0.0; d];
    let mut v_prev = v.evaluate_capped(&pos, Some(cfg.v_cap))?;
    let mut integral = 0.0;
    for _ in 0..n {
        unit_variate_into(law.params(), rng, &mut z);
        for (p, dz) in pos.iter_mut().zip(&z) {
            *p += scale * dz;
        }
        let v_next = v.evaluate_capped(&pos, Some(cfg.v_cap))?;
        integral += step_integral(cfg.rule, v_prev, v_next, h);
        v_prev = v_next;
    }
    guard_mass(integral)?;
    Ok((integral, pos))
}

/// Estimates `E^x[exp(-∫₀ᵗ V(X_s) ds) f(X_t)]`.
pub fn fk_expectation<F>(
    x: &[f64],
    t: f64,
    f: F,
    v: &PotentialSpec,
    params: &StableParams,
    cfg: &FKConfig,
) -> Result<MCEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync + Send,
{
    cfg.validate()?;
    check_time(t)?;
    check_dims(params, v, &[x])?;
    let law = StableLaw::new(*params)?;
    let n = cfg.steps(t);
    let h = t / n as f64;
    let acc = run_chunks(cfg, |rng| {
        let (integral, end) = free_path_integral(&law, v, x, n, h, cfg, rng)?;
        Ok((-integral).exp() * f(&end))
    })?;
    Ok(acc.estimate())
}

/// Estimates the kernel `u(t, x, y)` as the bridge mass `p(t, y - x)` times the
/// bridge average of `exp(-∫₀ᵗ V ds)`.
pub fn fk_kernel_bridge(
    x: &[f64],
    y: &[f64],
    t: f64,
    v: &PotentialSpec,
    params: &StableParams,
    cfg: &FKConfig,
) -> Result<MCEstimate> {
    cfg.validate()?;
    check_time(t)?;
    check_dims(params, v, &[x, y])?;
    let law = StableLaw::new(*params)?;
    let n = cfg.steps(t);
    let h = t / n as f64;
    let interior: Vec<f64> = (1..n).map(|i| i as f64 * h).collect();
    let mass = law.bridge_weight(x, y, 0.0, t)?;
    let acc = run_chunks(cfg, |rng| {
        let path = law.sample_bridge(x, 0.0, y, t, &interior, rng)?;
        let mut integral = 0.0;
        let mut v_prev = v.evaluate_capped(path.position(0), Some(cfg.v_cap))?;
        for i in 1..path.len() {
            let v_next = v.evaluate_capped(path.position(i), Some(cfg.v_cap))?;
            integral += step_integral(cfg.rule, v_prev, v_next, h);
            v_prev = v_next;
        }
        guard_mass(integral)?;
        Ok((-integral).exp())
    })?;
    Ok(acc.estimate().scaled(mass))
}

/// Fitted growth `log sup_x E^x[e_V(t)] ≈ c0 + c1 t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalGrowth {
    pub times: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub c0: f64,
    pub c1: f64,
    pub c1_stderr: f64,
    pub rms_residual: f64,
    /// Set when the log-mass is visibly non-linear in `t`.
    pub non_exponential: bool,
}

/// Residual above which the growth is reported as non-exponential.
pub const GROWTH_RESIDUAL_LIMIT: f64 = 0.1;

/// Fits the exponential growth of the total mass over `t_grid`, taking the
/// supremum over `x_grid`. All points share the configured seed.
pub fn survival_growth(
    v: &PotentialSpec,
    params: &StableParams,
    t_grid: &[f64],
    x_grid: &[Vec<f64>],
    cfg: &FKConfig,
) -> Result<SurvivalGrowth> {
    if t_grid.len() < 2 || x_grid.is_empty() {
        return Err(Error::param("t_grid", "need at least two times and one start point"));
    }
    let mut sup_values = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let mut best = f64::NEG_INFINITY;
        for x in x_grid {
            best = best.max(fk_expectation(x, t, |_| 1.0, v, params, cfg)?.mean);
        }
        if !(best > 0.0) {
            return Err(Error::Fit(format!("total mass vanished at t = {t}")));
        }
        sup_values.push(best);
    }
    let logs: Vec<f64> = sup_values.iter().map(|s| s.ln()).collect();
    let fit = crate::numerics::linear_fit(t_grid, &logs)?;
    Ok(SurvivalGrowth {
        times: t_grid.to_vec(),
        sup_values,
        c0: fit.intercept,
        c1: fit.slope,
        c1_stderr: fit.slope_stderr,
        rms_residual: fit.rms_residual,
        non_exponential: fit.rms_residual > GROWTH_RESIDUAL_LIMIT,
    })
}
