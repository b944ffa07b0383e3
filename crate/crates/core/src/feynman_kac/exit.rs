//! First exit from a ball on a refined skeleton: `E^x[e_V(τ_D)]` and
//! `E^x[∫₀^{τ_D} e_V(s) ds]`.

use serde::{Deserialize, Serialize};

use super::{guard_mass, step_integral, FKConfig, IntegralRule};
use crate::error::{Error, Result};
use crate::mc::{Accumulator, MCEstimate};
use crate::potentials::{ball_samples, PotentialSpec};
use crate::stable::sample::unit_variate_into;
use crate::stable::{StableLaw, StableParams};

/// Censored weight above which exit estimates are refused.
pub const CENSORED_LIMIT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("ball", "need a finite center and positive radius"));
        }
        Ok(Self { center, radius })
    }

    /// Distance from `x` to the complement; negative outside.
    pub fn depth(&self, x: &[f64]) -> f64 {
        let r = x
            .iter()
            .zip(&self.center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        self.radius - r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitEstimate {
    /// `E^x[e_V(τ_D)]`.
    pub u: MCEstimate,
    /// `E^x[∫₀^{τ_D} e_V(s) ds]`.
    pub v: MCEstimate,
    pub exit_time: MCEstimate,
    /// `P^x(τ_D > 1)`.
    pub survival_past_one: MCEstimate,
    /// Share of the final weight carried by paths still inside at the horizon.
    pub censored_fraction: f64,
    pub horizon: f64,
}

struct PathOutcome {
    weight: f64,
    occupation: f64,
    tau: f64,
    censored: bool,
}

/// Lower bound of `V` over a sample of the ball.
fn lower_bound_on(v: &PotentialSpec, ball: &Ball, cap: f64) -> Result<f64> {
    let mut m = f64::INFINITY;
    for p in ball_samples(&ball.center, ball.radius, 65) {
        m = m.min(v.evaluate_capped(&p, Some(cap))?);
    }
    Ok(m)
}

/// Exit functionals of the ball `ball` started at `x`. The step is halved
/// within `5 dt^{1/α}` of the boundary; paths alive at the horizon are censored.
pub fn exit_functionals(
    ball: &Ball,
    v: &PotentialSpec,
    x: &[f64],
    params: &StableParams,
    cfg: &FKConfig,
) -> Result<ExitEstimate> {
    cfg.validate()?;
    if x.len() != params.dim() || ball.center.len() != params.dim() || v.dim() != params.dim() {
        return Err(Error::param("x", "dimension differs from the process"));
    }
    if ball.depth(x) <= 0.0 {
        return Err(Error::Precondition("start point must lie inside the ball".into()));
    }
    let zeta = lower_bound_on(v, ball, cfg.v_cap)?;
    let horizon = if zeta > 0.0 { 50.0 / zeta } else { cfg.horizon };
    let law = StableLaw::new(*params)?;
    let dt = cfg.dt;
    let near = 5.0 * dt.powf(1.0 / params.alpha());
    let coarse = law.length_scale(dt);
    let fine = law.length_scale(dt / 2.0);
    let d = params.dim();

    let run = |rng: &mut crate::mc::Rng| -> Result<PathOutcome> {
        let mut pos = x.to_vec();
        let mut z = vec![0.0; d];
        let mut s = 0.0;
        let mut integral: f64 = 0.0;
        let mut occupation = 0.0;
        let mut v_prev = v.evaluate_capped(&pos, Some(cfg.v_cap))?;
        loop {
            let (h, scale) = if ball.depth(&pos) < near { (dt / 2.0, fine) } else { (dt, coarse) };
            unit_variate_into(params, rng, &mut z);
            for (p, dz) in pos.iter_mut().zip(&z) {
                *p += scale * dz;
            }
            let v_next = v.evaluate_capped(&pos, Some(cfg.v_cap))?;
            let w_prev = (-integral).exp();
            integral += step_integral(cfg.rule, v_prev, v_next, h);
            guard_mass(integral)?;
            let w_next = (-integral).exp();
            occupation += match cfg.rule {
                IntegralRule::Left => w_prev * h,
                IntegralRule::Trapezoid => 0.5 * (w_prev + w_next) * h,
            };
            s += h;
            v_prev = v_next;
            if ball.depth(&pos) <= 0.0 {
                return Ok(PathOutcome {
                    weight: w_next,
                    occupation,
                    tau: s,
                    censored: false,
                });
            }
            if s >= horizon {
                return Ok(PathOutcome {
                    weight: w_next,
                    occupation,
                    tau: s,
                    censored: true,
                });
            }
        }
    };

    struct Parts {
        u: Accumulator,
        v: Accumulator,
        tau: Accumulator,
        past_one: Accumulator,
        censored_weight: f64,
        total_weight: f64,
    }
    let parts = cfg.chunking().map(cfg.n_paths, |rng, count, _| -> Result<Parts> {
        let mut p = Parts {
            u: Accumulator::default(),
            v: Accumulator::default(),
            tau: Accumulator::default(),
            past_one: Accumulator::default(),
            censored_weight: 0.0,
            total_weight: 0.0,
        };
        for _ in 0..count {
            let o = run(rng)?;
            p.total_weight += o.weight;
            if o.censored {
                p.censored_weight += o.weight;
                p.u.push(0.0);
            } else {
                p.u.push(o.weight);
            }
            p.v.push(o.occupation);
            p.tau.push(o.tau);
            p.past_one.push(if o.tau > 1.0 { 1.0 } else { 0.0 });
        }
        Ok(p)
    });
    let (mut u, mut vv, mut tau, mut past_one) = Default::default();
    let (mut censored, mut total) = (0.0, 0.0);
    for p in parts {
        let p = p?;
        Accumulator::merge(&mut u, &p.u);
        Accumulator::merge(&mut vv, &p.v);
        Accumulator::merge(&mut tau, &p.tau);
        Accumulator::merge(&mut past_one, &p.past_one);
        censored += p.censored_weight;
        total += p.total_weight;
    }
    let censored_fraction = if total > 0.0 { censored / total } else { 0.0 };
    if censored_fraction > CENSORED_LIMIT {
        return Err(Error::Censored {
            fraction: censored_fraction,
            limit: CENSORED_LIMIT,
        });
    }
    let est = |a: Accumulator| a.estimate();
    Ok(ExitEstimate {
        u: est(u),
        v: est(vv),
        exit_time: est(tau),
        survival_past_one: est(past_one),
        censored_fraction,
        horizon,
    })
}
