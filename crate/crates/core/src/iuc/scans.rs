//! Numerical IUC diagnostics on a spectral model and by Monte Carlo.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feynman_kac::{free_path_integral, FKConfig};
use crate::mc::{Accumulator, MCEstimate};
use crate::numerics::linear_fit;
use crate::potentials::PotentialSpec;
use crate::spectral::SpectralModel;
use crate::stable::{StableLaw, StableParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    /// `sup_x T_t 1(x) (1 + |x|)^{d+α}` over the scanned points.
    pub sup: f64,
    pub argmax: f64,
    /// Relative change of the supremum when only half of the modes are used.
    pub mode_sensitivity: f64,
    /// Set when the mode truncation visibly moves the supremum.
    pub truncation_dominated: bool,
}

fn mass_profile(model: &SpectralModel, t: f64, m: usize) -> Vec<f64> {
    let h = model.grid().cell_volume();
    let n = model.grid().total_points();
    let mut out = vec![0.0; n];
    for k in 0..m {
        let phi = model.eigenvector(k);
        let overlap: f64 = phi.iter().sum::<f64>() * h;
        let w = (-model.eigenvalues()[k] * t).exp() * overlap;
        for (o, p) in out.iter_mut().zip(phi) {
            *o += w * p;
        }
    }
    out
}

/// `T_t 1` from the retained modes, weighted by `(1 + |x|)^{d+α}`, maximised
/// over `points` (grid indices; all points when empty).
pub fn tail_bound_scan(model: &SpectralModel, t: f64, points: &[usize]) -> Result<TailBound> {
    if t < model.t_min() {
        return Err(Error::Precondition(format!("t = {t} is below the resolved time {:.4}", model.t_min())));
    }
    let m = model.n_modes();
    let all: Vec<usize>;
    let points = if points.is_empty() {
        all = (0..model.grid().total_points()).collect();
        &all[..]
    } else {
        points
    };
    let expo = model.grid().dim as f64 + model.params().alpha();
    let sup_of = |profile: &[f64]| {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &i in points {
            let r = model.grid().radius(i);
            let w = profile[i] * (1.0 + r).powf(expo);
            if w > best.0 {
                best = (w, r);
            }
        }
        best
    };
    let (sup, argmax) = sup_of(&mass_profile(model, t, m));
    let (half, _) = sup_of(&mass_profile(model, t, (m / 2).max(1)));
    let mode_sensitivity = ((sup - half) / sup).abs();
    Ok(TailBound {
        sup,
        argmax,
        mode_sensitivity,
        truncation_dominated: mode_sensitivity > 1e-3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformConvergence {
    pub times: Vec<f64>,
    /// `s(t) = max |ũ(t, x, y) - 1|` over resolved points.
    pub sup_deviation: Vec<f64>,
    pub rate: f64,
    pub rate_stderr: f64,
    /// `Σ φ₀² h^d` over resolved points.
    pub resolved_mass: f64,
    /// Set when the resolved region carries less than half of the mass.
    pub small_region: bool,
}

/// Sup-deviation of the intrinsic kernel from 1 and its exponential rate.
pub fn uniform_convergence_scan(model: &SpectralModel, times: &[f64]) -> Result<UniformConvergence> {
    if times.len() < 2 {
        return Err(Error::param("t_grid", "need at least two times"));
    }
    if let Some(&t) = times.iter().find(|&&t| t < model.t_min()) {
        return Err(Error::Precondition(format!("t = {t} is below the resolved time {:.4}", model.t_min())));
    }
    let phi0 = model.ground_state();
    let h = model.grid().cell_volume();
    let resolved = model.resolved_indices();
    let resolved_mass: f64 = resolved.iter().map(|&i| phi0[i] * phi0[i] * h).sum();
    let m = model.n_modes();
    // Candidate points: an even stride plus the extremes of every φ_k / φ₀.
    let mut pts: Vec<usize> = model
        .sample_indices(512, 0)
        .into_iter()
        .filter(|&i| model.is_resolved(i))
        .collect();
    for k in 1..m {
        let ratio = |i: usize| model.eigenvector(k)[i] / phi0[i];
        let hi = resolved.iter().copied().max_by(|&a, &b| ratio(a).total_cmp(&ratio(b)));
        let lo = resolved.iter().copied().min_by(|&a, &b| ratio(a).total_cmp(&ratio(b)));
        pts.extend(hi.into_iter().chain(lo));
    }
    pts.sort_unstable();
    pts.dedup();
    let psi: Vec<Vec<f64>> = (1..m)
        .map(|k| pts.iter().map(|&i| model.eigenvector(k)[i] / phi0[i]).collect())
        .collect();
    let l0 = model.lambda0();
    let mut sup_deviation = Vec::with_capacity(times.len());
    for &t in times {
        let w: Vec<f64> = (1..m).map(|k| (-(model.eigenvalues()[k] - l0) * t).exp()).collect();
        let mut sup = 0.0f64;
        for a in 0..pts.len() {
            for b in a..pts.len() {
                let s: f64 = psi.iter().zip(&w).map(|(p, w)| w * (p[a] * p[b])).sum();
                sup = sup.max(s.abs());
            }
        }
        sup_deviation.push(sup);
    }
    if sup_deviation.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Fit("sup deviation underflows on the time grid".into()));
    }
    let logs: Vec<f64> = sup_deviation.iter().map(|s| s.ln()).collect();
    let fit = linear_fit(times, &logs)?;
    Ok(UniformConvergence {
        times: times.to_vec(),
        sup_deviation,
        rate: -fit.slope,
        rate_stderr: fit.slope_stderr,
        resolved_mass,
        small_region: resolved_mass < 0.5,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub x: Vec<f64>,
    pub outside: MCEstimate,
    pub inside: MCEstimate,
    pub ratio: f64,
    pub ratio_stderr: f64,
    /// The inside estimate is consistent with zero; `ratio` is then a lower bound.
    pub lower_bound_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRatio {
    pub points: Vec<RatioPoint>,
    /// Largest ratio among points whose inside mass is resolved; NaN if none is.
    pub max_ratio: f64,
    /// Points reported only as lower bounds.
    pub unresolved: usize,
    pub argmax: Vec<f64>,
}

/// `E^x[X_t ∉ D; e_V(t)] / E^x[X_t ∈ D; e_V(t)]` on `x_grid` from shared paths.
pub fn survival_ratio_test(
    v: &PotentialSpec,
    t: f64,
    ball: &crate::feynman_kac::Ball,
    x_grid: &[Vec<f64>],
    params: &StableParams,
    cfg: &FKConfig,
) -> Result<SurvivalRatio> {
    cfg.validate()?;
    if !(t > 0.0) || x_grid.is_empty() {
        return Err(Error::param("t", "need t > 0 and at least one start point"));
    }
    let law = StableLaw::new(*params)?;
    let n = cfg.steps(t);
    let h = t / n as f64;
    let mut points = Vec::with_capacity(x_grid.len());
    for x in x_grid {
        if x.len() != params.dim() {
            return Err(Error::param("x", "dimension differs from the process"));
        }
        let parts = cfg
            .chunking()
            .map(cfg.n_paths, |rng, count, _| -> Result<(Accumulator, Accumulator, f64)> {
                let (mut out, mut ins, mut wmax) = (Accumulator::default(), Accumulator::default(), 0.0f64);
                for _ in 0..count {
                    let (integral, end) = free_path_integral(&law, v, x, n, h, cfg, rng)?;
                    let w = (-integral).exp();
                    wmax = wmax.max(w);
                    let inside = ball.depth(&end) > 0.0;
                    out.push(if inside { 0.0 } else { w });
                    ins.push(if inside { w } else { 0.0 });
                }
                Ok((out, ins, wmax))
            });
        let (mut out, mut ins, mut wmax) = (Accumulator::default(), Accumulator::default(), 0.0f64);
        for p in parts {
            let (o, i, w) = p?;
            out.merge(&o);
            ins.merge(&i);
            wmax = wmax.max(w);
        }
        let (o, i) = (out.estimate(), ins.estimate());
        let lower_bound_only = i.mean <= 2.0 * i.stderr;
        let ratio = if lower_bound_only {
            // Upper bound for the inside mass: two standard errors, or the
            // rule of three when no path ended inside.
            let upper = (i.mean + 2.0 * i.stderr).max(3.0 * wmax / o.n_samples as f64);
            o.mean / upper
        } else {
            o.mean / i.mean
        };
        // Each path feeds exactly one of the two integrands, so the covariance
        // of the means is -mean_o mean_i / (n - 1).
        let nn = o.n_samples as f64;
        let cov = -o.mean * i.mean / (nn - 1.0).max(1.0);
        let var = (o.stderr / i.mean).powi(2) + (o.mean * i.stderr / (i.mean * i.mean)).powi(2)
            - 2.0 * o.mean / i.mean.powi(3) * cov;
        points.push(RatioPoint {
            x: x.clone(),
            outside: o,
            inside: i,
            ratio,
            ratio_stderr: var.max(0.0).sqrt(),
            lower_bound_only,
        });
    }
    let best = points
        .iter()
        .filter(|p| !p.lower_bound_only)
        .max_by(|a, b| a.ratio.total_cmp(&b.ratio));
    let (max_ratio, argmax) = match best {
        Some(b) => (b.ratio, b.x.clone()),
        None => (f64::NAN, Vec::new()),
    };
    let unresolved = points.iter().filter(|p| p.lower_bound_only).count();
    Ok(SurvivalRatio {
        max_ratio,
        argmax,
        unresolved,
        points,
    })
}
