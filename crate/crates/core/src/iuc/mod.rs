//! Intrinsic ultracontractivity: classification from the growth of
//! `V / log|x|` and numerical diagnostics on spectral models and paths.

mod scans;

pub use scans::{
    survival_ratio_test, tail_bound_scan, uniform_convergence_scan, RatioPoint, SurvivalRatio, TailBound,
    UniformConvergence,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potentials::{comparability_constant, GrowthClass, PotentialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IUCClass {
    #[serde(rename = "IUC")]
    Iuc,
    #[serde(rename = "AIUC_only")]
    AiucOnly,
    #[serde(rename = "not_AIUC")]
    NotAiuc,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl std::fmt::Display for IUCClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IUCClass::Iuc => "IUC",
            IUCClass::AiucOnly => "AIUC_only",
            IUCClass::NotAiuc => "not_AIUC",
            IUCClass::Inconclusive => "inconclusive",
        })
    }
}

/// Estimate of `liminf V(x) / log|x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LiminfRatio {
    /// The ratio grows without visible bound.
    Infinite,
    /// Bounded below by the smallest observed value.
    Positive { lower_bound: f64 },
    /// Decreasing towards zero; the smallest observed value and its decade.
    Vanishing { smallest: f64, radius: f64 },
    Unknown,
}

/// One named numerical check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    pub note: String,
}

impl Evidence {
    fn new(name: &str, value: f64, pass: bool, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            value,
            pass,
            note: note.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IUCVerdict {
    pub class: IUCClass,
    pub liminf_ratio: LiminfRatio,
    /// Decade starts `R` and `r(R) = inf_{|x| ∈ [R, 10R]} V(x) / log|x|`.
    pub radii: Vec<f64>,
    pub ratios: Vec<f64>,
    /// Same with `V` replaced by its supremum over the unit ball around `x`.
    pub ball_ratios: Vec<f64>,
    pub evidence: Vec<Evidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IUCConfig {
    pub r_grid: Vec<f64>,
    /// Per-decade growth factor of `r(R)` that counts as divergence.
    pub growth_factor: f64,
    /// Level `r(R_max)` must exceed for divergence.
    pub divergence_level: f64,
    /// Points per decade on each half-axis.
    pub samples_per_decade: usize,
    /// Points per axis in each unit ball.
    pub ball_points: usize,
}

impl Default for IUCConfig {
    fn default() -> Self {
        Self {
            r_grid: vec![10.0, 100.0, 1e3, 1e4],
            growth_factor: 1.5,
            divergence_level: 50.0,
            samples_per_decade: 64,
            ball_points: 17,
        }
    }
}

/// Directions along which `|x|` is scanned.
fn directions(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for axis in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[axis] = s;
            out.push(e);
        }
    }
    if dim == 2 {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in [(c, c), (-c, c), (c, -c), (-c, -c)] {
            out.push(vec![a, b]);
        }
    }
    out
}

fn decade_infimum(v: &PotentialSpec, r0: f64, cfg: &IUCConfig, ball: bool) -> f64 {
    let n = cfg.samples_per_decade.max(2);
    let mut inf = f64::INFINITY;
    for e in directions(v.dim()) {
        for i in 0..=n {
            let r = r0 * 10f64.powf(i as f64 / n as f64);
            let x: Vec<f64> = e.iter().map(|c| c * r).collect();
            let val = if ball {
                crate::potentials::ball_samples(&x, 1.0, cfg.ball_points)
                    .iter()
                    .map(|p| v.evaluate(p))
                    .fold(f64::NEG_INFINITY, f64::max)
            } else {
                v.evaluate(&x)
            };
            inf = inf.min(val / r.ln());
        }
    }
    inf
}

/// Class predicted by the declared behaviour at infinity.
fn declared_class(g: GrowthClass) -> IUCClass {
    match g {
        GrowthClass::Polynomial { delta } if delta > 0.0 => IUCClass::Iuc,
        GrowthClass::Exponential { beta } if beta > 0.0 => IUCClass::Iuc,
        GrowthClass::Logarithmic { c } if c > 0.0 => IUCClass::AiucOnly,
        GrowthClass::Polynomial { .. } | GrowthClass::Exponential { .. } => IUCClass::Inconclusive,
        GrowthClass::Logarithmic { .. }
        | GrowthClass::SubLogarithmic
        | GrowthClass::Bounded
        | GrowthClass::DecayingToZero => IUCClass::NotAiuc,
    }
}

/// Classifies `V` from the decade infima of `V / log|x|`; the numerical trend
/// must agree with the declared growth class, otherwise the verdict is
/// inconclusive.
pub fn classify(v: &PotentialSpec, cfg: &IUCConfig) -> Result<IUCVerdict> {
    let radii = cfg.r_grid.clone();
    if radii.len() < 2 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 1.0 {
        return Err(Error::param("r_grid", "need at least two increasing radii above 1"));
    }
    let ratios: Vec<f64> = radii.iter().map(|&r| decade_infimum(v, r, cfg, false)).collect();
    let ball_ratios: Vec<f64> = radii.iter().map(|&r| decade_infimum(v, r, cfg, true)).collect();
    let mut evidence = Vec::new();

    let steps: Vec<f64> = ratios.windows(2).map(|w| w[1] / w[0]).collect();
    let last = *ratios.last().unwrap();
    let first = ratios[0];
    let smallest = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let diverging = ratios.iter().all(|&r| r > 0.0)
        && steps.iter().all(|&q| q >= cfg.growth_factor)
        && last > cfg.divergence_level;
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]) && last < first / 1.2;
    let ball_decreasing = ball_ratios.windows(2).all(|w| w[1] < w[0]);
    let nonpositive = smallest <= 0.0;
    let bounded_below = smallest > 0.0 && !decreasing && !diverging;

    evidence.push(Evidence::new(
        "ratio_growth_per_decade",
        steps.iter().copied().fold(f64::INFINITY, f64::min),
        diverging,
        format!("divergence needs every step >= {} and r(R_max) > {}", cfg.growth_factor, cfg.divergence_level),
    ));
    evidence.push(Evidence::new(
        "ratio_decreasing",
        last / first,
        decreasing,
        "r(R) strictly decreasing with overall drop of at least 1/1.2",
    ));
    evidence.push(Evidence::new(
        "ball_sup_ratio_decreasing",
        *ball_ratios.last().unwrap(),
        ball_decreasing,
        "unit-ball suprema of V / log|x| decreasing",
    ));
    evidence.push(Evidence::new("smallest_ratio", smallest, smallest > 0.0, "inf over all decades"));

    let (numeric, liminf_ratio) = if diverging {
        (IUCClass::Iuc, LiminfRatio::Infinite)
    } else if nonpositive || (decreasing && ball_decreasing) {
        let i = ratios
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        (
            IUCClass::NotAiuc,
            LiminfRatio::Vanishing {
                smallest,
                radius: radii[i],
            },
        )
    } else if bounded_below {
        (IUCClass::AiucOnly, LiminfRatio::Positive { lower_bound: smallest })
    } else {
        (IUCClass::Inconclusive, LiminfRatio::Unknown)
    };

    let declared = declared_class(v.growth_class());
    let growth = v.growth_check();
    evidence.push(Evidence::new(
        "declared_growth_confirmed",
        growth.measured,
        growth.consistent,
        format!("declared {:?}, predicts {declared}", growth.claimed),
    ));
    // Necessity of the logarithmic threshold relies on comparability on unit balls.
    if numeric != IUCClass::Iuc {
        match comparability_constant(v, radii[0]) {
            Ok(m) => evidence.push(Evidence::new("unit_ball_comparability", m, m.is_finite(), "M_V over the scanned region")),
            Err(e) => evidence.push(Evidence::new("unit_ball_comparability", f64::NAN, false, e.to_string())),
        }
    }
    let agrees = numeric == declared && growth.consistent;
    evidence.push(Evidence::new(
        "numeric_matches_declared",
        if agrees { 1.0 } else { 0.0 },
        agrees,
        format!("numeric {numeric}, declared {declared}"),
    ));
    let comparable = evidence
        .iter()
        .find(|e| e.name == "unit_ball_comparability")
        .map(|e| e.pass)
        .unwrap_or(true);
    let class = if !agrees || (numeric == IUCClass::NotAiuc && !comparable && !nonpositive) {
        IUCClass::Inconclusive
    } else {
        numeric
    };
    Ok(IUCVerdict {
        class,
        liminf_ratio,
        radii,
        ratios,
        ball_ratios,
        evidence,
    })
}

#[cfg(test)]
mod tests;
