use serde::{Deserialize, Serialize};

use super::PotentialSpec;
use crate::error::{Error, Result};
use crate::stable::{norm, StableParams};

/// One term `sign · |x - location|^{-beta}` of a singular sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularTerm {
    pub location: Vec<f64>,
    pub beta: f64,
    pub sign: f64,
}

/// Singular point of `V` with `|V(y)| ~ |y - location|^{-beta}` nearby.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Singularity {
    pub location: Vec<f64>,
    pub beta: f64,
    pub sign: f64,
}

/// Behaviour of `V` at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum GrowthClass {
    Bounded,
    /// Tends to zero at infinity.
    DecayingToZero,
    /// Unbounded but `V / log|x| → 0`.
    SubLogarithmic,
    /// `V / log|x| → c`.
    Logarithmic { c: f64 },
    /// `log V / log|x| → delta`.
    Polynomial { delta: f64 },
    /// `log V / |x| → beta`.
    Exponential { beta: f64 },
}

impl GrowthClass {
    /// Whether `V → ∞` at infinity.
    pub fn is_confining(&self) -> bool {
        matches!(
            self,
            GrowthClass::SubLogarithmic
                | GrowthClass::Logarithmic { .. }
                | GrowthClass::Polynomial { .. }
                | GrowthClass::Exponential { .. }
        )
    }

    fn rank(&self) -> (u8, f64) {
        match *self {
            GrowthClass::DecayingToZero => (0, 0.0),
            GrowthClass::Bounded => (1, 0.0),
            GrowthClass::SubLogarithmic => (2, 0.0),
            GrowthClass::Logarithmic { c } => (3, c),
            GrowthClass::Polynomial { delta } => (4, delta),
            GrowthClass::Exponential { beta } => (5, beta),
        }
    }
}

/// Where the negative part of `V` lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "support", content = "radius", rename_all = "snake_case")]
pub enum NegativeSupport {
    Empty,
    /// Contained in the closed ball of this radius about the origin.
    Radius(f64),
    Unbounded,
}

/// Named potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum PotentialKind {
    /// `V ≡ 0`.
    Zero,
    /// `V ≡ c`.
    Constant { c: f64 },
    /// `|x|^delta`.
    Power { delta: f64 },
    /// `|x|^beta log(1 + |x|)`.
    PowerLog { beta: f64 },
    /// `e^{beta |x|}`.
    Exponential { beta: f64 },
    /// `Σ sign_i |x - x_i|^{-beta_i}`.
    SingularSum { terms: Vec<SingularTerm> },
    /// `-depth · 1_{|x| <= radius}`.
    Well { depth: f64, radius: f64 },
    /// `c log|x| · 1_{|x| > 1}`.
    LogPlus { c: f64 },
    /// `log|x| · 1_{|x| > 1} - |x|^{-alpha/2} · 1_{|x| <= 1}`.
    WellPlusLog { alpha: f64 },
    /// `log|x| / log log|x|` for `|x| > e²`, continued by its value at `e²`.
    LogOverLogLog,
    /// `-charge / |x|`; meaningful in `d = 3`.
    Coulomb { charge: f64 },
    /// Piecewise-linear interpolation of samples in `d = 1`, constant outside.
    Tabulated { x: Vec<f64>, v: Vec<f64> },
    /// Pointwise sum.
    Sum { terms: Vec<PotentialKind> },
}

const E2: f64 = 7.389_056_098_930_65;

impl PotentialKind {
    /// One representative of each kind, for tests and documentation.
    pub fn examples() -> Vec<PotentialKind> {
        vec![
            PotentialKind::Zero,
            PotentialKind::Constant { c: -0.7 },
            PotentialKind::Power { delta: 2.0 },
            PotentialKind::PowerLog { beta: 1.0 },
            PotentialKind::Exponential { beta: 0.5 },
            PotentialKind::SingularSum {
                terms: vec![
                    SingularTerm {
                        location: vec![0.0],
                        beta: 0.5,
                        sign: -1.0,
                    },
                    SingularTerm {
                        location: vec![2.0],
                        beta: 0.3,
                        sign: 1.0,
                    },
                ],
            },
            PotentialKind::Well {
                depth: 1.0,
                radius: 1.0,
            },
            PotentialKind::LogPlus { c: 2.0 },
            PotentialKind::WellPlusLog { alpha: 1.0 },
            PotentialKind::LogOverLogLog,
            PotentialKind::Tabulated {
                x: vec![-1.0, 0.0, 1.0],
                v: vec![1.0, -2.0, 3.0],
            },
            PotentialKind::Sum {
                terms: vec![
                    PotentialKind::Power { delta: 2.0 },
                    PotentialKind::Well {
                        depth: 5.0,
                        radius: 1.0,
                    },
                ],
            },
        ]
    }

    pub(crate) fn validate(&self, dim: usize) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, format!("must be positive and finite, got {v}")))
            }
        };
        match self {
            PotentialKind::Zero | PotentialKind::LogOverLogLog => Ok(()),
            PotentialKind::Constant { c } | PotentialKind::LogPlus { c } => {
                if c.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("c", "must be finite"))
                }
            }
            PotentialKind::Power { delta } => positive("delta", *delta),
            PotentialKind::PowerLog { beta } | PotentialKind::Exponential { beta } => positive("beta", *beta),
            PotentialKind::SingularSum { terms } => {
                for t in terms {
                    if t.location.len() != dim {
                        return Err(Error::param("location", "dimension mismatch"));
                    }
                    positive("beta", t.beta)?;
                    if !t.sign.is_finite() || t.sign == 0.0 {
                        return Err(Error::param("sign", "must be a nonzero finite weight"));
                    }
                }
                Ok(())
            }
            PotentialKind::Well { depth, radius } => {
                positive("depth", *depth)?;
                positive("radius", *radius)
            }
            PotentialKind::WellPlusLog { alpha } => {
                if *alpha > 0.0 && *alpha < 2.0 {
                    Ok(())
                } else {
                    Err(Error::param("alpha", "must lie in (0, 2)"))
                }
            }
            PotentialKind::Coulomb { charge } => positive("charge", *charge),
            PotentialKind::Tabulated { x, v } => {
                if dim != 1 {
                    return Err(Error::Unsupported("tabulated potentials are one-dimensional".into()));
                }
                if x.len() < 2 || x.len() != v.len() {
                    return Err(Error::param("x", "need at least two samples and matching lengths"));
                }
                if x.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::param("x", "sample points must be strictly increasing"));
                }
                if v.iter().any(|y| !y.is_finite()) {
                    return Err(Error::param("v", "sample values must be finite"));
                }
                Ok(())
            }
            PotentialKind::Sum { terms } => {
                if terms.is_empty() {
                    return Err(Error::param("terms", "empty sum"));
                }
                terms.iter().try_for_each(|t| t.validate(dim))
            }
        }
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        match self {
            PotentialKind::Zero => 0.0,
            PotentialKind::Constant { c } => *c,
            PotentialKind::Power { delta } => norm(x).powf(*delta),
            PotentialKind::PowerLog { beta } => {
                let r = norm(x);
                r.powf(*beta) * r.ln_1p()
            }
            PotentialKind::Exponential { beta } => (beta * norm(x)).exp(),
            PotentialKind::SingularSum { terms } => terms
                .iter()
                .map(|t| {
                    let r = x
                        .iter()
                        .zip(&t.location)
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt();
                    if r == 0.0 {
                        t.sign.signum() * f64::INFINITY
                    } else {
                        t.sign * r.powf(-t.beta)
                    }
                })
                .sum(),
            PotentialKind::Well { depth, radius } => {
                if norm(x) <= *radius {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialKind::LogPlus { c } => {
                let r = norm(x);
                if r > 1.0 {
                    c * r.ln()
                } else {
                    0.0
                }
            }
            PotentialKind::WellPlusLog { alpha } => {
                let r = norm(x);
                if r > 1.0 {
                    r.ln()
                } else if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -r.powf(-alpha / 2.0)
                }
            }
            PotentialKind::LogOverLogLog => {
                let r = norm(x).max(E2);
                r.ln() / r.ln().ln()
            }
            PotentialKind::Coulomb { charge } => {
                let r = norm(x);
                if r == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -charge / r
                }
            }
            PotentialKind::Tabulated { x: xs, v } => {
                let z = x[0];
                let n = xs.len();
                if z <= xs[0] {
                    return v[0];
                }
                if z >= xs[n - 1] {
                    return v[n - 1];
                }
                let i = xs.partition_point(|&a| a <= z).clamp(1, n - 1);
                let w = (z - xs[i - 1]) / (xs[i] - xs[i - 1]);
                v[i - 1] + w * (v[i] - v[i - 1])
            }
            PotentialKind::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
        }
    }

    pub(crate) fn growth_class(&self) -> GrowthClass {
        match self {
            PotentialKind::Zero | PotentialKind::Constant { .. } | PotentialKind::Tabulated { .. } => {
                GrowthClass::Bounded
            }
            PotentialKind::Power { delta } => GrowthClass::Polynomial { delta: *delta },
            PotentialKind::PowerLog { beta } => GrowthClass::Polynomial { delta: *beta },
            PotentialKind::Exponential { beta } => GrowthClass::Exponential { beta: *beta },
            PotentialKind::SingularSum { .. } | PotentialKind::Well { .. } | PotentialKind::Coulomb { .. } => {
                GrowthClass::DecayingToZero
            }
            PotentialKind::LogPlus { c } => {
                if *c > 0.0 {
                    GrowthClass::Logarithmic { c: *c }
                } else if *c == 0.0 {
                    GrowthClass::DecayingToZero
                } else {
                    // Unbounded below; tracked as logarithmic with a negative rate.
                    GrowthClass::Logarithmic { c: *c }
                }
            }
            PotentialKind::WellPlusLog { .. } => GrowthClass::Logarithmic { c: 1.0 },
            PotentialKind::LogOverLogLog => GrowthClass::SubLogarithmic,
            PotentialKind::Sum { terms } => {
                let classes: Vec<GrowthClass> = terms.iter().map(|t| t.growth_class()).collect();
                let top = classes
                    .iter()
                    .copied()
                    .max_by(|a, b| {
                        let (ra, va) = a.rank();
                        let (rb, vb) = b.rank();
                        ra.cmp(&rb).then(va.total_cmp(&vb))
                    })
                    .unwrap_or(GrowthClass::Bounded);
                match top {
                    GrowthClass::Logarithmic { .. } => {
                        let c = classes
                            .iter()
                            .map(|g| match g {
                                GrowthClass::Logarithmic { c } => *c,
                                _ => 0.0,
                            })
                            .sum();
                        GrowthClass::Logarithmic { c }
                    }
                    GrowthClass::DecayingToZero => GrowthClass::DecayingToZero,
                    other => other,
                }
            }
        }
    }

    pub(crate) fn singularities(&self, dim: usize) -> Vec<Singularity> {
        match self {
            PotentialKind::SingularSum { terms } => terms
                .iter()
                .map(|t| Singularity {
                    location: t.location.clone(),
                    beta: t.beta,
                    sign: t.sign.signum(),
                })
                .collect(),
            PotentialKind::WellPlusLog { alpha } => vec![Singularity {
                location: vec![0.0; dim],
                beta: alpha / 2.0,
                sign: -1.0,
            }],
            PotentialKind::Coulomb { .. } => vec![Singularity {
                location: vec![0.0; dim],
                beta: 1.0,
                sign: -1.0,
            }],
            PotentialKind::Sum { terms } => terms.iter().flat_map(|t| t.singularities(dim)).collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn negative_support(&self) -> NegativeSupport {
        match self {
            PotentialKind::Zero
            | PotentialKind::Power { .. }
            | PotentialKind::PowerLog { .. }
            | PotentialKind::Exponential { .. }
            | PotentialKind::LogOverLogLog => NegativeSupport::Empty,
            PotentialKind::Constant { c } => {
                if *c < 0.0 {
                    NegativeSupport::Unbounded
                } else {
                    NegativeSupport::Empty
                }
            }
            PotentialKind::LogPlus { c } => {
                if *c < 0.0 {
                    NegativeSupport::Unbounded
                } else {
                    NegativeSupport::Empty
                }
            }
            PotentialKind::SingularSum { terms } => {
                if terms.iter().any(|t| t.sign < 0.0) {
                    NegativeSupport::Unbounded
                } else {
                    NegativeSupport::Empty
                }
            }
            PotentialKind::Well { radius, .. } => NegativeSupport::Radius(*radius),
            PotentialKind::WellPlusLog { .. } => NegativeSupport::Radius(1.0),
            PotentialKind::Coulomb { .. } => NegativeSupport::Unbounded,
            PotentialKind::Tabulated { x, v } => {
                if v[0] < 0.0 || v[v.len() - 1] < 0.0 {
                    NegativeSupport::Unbounded
                } else {
                    let r = x
                        .iter()
                        .zip(v)
                        .enumerate()
                        .filter(|(i, (_, &y))| {
                            y < 0.0 || v.get(i + 1).is_some_and(|&n| n < 0.0) || (*i > 0 && v[i - 1] < 0.0)
                        })
                        .map(|(_, (&a, _))| a.abs())
                        .fold(f64::NEG_INFINITY, f64::max);
                    if r.is_finite() {
                        NegativeSupport::Radius(r)
                    } else {
                        NegativeSupport::Empty
                    }
                }
            }
            PotentialKind::Sum { terms } => {
                let mut out = NegativeSupport::Empty;
                for t in terms {
                    out = match (out, t.negative_support()) {
                        (NegativeSupport::Unbounded, _) | (_, NegativeSupport::Unbounded) => NegativeSupport::Unbounded,
                        (NegativeSupport::Radius(a), NegativeSupport::Radius(b)) => NegativeSupport::Radius(a.max(b)),
                        (NegativeSupport::Radius(a), _) | (_, NegativeSupport::Radius(a)) => NegativeSupport::Radius(a),
                        _ => NegativeSupport::Empty,
                    };
                }
                out
            }
        }
    }

    /// Warnings for singular terms that violate the Kato conditions
    /// `β < α` (`α < d`) or `β < 1` (`α >= d = 1`).
    pub(crate) fn kato_flags(&self, params: &StableParams) -> Vec<String> {
        let a = params.alpha();
        let d = params.dim() as f64;
        let limit = if a < d { a } else { 1.0 };
        self.singularities(params.dim())
            .iter()
            .filter(|s| s.beta >= limit)
            .map(|s| {
                format!(
                    "singularity of order {} at {:?} is not in the Kato class for alpha = {a}, d = {}",
                    s.beta,
                    s.location,
                    params.dim()
                )
            })
            .collect()
    }

    pub(crate) fn breakpoints_1d(&self) -> Vec<f64> {
        let mut out = match self {
            PotentialKind::SingularSum { terms } => terms.iter().map(|t| t.location[0]).collect(),
            PotentialKind::Well { radius, .. } => vec![-radius, *radius],
            PotentialKind::LogPlus { .. } => vec![-1.0, 1.0],
            PotentialKind::WellPlusLog { .. } => vec![-1.0, 0.0, 1.0],
            PotentialKind::LogOverLogLog => vec![-E2, E2],
            PotentialKind::Coulomb { .. } | PotentialKind::Power { .. } | PotentialKind::PowerLog { .. } => {
                vec![0.0]
            }
            PotentialKind::Exponential { .. } => vec![0.0],
            PotentialKind::Tabulated { x, .. } => x.clone(),
            PotentialKind::Sum { terms } => terms.iter().flat_map(|t| t.breakpoints_1d()).collect(),
            PotentialKind::Zero | PotentialKind::Constant { .. } => Vec::new(),
        };
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Outcome of the growth-class diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    pub claimed: GrowthClass,
    /// Measured rate, in the units of the claimed class.
    pub measured: f64,
    pub consistent: bool,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

pub(crate) fn growth_check(spec: &PotentialSpec) -> GrowthCheck {
    let v = |r: f64| spec.evaluate_1d(r);
    let claimed = spec.growth_class();
    let sup_abs = |lo: f64, hi: f64| log_grid(lo, hi, 64).map(|r| v(r).abs()).fold(0.0, f64::max);
    let (measured, consistent) = match claimed {
        GrowthClass::Polynomial { delta } => {
            let (r0, r1) = (1e6, 1e7);
            let m = (v(r1).ln() - v(r0).ln()) / (r1 / r0).ln();
            (m, (m - delta).abs() < 0.1)
        }
        GrowthClass::Exponential { beta } => {
            let (r0, r1) = (10.0, 100.0);
            let m = (v(r1).ln() - v(r0).ln()) / (r1 - r0);
            (m, ((m - beta) / beta).abs() < 0.05)
        }
        GrowthClass::Logarithmic { c } => {
            let m = v(1e8) / 1e8f64.ln();
            (m, (m - c).abs() < 0.05 * c.abs().max(1e-3))
        }
        GrowthClass::SubLogarithmic => {
            let ratios: Vec<f64> = [1e3, 1e5, 1e7, 1e9].iter().map(|&r| v(r) / r.ln()).collect();
            let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
            let growing = v(1e9) > v(1e3);
            (ratios[3], decreasing && growing)
        }
        GrowthClass::Bounded => {
            let near = sup_abs(1.0, 1e3).max(v(0.5).abs());
            let far = sup_abs(1e3, 1e8);
            (far, far.is_finite() && far <= 2.0 * near + 1e-12)
        }
        GrowthClass::DecayingToZero => {
            let mid = sup_abs(10.0, 100.0);
            let far = sup_abs(1e6, 1e7);
            (far, far <= 0.1 * mid || far == 0.0)
        }
    };
    GrowthCheck {
        claimed,
        measured,
        consistent,
    }
}
