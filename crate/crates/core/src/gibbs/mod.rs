//! Gibbs measures on path space: the conditional window kernel, the DLR
//! tower identity, convergence under growing boundary conditions and the
//! ground-state transformed chain.
//!
//! Window quantities are exact matrix products in the retained eigenbasis of
//! a [`SpectralModel`]; sampling is confined to [`chain`].

pub mod basis;
pub mod chain;


use rand::Rng as _;
use serde::{Deserialize, Serialize};

pub use basis::{Constraint, Cylinder, ModeBasis};
pub use chain::{
    build_chain, inverse_gs_moment, typical_path_check, InverseMoment, PPhi1Chain, Start, TypicalConfig,
    TypicalReport,
};

use crate::error::{Error, Result};
use crate::mc::Rng;
use crate::spectral::SpectralModel;

/// `Z` must exceed the mode truncation bound by this factor.
pub const KERNEL_FLOOR_FACTOR: f64 = 100.0;

/// Largest discarded boundary mass tolerated by [`dlr_check`].
pub const DLR_EXCLUDED_LIMIT: f64 = 1e-10;

/// Window `[-T, T]` with boundary points at both ends, as grid indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsWindow {
    pub half_width: f64,
    pub left: usize,
    pub right: usize,
}

impl GibbsWindow {
    /// Window with boundary points snapped to the nearest grid points.
    pub fn new(model: &SpectralModel, half_width: f64, left: &[f64], right: &[f64]) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("T", "must be positive"));
        }
        let grid = model.grid();
        Ok(Self {
            half_width,
            left: grid.index_of(left)?,
            right: grid.index_of(right)?,
        })
    }
}

/// The stationary path measure of a model together with its window kernels.
#[derive(Debug, Clone)]
pub struct PathMeasure<'a> {
    model: &'a SpectralModel,
    basis: ModeBasis,
}

impl<'a> PathMeasure<'a> {
    pub fn new(model: &'a SpectralModel) -> Self {
        Self {
            model,
            basis: ModeBasis::new(model),
        }
    }

    pub fn model(&self) -> &SpectralModel {
        self.model
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    /// Smallest `u(t, x, y)` accepted as a normalizing constant.
    pub fn kernel_floor(&self, t: f64) -> f64 {
        let m = self.model;
        let floor = m.phi0_floor();
        let resolved = (-m.lambda0() * t).exp() * floor * floor;
        resolved.max(KERNEL_FLOOR_FACTOR * m.truncation_bound(t, m.n_modes()))
    }

    /// `u(t, x, y)`, refusing values under [`Self::kernel_floor`].
    fn normalizer(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        let z = self.basis.kernel(t, x, y);
        let floor = self.kernel_floor(t);
        if !(z >= floor) {
            return Err(Error::OutOfRange(format!(
                "normalizer u({t}, x, y) = {z:.3e} is below the floor {floor:.3e} for boundary points {:?} and {:?}",
                self.basis.coords[x], self.basis.coords[y]
            )));
        }
        Ok(z)
    }

    /// Conditional probability of `event` inside the window given its
    /// boundary points.
    pub fn kernel(&self, window: &GibbsWindow, event: &Cylinder) -> Result<f64> {
        let t = window.half_width;
        if !event.times_within(-t, t, false) {
            return Err(Error::Precondition(format!("event times must lie in (-{t}, {t})")));
        }
        for &i in &[window.left, window.right] {
            if i >= self.basis.n_points() {
                return Err(Error::OutOfRange(format!("boundary index {i} beyond the grid")));
            }
            if !self.model.is_resolved(i) {
                return Err(Error::OutOfRange(format!(
                    "boundary point {:?} lies where the ground state is below the floor",
                    self.basis.coords[i]
                )));
            }
        }
        let z = self.normalizer(2.0 * t, window.left, window.right)?;
        let m = self.basis.chain(-t, t, event);
        Ok(self.basis.pair(&m, window.left, window.right) / z)
    }

    /// Probability of `event` under the stationary measure.
    pub fn probability(&self, event: &Cylinder) -> f64 {
        let (a, b) = match (event.constraints.first(), event.constraints.last()) {
            (Some(f), Some(l)) => (f.time, l.time),
            _ => return 1.0,
        };
        let m = self.basis.chain(a, b, event);
        (self.basis.lambda0() * (b - a)).exp() * m[(0, 0)]
    }

    /// Both sides of `μ(μ_S(A ∩ B, ·)) = μ(A ∩ B)` for `A` inside `(-S, S)`
    /// and `B` supported on `[-T, -S) ∪ (S, T]`.
    pub fn dlr_sides(&self, s: f64, t: f64, inner: &Cylinder, band: &Cylinder) -> Result<DlrPair> {
        if !(s > 0.0 && t > s && t.is_finite()) {
            return Err(Error::param("S, T", "need 0 < S < T"));
        }
        if !inner.times_within(-s, s, false) {
            return Err(Error::Precondition(format!("inner event times must lie in (-{s}, {s})")));
        }
        let outside_inner = band
            .constraints
            .iter()
            .all(|c| (c.time >= -t && c.time < -s) || (c.time > s && c.time <= t));
        if !outside_inner {
            return Err(Error::Precondition(format!(
                "band event times must lie in [-{t}, -{s}) or ({s}, {t}]"
            )));
        }
        let joint = inner.and(band)?;
        let basis = &self.basis;
        let l0 = basis.lambda0();
        let total = (2.0 * t * l0).exp();

        let rhs = total * basis.chain(-t, t, &joint)[(0, 0)];

        let (left_band, right_band) = split_band(band);
        let m_left = basis.chain(-t, -s, &left_band);
        let m_right = basis.chain(s, t, &right_band);
        let left = basis.synthesize(&m_left.row(0).transpose());
        let right = basis.synthesize(&m_right.column(0).into_owned());
        let inner_chain = basis.chain(-s, s, inner);
        let n = basis.n_points();
        let all: Vec<usize> = (0..n).collect();
        let numer = basis.to_grid(&inner_chain, &all, &all);
        let decay = basis.decay(2.0 * s);
        let denom = basis.to_grid(&nalgebra::DMatrix::from_diagonal(&decay), &all, &all);
        let floor = self.kernel_floor(2.0 * s);
        let h2 = basis.cell * basis.cell;

        let mut lhs = 0.0;
        let mut excluded = 0.0;
        let mut excluded_pairs = 0usize;
        for x in 0..n {
            for y in 0..n {
                let z = denom[(x, y)];
                let weight = total * left[x] * right[y] * h2;
                if z >= floor {
                    lhs += weight * z * (numer[(x, y)] / z);
                } else {
                    excluded += (weight * z).abs();
                    excluded_pairs += 1;
                }
            }
        }
        if excluded > DLR_EXCLUDED_LIMIT {
            return Err(Error::OutOfRange(format!(
                "{excluded_pairs} boundary pairs below the kernel floor carry mass {excluded:.3e}"
            )));
        }
        Ok(DlrPair {
            lhs,
            rhs,
            excluded_mass: excluded,
            excluded_pairs,
        })
    }
}

fn split_band(band: &Cylinder) -> (Cylinder, Cylinder) {
    let (l, r): (Vec<_>, Vec<_>) = band.constraints.iter().cloned().partition(|c| c.time < 0.0);
    (Cylinder { constraints: l }, Cylinder { constraints: r })
}

/// Both routes of one DLR identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlrPair {
    /// Boundary pairs integrated against the conditional window kernel.
    pub lhs: f64,
    /// Stationary probability of the joint event.
    pub rhs: f64,
    /// Absolute mass of boundary pairs left out because `u(2S)` is below the floor.
    pub excluded_mass: f64,
    pub excluded_pairs: usize,
}

impl DlrPair {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DlrReport {
    pub inner_half_width: f64,
    pub outer_half_width: f64,
    pub pairs: Vec<DlrPair>,
    pub max_discrepancy: f64,
}

/// Conditional probability of `event` in `window`.
pub fn gibbs_kernel(window: &GibbsWindow, model: &SpectralModel, event: &Cylinder) -> Result<f64> {
    PathMeasure::new(model).kernel(window, event)
}

/// DLR tower identity on every `(inner, band)` pair; reports the largest gap.
pub fn dlr_check(model: &SpectralModel, s: f64, t: f64, events: &[(Cylinder, Cylinder)]) -> Result<DlrReport> {
    let measure = PathMeasure::new(model);
    let pairs = events
        .iter()
        .map(|(a, b)| measure.dlr_sides(s, t, a, b))
        .collect::<Result<Vec<_>>>()?;
    let max_discrepancy = pairs.iter().map(DlrPair::discrepancy).fold(0.0, f64::max);
    Ok(DlrReport {
        inner_half_width: s,
        outer_half_width: t,
        pairs,
        max_discrepancy,
    })
}

/// Random interval constraint at `time` with endpoints in `[-reach, reach]`.
fn random_constraint(rng: &mut Rng, time: f64, reach: f64) -> Constraint {
    let a = rng.random_range(-reach..reach);
    let w = rng.random_range(0.25 * reach..reach);
    Constraint {
        time,
        lo: a - 0.5 * w,
        hi: a + 0.5 * w,
    }
}

/// Random inner event in `(-S, S)` and band event on both sides, each
/// constraint box drawn inside `[-reach, reach]`.
pub fn random_event_pair(rng: &mut Rng, s: f64, t: f64, reach: f64) -> Result<(Cylinder, Cylinder)> {
    let n_inner = rng.random_range(1..=3);
    let inner: Vec<_> = (0..n_inner)
        .map(|_| {
            let time = rng.random_range(-s..s);
            random_constraint(rng, time, reach)
        })
        .collect();
    let mut band = Vec::new();
    for side in [-1.0, 1.0] {
        for _ in 0..rng.random_range(0..=2) {
            let time = side * rng.random_range(s..t);
            if time.abs() > s {
                band.push(random_constraint(rng, time, reach));
            }
        }
    }
    Ok((Cylinder::new(inner)?, Cylinder::new(band)?))
}

/// Boundary points `ω̄(-N) = ω̄(N)` placed on the first axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryProfile {
    Constant { value: f64 },
    /// `scale · N^power`.
    Polynomial { scale: f64, power: f64 },
    /// `scale · e^{rate N}`.
    Exponential { scale: f64, rate: f64 },
}

impl BoundaryProfile {
    pub fn at(&self, n: f64) -> f64 {
        match *self {
            BoundaryProfile::Constant { value } => value,
            BoundaryProfile::Polynomial { scale, power } => scale * n.powf(power),
            BoundaryProfile::Exponential { scale, rate } => scale * (rate * n).exp(),
        }
    }
}

/// Probe points for the kernel ratio, on the first axis.
pub const PROBE_POINTS: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub n: f64,
    pub boundary: f64,
    /// `μ_N(event, ω̄)`; `None` when the kernel floor refuses the boundary.
    pub value: Option<f64>,
    pub discrepancy: Option<f64>,
    /// Largest relative deviation of the boundary kernel ratio from
    /// `e^{2λ₀T} φ₀(x) φ₀(y)` over the probe points.
    pub kernel_deviation: Option<f64>,
    /// `e^{-ΛN} / φ₀(ω̄(N))`.
    pub omega_star: f64,
    pub refusal: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConvergence {
    pub half_width: f64,
    pub profile: BoundaryProfile,
    pub stationary: f64,
    pub points: Vec<BoundaryPoint>,
    /// Discrepancies available at every `N` and strictly decreasing.
    pub monotone: bool,
    /// `e^{-ΛN}/φ₀(ω̄(N))` decreasing over the sampled `N` only.
    pub omega_star_decreasing_on_sample: bool,
}

/// `|μ_N(event, ω̄) − μ(event)|` along `n_grid`, with the boundary kernel
/// ratio and the `Ω*` statistic. Boundaries that fail the kernel floor are
/// reported as refusals.
pub fn boundary_convergence(
    model: &SpectralModel,
    half_width: f64,
    profile: BoundaryProfile,
    event: &Cylinder,
    n_grid: &[f64],
) -> Result<BoundaryConvergence> {
    if !(half_width > 0.0) {
        return Err(Error::param("T", "must be positive"));
    }
    if !event.times_within(-half_width, half_width, false) {
        return Err(Error::Precondition(format!(
            "event times must lie in (-{half_width}, {half_width})"
        )));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| !(n > half_width)) {
        return Err(Error::Precondition(format!("N = {n} must exceed T = {half_width}")));
    }
    let grid = model.grid();
    let dim = grid.dim;
    let on_axis = |v: f64| {
        let mut p = vec![0.0; dim];
        p[0] = v;
        p
    };
    let boundaries = n_grid
        .iter()
        .map(|&n| {
            let v = profile.at(n);
            grid.index_of(&on_axis(v))
                .map_err(|_| Error::Precondition(format!("profile value {v} at N = {n} is off the grid")))
        })
        .collect::<Result<Vec<_>>>()?;
    let probes = PROBE_POINTS
        .iter()
        .map(|&p| grid.index_of(&on_axis(p)))
        .collect::<Result<Vec<_>>>()?;

    let measure = PathMeasure::new(model);
    let basis = measure.basis();
    let stationary = measure.probability(event);
    let l0 = model.lambda0();
    let gap = model.gap();
    let phi0 = model.ground_state();

    let mut points = Vec::with_capacity(n_grid.len());
    for (&n, &b) in n_grid.iter().zip(&boundaries) {
        let window = GibbsWindow {
            half_width: n,
            left: b,
            right: b,
        };
        let omega_star = (-gap * n).exp() / phi0[b];
        let mut point = BoundaryPoint {
            n,
            boundary: profile.at(n),
            value: None,
            discrepancy: None,
            kernel_deviation: None,
            omega_star,
            refusal: None,
        };
        match measure.kernel(&window, event) {
            Ok(v) => {
                let z = basis.kernel(2.0 * n, b, b);
                let target_scale = (2.0 * l0 * half_width).exp();
                let dev = probes
                    .iter()
                    .flat_map(|&x| probes.iter().map(move |&y| (x, y)))
                    .map(|(x, y)| {
                        let ratio = basis.kernel(n - half_width, b, x) * basis.kernel(n - half_width, y, b) / z;
                        (ratio / (target_scale * phi0[x] * phi0[y]) - 1.0).abs()
                    })
                    .fold(0.0, f64::max);
                point.value = Some(v);
                point.discrepancy = Some((v - stationary).abs());
                point.kernel_deviation = Some(dev);
            }
            Err(e @ Error::OutOfRange(_)) => point.refusal = Some(e.to_string()),
            Err(e) => return Err(e),
        }
        points.push(point);
    }
    let monotone = points.iter().all(|p| p.discrepancy.is_some())
        && points
            .windows(2)
            .all(|w| w[1].discrepancy.unwrap() < w[0].discrepancy.unwrap());
    let omega_star_decreasing_on_sample = points.windows(2).all(|w| w[1].omega_star < w[0].omega_star);
    Ok(BoundaryConvergence {
        half_width,
        profile,
        stationary,
        points,
        monotone,
        omega_star_decreasing_on_sample,
    })
}
