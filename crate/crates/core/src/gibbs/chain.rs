//! The ground-state transformed process on the resolved grid as a finite
//! Markov chain with step `t_unit`.

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::{Chunking, Rng};
use crate::spectral::SpectralModel;
use crate::stable::PathSkeleton;

pub const ROW_SUM_TOL: f64 = 1e-6;
pub const STATIONARITY_TOL: f64 = 1e-6;
pub const REVERSIBILITY_TOL: f64 = 1e-8;
/// Largest number of chain states (the transition matrix is dense).
pub const MAX_CHAIN_STATES: usize = 4096;

/// Transition matrix `P(x,y) = ũ(t_unit,x,y) φ₀(y)² h^d` over the grid points
/// where `φ₀` is resolved.
#[derive(Debug, Clone)]
pub struct PPhi1Chain {
    t_unit: f64,
    dim: usize,
    /// Grid index of each state.
    states: Vec<usize>,
    coords: Vec<Vec<f64>>,
    phi0: Vec<f64>,
    rho: Vec<f64>,
    rho_cdf: Vec<f64>,
    matrix: DMatrix<f64>,
    /// Largest `|Σ_y P(x,y) − 1|` before renormalization.
    pub row_defect: f64,
    /// Negative entries set to zero before renormalization.
    pub clipped: usize,
    pub stationarity_defect: f64,
    pub reversibility_defect: f64,
}

/// Initial point of a sampled path.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Point(Vec<f64>),
    Stationary,
}

/// Builds the chain and validates row sums, stationarity of `φ₀²` and
/// reversibility.
pub fn build_chain(model: &SpectralModel, t_unit: f64) -> Result<PPhi1Chain> {
    if !(t_unit > 0.0 && t_unit.is_finite()) {
        return Err(Error::param("t_unit", "must be positive"));
    }
    if t_unit < model.t_min() {
        return Err(Error::Precondition(format!(
            "t_unit = {t_unit} is below the resolved time {:.4}",
            model.t_min()
        )));
    }
    let states = model.resolved_indices();
    let n = states.len();
    if n > MAX_CHAIN_STATES {
        return Err(Error::Precondition(format!(
            "{n} resolved states exceed the dense limit {MAX_CHAIN_STATES}"
        )));
    }
    let grid = model.grid();
    let h = grid.cell_volume();
    let m = model.n_modes();
    let l0 = model.lambda0();
    let phi = DMatrix::from_fn(n, m, |i, k| model.eigenvector(k)[states[i]]);
    let weights: Vec<f64> = model.eigenvalues().iter().map(|l| (-(l - l0) * t_unit).exp()).collect();
    let mut scaled = phi.clone();
    for (k, mut col) in scaled.column_iter_mut().enumerate() {
        col *= weights[k];
    }
    // e^{λ₀t} u(t,x,y)
    let mut matrix = &scaled * phi.transpose();
    let phi0: Vec<f64> = states.iter().map(|&i| model.ground_state()[i]).collect();

    let mut clipped = 0;
    let mut row_defect = 0.0f64;
    let mut worst_row = 0;
    for x in 0..n {
        let mut row = matrix.row_mut(x);
        let mut sum = 0.0;
        for y in 0..n {
            let p = row[y] * phi0[y] / phi0[x] * h;
            row[y] = p;
            sum += p;
        }
        if (sum - 1.0).abs() > row_defect {
            row_defect = (sum - 1.0).abs();
            worst_row = x;
        }
        for y in 0..n {
            if row[y] < 0.0 {
                row[y] = 0.0;
                clipped += 1;
            }
        }
        let total: f64 = row.iter().sum();
        row /= total;
    }
    if row_defect > ROW_SUM_TOL {
        return Err(Error::Invariant(format!(
            "row sum off by {row_defect:.3e} at {:?}",
            grid.point(states[worst_row])
        )));
    }

    let mass: f64 = phi0.iter().map(|p| p * p * h).sum();
    let rho: Vec<f64> = phi0.iter().map(|p| p * p * h / mass).collect();
    let flow = DMatrix::from_row_slice(1, n, &rho) * &matrix;
    let stationarity_defect: f64 = (0..n).map(|y| (flow[(0, y)] - rho[y]).abs()).sum();
    if stationarity_defect > STATIONARITY_TOL {
        return Err(Error::Invariant(format!(
            "stationary law moved by {stationarity_defect:.3e} in total variation"
        )));
    }
    let mut reversibility_defect = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            let d = (rho[x] * matrix[(x, y)] - rho[y] * matrix[(y, x)]).abs();
            reversibility_defect = reversibility_defect.max(d);
        }
    }
    if reversibility_defect > REVERSIBILITY_TOL {
        return Err(Error::Invariant(format!(
            "detailed balance violated by {reversibility_defect:.3e}"
        )));
    }
    let mut acc = 0.0;
    let rho_cdf = rho
        .iter()
        .map(|r| {
            acc += r;
            acc
        })
        .collect();
    Ok(PPhi1Chain {
        t_unit,
        dim: grid.dim,
        coords: states.iter().map(|&i| grid.point(i)).collect(),
        states,
        phi0,
        rho,
        rho_cdf,
        matrix,
        row_defect,
        clipped,
        stationarity_defect,
        reversibility_defect,
    })
}

/// Draws an index from cumulative weights `cdf` ending near 1.
fn draw_cdf(cdf: &[f64], rng: &mut Rng) -> usize {
    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

impl PPhi1Chain {
    pub fn t_unit(&self) -> f64 {
        self.t_unit
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Grid index of each state.
    pub fn grid_indices(&self) -> &[usize] {
        &self.states
    }

    pub fn coord(&self, state: usize) -> &[f64] {
        &self.coords[state]
    }

    /// `φ₀` at each state.
    pub fn ground_state(&self) -> &[f64] {
        &self.phi0
    }

    /// Stationary law `φ₀² h^d`, normalized over the states.
    pub fn stationary(&self) -> &[f64] {
        &self.rho
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// State of the grid point nearest to `x`.
    pub fn state_of(&self, x: &[f64]) -> Result<usize> {
        let d2 = |c: &[f64]| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        if x.len() != self.dim {
            return Err(Error::param("x", "dimension mismatch with the chain"));
        }
        let best = (0..self.n_states())
            .min_by(|&a, &b| d2(&self.coords[a]).total_cmp(&d2(&self.coords[b])))
            .ok_or_else(|| Error::Precondition("chain has no states".into()))?;
        let h = self.coords.get(1).map_or(f64::INFINITY, |c| {
            c.iter().zip(&self.coords[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        });
        if d2(&self.coords[best]).sqrt() > h * (self.dim as f64).sqrt() {
            return Err(Error::OutOfRange(format!("{x:?} is outside the resolved region")));
        }
        Ok(best)
    }

    fn step(&self, from: usize, rng: &mut Rng) -> usize {
        let row = self.matrix.row(from);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (y, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return y;
            }
        }
        (0..self.n_states()).rev().find(|&y| row[y] > 0.0).unwrap_or(from)
    }

    /// State sequence at times `-back..=forward` in units of `t_unit`; the two
    /// halves evolve independently from the common start.
    pub fn sample_states(&self, back: usize, forward: usize, start: &Start, rng: &mut Rng) -> Result<Vec<usize>> {
        let s0 = match start {
            Start::Point(x) => self.state_of(x)?,
            Start::Stationary => draw_cdf(&self.rho_cdf, rng),
        };
        let mut out = vec![s0; back + forward + 1];
        for i in (0..back).rev() {
            out[i] = self.step(out[i + 1], rng);
        }
        for i in back + 1..out.len() {
            out[i] = self.step(out[i - 1], rng);
        }
        Ok(out)
    }

    /// [`Self::sample_states`] as a path skeleton.
    pub fn sample_path(&self, back: usize, forward: usize, start: &Start, rng: &mut Rng) -> Result<PathSkeleton> {
        let states = self.sample_states(back, forward, start, rng)?;
        let times = (0..states.len())
            .map(|i| (i as f64 - back as f64) * self.t_unit)
            .collect();
        let positions = states.iter().flat_map(|&s| self.coords[s].iter().copied()).collect();
        PathSkeleton::new(times, positions, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalConfig {
    pub n_paths: usize,
    /// Paths span integer times `-n_max..=n_max`.
    pub n_max: usize,
    /// The statistic and the growth check use `|N| >= n_start`.
    pub n_start: usize,
    pub threshold_factor: f64,
    pub seed: u64,
    pub pilot_seed: u64,
    pub chunk_size: usize,
    /// `(q, θ)`: growth envelope `c |N|^{(1+θ)/q}`; `c` is twice the pilot maximum.
    pub growth: Option<(f64, f64)>,
}

impl Default for TypicalConfig {
    fn default() -> Self {
        Self {
            n_paths: 200,
            n_max: 50,
            n_start: 10,
            threshold_factor: 10.0,
            seed: 0,
            pilot_seed: 1,
            chunk_size: 64,
            growth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalReport {
    /// Fraction of paths whose statistic exceeds the threshold.
    pub violation_fraction: f64,
    pub threshold: f64,
    pub pilot_median: f64,
    /// `max_{n_start ≤ |N| ≤ n_max} a_{|N|} / φ₀(ω(N))` per path.
    pub statistics: Vec<f64>,
    /// Log-log slope of `a_n` on the upper half of the prefix.
    pub tail_exponent: f64,
    pub growth_constant: Option<f64>,
    pub growth_exponent: Option<f64>,
    /// Paths crossing the growth envelope somewhere beyond `n_start`.
    pub growth_violations: usize,
}

/// Largest summability exponent accepted for the tail of `a_n`.
pub const SUMMABLE_EXPONENT: f64 = -1.05;

struct PathStats {
    statistic: f64,
    growth_ratio: f64,
}

fn run_paths(
    chain: &PPhi1Chain,
    seq: &[f64],
    cfg: &TypicalConfig,
    seed: u64,
    growth_exp: Option<f64>,
) -> Result<Vec<PathStats>> {
    let chunking = Chunking {
        seed,
        chunk_size: cfg.chunk_size,
    };
    let n_max = cfg.n_max;
    let parts = chunking.map(cfg.n_paths, |rng, count, _| -> Result<Vec<PathStats>> {
        (0..count)
            .map(|_| {
                let states = chain.sample_states(n_max, n_max, &Start::Stationary, rng)?;
                let mut statistic = 0.0f64;
                let mut growth_ratio = 0.0f64;
                for (i, &s) in states.iter().enumerate() {
                    let n = (i as isize - n_max as isize).unsigned_abs();
                    if n < cfg.n_start || n == 0 {
                        continue;
                    }
                    statistic = statistic.max(seq[n - 1] / chain.phi0[s]);
                    if let Some(g) = growth_exp {
                        let r = crate::stable::norm(&chain.coords[s]) / (n as f64).powf(g);
                        growth_ratio = growth_ratio.max(r);
                    }
                }
                Ok(PathStats {
                    statistic,
                    growth_ratio,
                })
            })
            .collect()
    });
    let mut out = Vec::with_capacity(cfg.n_paths);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fraction of stationary paths on which `a_{|N|}/φ₀(ω(N))` exceeds
/// `threshold_factor` times the median of an independent pilot run.
/// `seq[n-1] = a_n` for `n = 1..=n_max`.
pub fn typical_path_check(chain: &PPhi1Chain, seq: &[f64], cfg: &TypicalConfig) -> Result<TypicalReport> {
    if cfg.n_paths == 0 || cfg.n_max < 4 || cfg.n_start > cfg.n_max {
        return Err(Error::param("typical paths", "need n_paths > 0 and 4 <= n_max >= n_start"));
    }
    if seq.len() < cfg.n_max || seq[..cfg.n_max].iter().any(|a| !(*a > 0.0)) {
        return Err(Error::param("sequence", "needs n_max positive terms"));
    }
    let lo = cfg.n_max / 2;
    let xs: Vec<f64> = (lo..=cfg.n_max).map(|n| (n as f64).ln()).collect();
    let ys: Vec<f64> = (lo..=cfg.n_max).map(|n| seq[n - 1].ln()).collect();
    let tail_exponent = crate::numerics::linear_fit(&xs, &ys)?.slope;
    if !(tail_exponent < SUMMABLE_EXPONENT) {
        return Err(Error::Precondition(format!(
            "sequence tail decays like n^{tail_exponent:.3}; summability needs an exponent below {SUMMABLE_EXPONENT}"
        )));
    }
    let growth_exp = cfg.growth.map(|(q, theta)| (1.0 + theta) / q);
    let pilot = run_paths(chain, seq, cfg, cfg.pilot_seed, growth_exp)?;
    let main = run_paths(chain, seq, cfg, cfg.seed, growth_exp)?;

    let pilot_median = median(&pilot.iter().map(|p| p.statistic).collect::<Vec<_>>());
    let threshold = cfg.threshold_factor * pilot_median;
    let statistics: Vec<f64> = main.iter().map(|p| p.statistic).collect();
    let violation_fraction = statistics.iter().filter(|&&s| s > threshold).count() as f64 / statistics.len() as f64;
    let growth_constant = growth_exp.map(|_| 2.0 * pilot.iter().map(|p| p.growth_ratio).fold(0.0, f64::max));
    let growth_violations = match growth_constant {
        Some(c) => main.iter().filter(|p| p.growth_ratio > c).count(),
        None => 0,
    };
    Ok(TypicalReport {
        violation_fraction,
        threshold,
        pilot_median,
        statistics,
        tail_exponent,
        growth_constant,
        growth_exponent: growth_exp,
        growth_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseMoment {
    pub sup: f64,
    pub argmax: Vec<f64>,
    /// Requested points outside the resolved region.
    pub excluded: usize,
}

/// `max_x Σ_y P(x,y) / φ₀(y)` over the chain states nearest to `points`
/// (all states when `points` is empty).
pub fn inverse_gs_moment(chain: &PPhi1Chain, points: &[Vec<f64>]) -> Result<InverseMoment> {
    let mut excluded = 0;
    let rows: Vec<usize> = if points.is_empty() {
        (0..chain.n_states()).collect()
    } else {
        points
            .iter()
            .filter_map(|p| match chain.state_of(p) {
                Ok(s) => Some(Ok(s)),
                Err(Error::OutOfRange(_)) => {
                    excluded += 1;
                    None
                }
                Err(e) => Some(Err(e)),
            })
            .collect::<Result<_>>()?
    };
    let mut sup = f64::NEG_INFINITY;
    let mut arg = None;
    for x in rows {
        let v: f64 = chain
            .matrix
            .row(x)
            .iter()
            .zip(&chain.phi0)
            .map(|(p, f)| p / f)
            .sum();
        if v > sup {
            sup = v;
            arg = Some(x);
        }
    }
    let arg = arg.ok_or_else(|| Error::OutOfRange("no requested point is resolved".into()))?;
    Ok(InverseMoment {
        sup,
        argmax: chain.coords[arg].clone(),
        excluded,
    })
}
