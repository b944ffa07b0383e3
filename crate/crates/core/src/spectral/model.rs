//! Ground-state model: the lowest eigenpairs of the discretised Hamiltonian
//! and the kernels built from them.

use serde::{Deserialize, Serialize};

use super::eigen::{lowest_eigenpairs, EigenConfig};
use super::grid::GridSpec;
use super::hamiltonian::{Hamiltonian, DEFAULT_V_CAP};
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::stable::StableParams;

/// Settings for [`ground_state_with`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpectralConfig {
    pub n_modes: usize,
    /// Extra subspace vectors; `None` picks a default from `n_modes`.
    pub guard: Option<usize>,
    /// Accepted residual `‖Hφ - λφ‖ / (1 + |λ|)`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Gap below which the ground state is declared degenerate.
    pub degeneracy_tol: f64,
    /// Intrinsic quantities are only evaluated where `φ₀ >= floor_ratio · max φ₀`.
    pub floor_ratio: f64,
    /// Boundary-to-peak ratio of `φ₀` above which the box is flagged as too small.
    pub boundary_ratio: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            n_modes: 16,
            guard: None,
            residual_tol: 1e-8,
            max_iterations: 5000,
            degeneracy_tol: 1e-9,
            floor_ratio: 1e-10,
            boundary_ratio: 1e-12,
        }
    }
}

impl SpectralConfig {
    pub fn with_modes(n_modes: usize) -> Self {
        Self {
            n_modes,
            ..Self::default()
        }
    }
}

/// Immutable set of eigenpairs. Eigenvectors are normalised in the grid inner
/// product `Σ f g h^d`.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    grid: GridSpec,
    params: StableParams,
    potential: PotentialSpec,
    cap: Option<f64>,
    potential_values: Vec<f64>,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
    free_diagonal_unit: Vec<f64>,
    floor: f64,
    iterations: usize,
    flags: Vec<String>,
}

/// Diagnostics of a ground-state decay fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Log-log slope of `φ₀` against `|x|`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// Slope of `log φ₀` against `log[1/(V(x)(1+|x|)^{d+α})]`; absent where `V <= 0`.
    pub profile_slope: Option<f64>,
    /// Window actually used after any shrinking.
    pub window: (f64, f64),
    pub n_points: usize,
    pub rms_residual: f64,
    /// Change of the local log-log slope across the window.
    pub curvature: f64,
    pub retries: usize,
}

/// Exponential decay of `sup |u(t) - e^{-λ₀t} φ₀ ⊗ φ₀|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionDecay {
    pub times: Vec<f64>,
    pub sup_values: Vec<f64>,
    pub rate: f64,
    pub rate_stderr: f64,
}

/// Computes `n_modes` eigenpairs with default settings.
pub fn ground_state(h: &Hamiltonian, v: &PotentialSpec, n_modes: usize) -> Result<SpectralModel> {
    ground_state_with(h, v, &SpectralConfig::with_modes(n_modes))
}

/// Computes the lowest eigenpairs of `h`, normalises `φ₀ > 0` and records
/// diagnostics.
pub fn ground_state_with(h: &Hamiltonian, v: &PotentialSpec, config: &SpectralConfig) -> Result<SpectralModel> {
    if config.n_modes < 2 {
        return Err(Error::param("n_modes", "at least two modes are needed for the gap"));
    }
    let mut ec = EigenConfig::new(config.n_modes);
    if let Some(g) = config.guard {
        ec.guard = g;
    }
    ec.tol = (config.residual_tol * 1e-3).max(1e-13);
    ec.max_iterations = config.max_iterations;
    let eig = match lowest_eigenpairs(h, &ec) {
        Ok(e) => e,
        Err(Error::NonConvergence { residual, .. }) if residual <= config.residual_tol => {
            // Rounding floor reached above the internal target but within contract.
            let mut relaxed = ec.clone();
            relaxed.tol = config.residual_tol;
            lowest_eigenpairs(h, &relaxed)?
        }
        Err(e) => return Err(e),
    };
    for (k, (&lam, &res)) in eig.values.iter().zip(&eig.residuals).enumerate() {
        if res > config.residual_tol * (1.0 + lam.abs()) {
            return Err(Error::Invariant(format!("mode {k}: residual {res:e} above tolerance")));
        }
    }
    if eig.values[1] - eig.values[0] < config.degeneracy_tol {
        return Err(Error::DegenerateGroundState {
            lambda0: eig.values[0],
            lambda1: eig.values[1],
        });
    }
    let grid = *h.grid();
    let scale = grid.cell_volume().sqrt().recip();
    let mut vectors: Vec<Vec<f64>> = eig
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| x * scale).collect())
        .collect();
    // Sign conventions: φ₀ positive in total, other modes positive at their largest entry.
    for (k, v) in vectors.iter_mut().enumerate() {
        let flip = if k == 0 {
            v.iter().sum::<f64>() < 0.0
        } else {
            let m = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            m < 0.0
        };
        if flip {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    let mut flags = Vec::new();
    let phi0 = &vectors[0];
    let peak = phi0.iter().copied().fold(0.0, f64::max);
    let nonpositive = phi0.iter().filter(|&&x| x <= 0.0).count();
    if nonpositive > 0 {
        flags.push(format!("phi0_nonpositive: {nonpositive} grid points"));
    }
    let boundary = boundary_max(&grid, phi0);
    if boundary > config.boundary_ratio * peak {
        flags.push(format!(
            "boundary_truncation: phi0 at the box edge is {:.3e} of its peak",
            boundary / peak
        ));
    }
    let gap = eig.values[1] - eig.values[0];
    let resolution = grid.base_frequency().powf(h.params().alpha());
    if gap < 4.0 * resolution {
        flags.push(format!(
            "no_ground_state: gap {gap:.3e} is within the box resolution {resolution:.3e}"
        ));
    }
    Ok(SpectralModel {
        grid,
        params: *h.params(),
        potential: v.clone(),
        cap: h.cap(),
        potential_values: h.potential_values().to_vec(),
        eigenvalues: eig.values,
        eigenvectors: vectors,
        residuals: eig.residuals,
        free_diagonal_unit: Vec::new(),
        floor: config.floor_ratio * peak,
        iterations: eig.iterations,
        flags,
    }
    .with_free_diagonal(h))
}

fn boundary_max(grid: &GridSpec, phi: &[f64]) -> f64 {
    let n = grid.n_points;
    match grid.dim {
        1 => phi[0].abs().max(phi[n - 1].abs()),
        _ => (0..n)
            .flat_map(|i| [phi[i], phi[(n - 1) * n + i], phi[i * n], phi[i * n + n - 1]])
            .fold(0.0, |a, b| a.max(b.abs())),
    }
}

/// Grid of times on which the free diagonal is tabulated for truncation bounds.
const FREE_DIAGONAL_TIMES: [f64; 12] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0];

impl SpectralModel {
    fn with_free_diagonal(mut self, h: &Hamiltonian) -> Self {
        self.free_diagonal_unit = FREE_DIAGONAL_TIMES.iter().map(|&t| h.free_diagonal(t)).collect();
        self
    }

    /// Builds the Hamiltonian and solves it in one step.
    pub fn build(grid: GridSpec, params: StableParams, v: &PotentialSpec, config: &SpectralConfig) -> Result<Self> {
        let cap = if v.singularities().is_empty() { None } else { Some(DEFAULT_V_CAP) };
        let h = Hamiltonian::new(grid, params, v, cap)?;
        ground_state_with(&h, v, config)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// Grid values of the (capped) potential.
    pub fn potential_values(&self) -> &[f64] {
        &self.potential_values
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.eigenvectors[k]
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Spectral gap `λ₁ - λ₀`.
    pub fn gap(&self) -> f64 {
        self.eigenvalues[1] - self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Diagnostic flags raised while building the model.
    pub fn flags(&self) -> &[String] {
        &self.flags
    }

    /// Threshold below which `φ₀` is treated as unresolved.
    pub fn phi0_floor(&self) -> f64 {
        self.floor
    }

    /// Whether `φ₀` at grid index `i` is above the floor.
    pub fn is_resolved(&self, i: usize) -> bool {
        self.eigenvectors[0][i] >= self.floor
    }

    /// Smallest time from which the retained modes dominate: the first
    /// neglected contribution is below `10⁻⁶` of the leading one.
    pub fn t_min(&self) -> f64 {
        let last = *self.eigenvalues.last().unwrap_or(&0.0);
        1e6f64.ln() / (last - self.eigenvalues[0]).max(f64::MIN_POSITIVE)
    }

    /// Free diagonal kernel at time `t`, interpolated in log-log from the table
    /// and extended by the small- and large-time asymptotics.
    fn free_diagonal(&self, t: f64) -> f64 {
        let ts = &FREE_DIAGONAL_TIMES;
        let vs = &self.free_diagonal_unit;
        if t <= ts[0] {
            return vs[0] * (ts[0] / t).powf(self.grid.dim as f64 / self.params.alpha());
        }
        if t >= ts[ts.len() - 1] {
            return vs[vs.len() - 1];
        }
        let k = ts.iter().position(|&s| s >= t).unwrap_or(ts.len() - 1).max(1);
        let w = (t / ts[k - 1]).ln() / (ts[k] / ts[k - 1]).ln();
        // Non-increasing in t, so the left value is a safe upper bound.
        (vs[k - 1].ln() * (1.0 - w) + vs[k].ln() * w).exp().max(vs[k])
    }

    /// Upper bound on the modes `k >= m` of `u(t, x, y)`:
    /// `e^{-λ_m t/2} e^{c t/2} p_free(t/2)` with `c = max V₋`.
    pub fn truncation_bound(&self, t: f64, m: usize) -> f64 {
        let lam = if m < self.n_modes() {
            self.eigenvalues[m]
        } else {
            *self.eigenvalues.last().unwrap_or(&0.0)
        };
        let neg = self.potential_values.iter().fold(0.0f64, |a, &v| a.max(-v));
        let rate = lam.max(-neg) + neg;
        (-(rate) * t / 2.0).exp() * self.free_diagonal(t / 2.0)
    }

    /// `Σ_{k<m} e^{-λ_k t} φ_k(x) φ_k(y)` at grid indices `x`, `y`.
    pub fn semigroup_kernel(&self, t: f64, x: usize, y: usize, m: usize) -> Result<f64> {
        self.check_kernel_args(t, x, y, m)?;
        Ok(self.kernel_unchecked(t, x, y, m))
    }

    /// [`Self::semigroup_kernel`] that refuses when the truncation bound
    /// exceeds `tol`.
    pub fn semigroup_kernel_within(&self, t: f64, x: usize, y: usize, m: usize, tol: f64) -> Result<f64> {
        self.check_kernel_args(t, x, y, m)?;
        let bound = self.truncation_bound(t, m);
        if bound > tol {
            return Err(Error::OutOfRange(format!(
                "mode truncation bound {bound:.3e} exceeds {tol:.3e} at t = {t}"
            )));
        }
        Ok(self.kernel_unchecked(t, x, y, m))
    }

    fn check_kernel_args(&self, t: f64, x: usize, y: usize, m: usize) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("t", "must be positive"));
        }
        if m == 0 || m > self.n_modes() {
            return Err(Error::param("m", format!("must lie in 1..={}", self.n_modes())));
        }
        let n = self.grid.total_points();
        if x >= n || y >= n {
            return Err(Error::OutOfRange(format!("grid index beyond {n}")));
        }
        Ok(())
    }

    fn kernel_unchecked(&self, t: f64, x: usize, y: usize, m: usize) -> f64 {
        (0..m)
            .map(|k| (-self.eigenvalues[k] * t).exp() * (self.eigenvectors[k][x] * self.eigenvectors[k][y]))
            .sum()
    }

    /// Intrinsic kernel `e^{λ₀t} u(t,x,y) / (φ₀(x) φ₀(y))` from all retained modes.
    pub fn intrinsic_kernel(&self, t: f64, x: usize, y: usize) -> Result<f64> {
        self.check_kernel_args(t, x, y, self.n_modes())?;
        if t < self.t_min() {
            return Err(Error::Precondition(format!(
                "t = {t} is below the resolved time {:.4}",
                self.t_min()
            )));
        }
        let phi = &self.eigenvectors[0];
        for &i in &[x, y] {
            if phi[i] < self.floor {
                return Err(Error::OutOfRange(format!(
                    "ground state at grid index {i} is below the floor {:.3e}",
                    self.floor
                )));
            }
        }
        let l0 = self.eigenvalues[0];
        let s: f64 = (0..self.n_modes())
            .map(|k| {
                (-(self.eigenvalues[k] - l0) * t).exp() * (self.eigenvectors[k][x] * self.eigenvectors[k][y])
            })
            .sum();
        Ok(s / (phi[x] * phi[y]))
    }

    /// Grid indices where `φ₀` is above the floor.
    pub fn resolved_indices(&self) -> Vec<usize> {
        (0..self.grid.total_points()).filter(|&i| self.is_resolved(i)).collect()
    }

    /// `Σ_y ũ(t,x,y) φ₀(y)² h^d` over resolved `y`.
    pub fn intrinsic_row_sum(&self, t: f64, x: usize) -> Result<f64> {
        let phi = &self.eigenvectors[0];
        let h = self.grid.cell_volume();
        let mut s = 0.0;
        for y in self.resolved_indices() {
            s += self.intrinsic_kernel(t, x, y)? * phi[y] * phi[y] * h;
        }
        Ok(s)
    }

    /// Evaluation points used for suprema over the grid: an even stride of
    /// at most `cap` points per axis plus the extremal points of each mode.
    pub fn sample_indices(&self, per_axis: usize, modes: usize) -> Vec<usize> {
        let n = self.grid.n_points;
        let stride = n.div_ceil(per_axis.max(1)).max(1);
        let mut idx: Vec<usize> = match self.grid.dim {
            1 => (0..n).step_by(stride).collect(),
            _ => (0..n)
                .step_by(stride)
                .flat_map(|i| (0..n).step_by(stride).map(move |j| i * n + j))
                .collect(),
        };
        for k in 0..modes.min(self.n_modes()) {
            let v = &self.eigenvectors[k];
            let (imax, imin) = (argmax(v, |x| x), argmax(v, |x| -x));
            idx.extend([imax, imin]);
        }
        idx.sort_unstable();
        idx.dedup();
        idx
    }

    /// `sup_{x,y} |u_m(t,x,y) - e^{-λ₀t} φ₀(x) φ₀(y)|` over `points`.
    pub fn projection_gap(&self, t: f64, m: usize, points: &[usize]) -> f64 {
        let coeffs: Vec<Vec<f64>> = (1..m)
            .map(|k| points.iter().map(|&i| self.eigenvectors[k][i]).collect())
            .collect();
        let weights: Vec<f64> = (1..m).map(|k| (-self.eigenvalues[k] * t).exp()).collect();
        let mut sup = 0.0f64;
        for a in 0..points.len() {
            for b in a..points.len() {
                let s: f64 = coeffs.iter().zip(&weights).map(|(c, w)| w * c[a] * c[b]).sum();
                sup = sup.max(s.abs());
            }
        }
        sup
    }

    /// Fits `log s(t) ≈ c - r t` for the projection gap on `times`.
    pub fn projection_decay(&self, times: &[f64], m: usize) -> Result<ProjectionDecay> {
        if times.len() < 2 || times.iter().any(|&t| !(t > 2.0 && t.is_finite())) {
            return Err(Error::param("t_grid", "need at least two times, all above 2"));
        }
        if m < 2 || m > self.n_modes() {
            return Err(Error::param("m", format!("must lie in 2..={}", self.n_modes())));
        }
        let points = self.sample_indices(512, m);
        let sup_values: Vec<f64> = times.iter().map(|&t| self.projection_gap(t, m, &points)).collect();
        if let Some(i) = sup_values.iter().position(|&s| !(s > f64::MIN_POSITIVE * 1e10)) {
            return Err(Error::Fit(format!("projection gap underflows at t = {}", times[i])));
        }
        let logs: Vec<f64> = sup_values.iter().map(|s| s.ln()).collect();
        let fit = crate::numerics::linear_fit(times, &logs)?;
        Ok(ProjectionDecay {
            times: times.to_vec(),
            sup_values,
            rate: -fit.slope,
            rate_stderr: fit.slope_stderr,
        })
    }

    /// Regresses `log φ₀` over radii in `window` along the positive first axis.
    /// The window shrinks from the outer end up to three times when the local
    /// slope drifts by more than `max_curvature` across it.
    pub fn decay_fit(&self, window: (f64, f64), max_curvature: f64) -> Result<DecayFit> {
        let (lo, hi) = window;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::param("window", "need 0 < lo < hi"));
        }
        if hi >= self.grid.half_width {
            return Err(Error::Precondition(format!(
                "window end {hi} is outside the box of half-width {}",
                self.grid.half_width
            )));
        }
        match self.potential.negative_support() {
            crate::potentials::NegativeSupport::Empty => {}
            crate::potentials::NegativeSupport::Radius(r) if r < lo => {}
            other => {
                return Err(Error::Precondition(format!(
                    "window must lie outside the negative part of V ({other:?})"
                )))
            }
        }
        let axis = self.grid.positive_axis();
        let phi = &self.eigenvectors[0];
        let mut hi_now = hi;
        for retries in 0..4 {
            let pts: Vec<usize> = axis
                .iter()
                .copied()
                .filter(|&i| {
                    let r = self.grid.radius(i);
                    r >= lo && r <= hi_now
                })
                .collect();
            if pts.len() < 5 {
                return Err(Error::Fit(format!("only {} grid points in the window", pts.len())));
            }
            if let Some(&i) = pts.iter().find(|&&i| phi[i] < self.floor) {
                return Err(Error::Precondition(format!(
                    "ground state below the floor at radius {}",
                    self.grid.radius(i)
                )));
            }
            let lr: Vec<f64> = pts.iter().map(|&i| self.grid.radius(i).ln()).collect();
            let lp: Vec<f64> = pts.iter().map(|&i| phi[i].ln()).collect();
            let fit = crate::numerics::linear_fit(&lr, &lp)?;
            let (_, _, c2) = crate::numerics::quadratic_fit(&lr, &lp)?;
            let curvature = (2.0 * c2 * (lr[lr.len() - 1] - lr[0])).abs();
            if curvature > max_curvature && retries < 3 {
                hi_now = lo + 0.75 * (hi_now - lo);
                continue;
            }
            if curvature > max_curvature {
                return Err(Error::Fit(format!(
                    "log-log profile still curved ({curvature:.3}) after shrinking to [{lo}, {hi_now}]"
                )));
            }
            let d = self.grid.dim as f64;
            let a = self.params.alpha();
            let profile_slope = if pts.iter().all(|&i| self.potential_values[i] > 0.0) {
                let xs: Vec<f64> = pts
                    .iter()
                    .map(|&i| {
                        let r = self.grid.radius(i);
                        -(self.potential_values[i].ln() + (d + a) * (1.0 + r).ln())
                    })
                    .collect();
                Some(crate::numerics::linear_fit(&xs, &lp)?.slope)
            } else {
                None
            };
            return Ok(DecayFit {
                exponent: fit.slope,
                exponent_stderr: fit.slope_stderr,
                profile_slope,
                window: (lo, hi_now),
                n_points: pts.len(),
                rms_residual: fit.rms_residual,
                curvature,
                retries,
            });
        }
        unreachable!("the loop returns on its last pass")
    }

    /// Change of `λ₀` when the singularity cap is raised tenfold.
    pub fn cap_sensitivity(&self, config: &SpectralConfig) -> Result<f64> {
        let Some(cap) = self.cap else {
            return Ok(0.0);
        };
        let h = Hamiltonian::new(self.grid, self.params, &self.potential, Some(cap * 10.0))?;
        let other = ground_state_with(&h, &self.potential, config)?;
        Ok((other.lambda0() - self.lambda0()).abs())
    }

    /// Rebuilds the operator this model was computed from.
    pub fn hamiltonian(&self) -> Hamiltonian {
        Hamiltonian::from_values(self.grid, self.params, self.potential_values.clone(), self.cap)
    }
}

fn argmax(v: &[f64], key: impl Fn(f64) -> f64) -> usize {
    let mut best = 0;
    for i in 1..v.len() {
        if key(v[i]) > key(v[best]) {
            best = i;
        }
    }
    best
}

#[derive(Serialize, Deserialize)]
struct Header {
    grid: GridSpec,
    params: StableParams,
    potential: PotentialSpec,
    cap: Option<f64>,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    floor: f64,
    iterations: usize,
    flags: Vec<String>,
}

const MAGIC: &[u8; 4] = b"FPSM";
const VERSION: u32 = 1;

impl SpectralModel {
    /// Writes the model as magic, version, JSON header and raw eigenvectors.
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let header = serde_json::to_vec(&Header {
            grid: self.grid,
            params: self.params,
            potential: self.potential.clone(),
            cap: self.cap,
            eigenvalues: self.eigenvalues.clone(),
            residuals: self.residuals.clone(),
            floor: self.floor,
            iterations: self.iterations,
            flags: self.flags.clone(),
        })?;
        let mut buf = Vec::with_capacity(16 + header.len() + 8 * self.n_modes() * self.grid.total_points());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
        buf.extend_from_slice(&header);
        for v in &self.eigenvectors {
            for x in v {
                buf.extend_from_slice(&x.to_le_bytes());
            }
        }
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let fail = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        if bytes.len() < 16 || &bytes[..4] != MAGIC {
            return Err(fail("not a spectral model file"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(fail(&format!("unsupported version {version}")));
        }
        let hlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let body = bytes.get(16..16 + hlen).ok_or_else(|| fail("truncated header"))?;
        let header: Header = serde_json::from_slice(body).map_err(|e| fail(&e.to_string()))?;
        header.grid.validate(usize::MAX).map_err(|e| fail(&e.to_string()))?;
        let n = header.grid.total_points();
        let m = header.eigenvalues.len();
        let data = &bytes[16 + hlen..];
        if data.len() != 8 * n * m || m < 2 || header.residuals.len() != m {
            return Err(fail("eigenvector block has the wrong size"));
        }
        let eigenvectors = data
            .chunks_exact(8 * n)
            .map(|c| c.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect())
            .collect();
        let h = Hamiltonian::new(header.grid, header.params, &header.potential, header.cap)
            .map_err(|e| fail(&e.to_string()))?;
        Ok(SpectralModel {
            grid: header.grid,
            params: header.params,
            potential: header.potential,
            cap: header.cap,
            potential_values: h.potential_values().to_vec(),
            eigenvalues: header.eigenvalues,
            eigenvectors,
            residuals: header.residuals,
            free_diagonal_unit: Vec::new(),
            floor: header.floor,
            iterations: header.iterations,
            flags: header.flags,
        }
        .with_free_diagonal(&h))
    }
}
