//! Retained eigenmodes as dense matrices; kernels and cylinder chains are
//! products in this basis.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::SpectralModel;

/// `ω(time) ∈ [lo, hi]^d`, applied at the grid points inside the box.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Constraint {
    pub time: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Finite cylinder event: a list of constraints at distinct times.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Cylinder {
    pub constraints: Vec<Constraint>,
}

impl Cylinder {
    pub fn new(mut constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            if !(c.time.is_finite() && c.lo <= c.hi) {
                return Err(Error::param("event", "constraint needs a finite time and lo <= hi"));
            }
        }
        constraints.sort_by(|a, b| a.time.total_cmp(&b.time));
        if constraints.windows(2).any(|w| w[0].time == w[1].time) {
            return Err(Error::param("event", "constraint times must be distinct"));
        }
        Ok(Self { constraints })
    }

    /// The whole path space.
    pub fn full() -> Self {
        Self::default()
    }

    /// Both sets of constraints together.
    pub fn and(&self, other: &Cylinder) -> Result<Self> {
        let mut c = self.constraints.clone();
        c.extend(other.constraints.iter().cloned());
        Self::new(c)
    }

    pub fn times_within(&self, lo: f64, hi: f64, closed: bool) -> bool {
        self.constraints.iter().all(|c| {
            if closed {
                c.time >= lo && c.time <= hi
            } else {
                c.time > lo && c.time < hi
            }
        })
    }
}

/// Eigenvalues and grid values of the retained modes.
#[derive(Debug, Clone)]
pub struct ModeBasis {
    /// `n × m`, column `k` is `φ_k`.
    pub phi: DMatrix<f64>,
    pub lambda: Vec<f64>,
    pub cell: f64,
    pub coords: Vec<Vec<f64>>,
}

impl ModeBasis {
    pub fn new(model: &SpectralModel) -> Self {
        let n = model.grid().total_points();
        let m = model.n_modes();
        let phi = DMatrix::from_fn(n, m, |i, k| model.eigenvector(k)[i]);
        Self {
            phi,
            lambda: model.eigenvalues().to_vec(),
            cell: model.grid().cell_volume(),
            coords: (0..n).map(|i| model.grid().point(i)).collect(),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.lambda.len()
    }

    pub fn n_points(&self) -> usize {
        self.phi.nrows()
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda[0]
    }

    /// `diag(e^{-λ_k t})`.
    pub fn decay(&self, t: f64) -> DVector<f64> {
        DVector::from_iterator(self.n_modes(), self.lambda.iter().map(|l| (-l * t).exp()))
    }

    pub fn inside(&self, c: &Constraint, i: usize) -> bool {
        self.coords[i].iter().all(|&x| x >= c.lo && x <= c.hi)
    }

    /// `Σ_{z ∈ A} φ_k(z) φ_l(z) h^d`.
    pub fn gram(&self, c: &Constraint) -> DMatrix<f64> {
        let m = self.n_modes();
        let mut g = DMatrix::zeros(m, m);
        for i in (0..self.n_points()).filter(|&i| self.inside(c, i)) {
            let row = self.phi.row(i);
            for k in 0..m {
                let a = row[k] * self.cell;
                for l in 0..m {
                    g[(k, l)] += a * row[l];
                }
            }
        }
        g
    }

    /// Chain operator `D(t₁-a) G₁ D(t₂-t₁) … G_k D(b-t_k)` from time `a` to
    /// time `b` through the constraints of `event`, in mode coordinates.
    pub fn chain(&self, a: f64, b: f64, event: &Cylinder) -> DMatrix<f64> {
        let m = self.n_modes();
        let mut out = DMatrix::<f64>::identity(m, m);
        let mut prev = a;
        for c in &event.constraints {
            scale_columns(&mut out, &self.decay(c.time - prev));
            out = &out * self.gram(c);
            prev = c.time;
        }
        scale_columns(&mut out, &self.decay(b - prev));
        out
    }

    /// Grid matrix `Φ M Φᵀ` restricted to the rows `xs` and columns `ys`.
    pub fn to_grid(&self, m: &DMatrix<f64>, xs: &[usize], ys: &[usize]) -> DMatrix<f64> {
        let left = DMatrix::from_fn(xs.len(), self.n_modes(), |i, k| self.phi[(xs[i], k)]);
        let right = DMatrix::from_fn(self.n_modes(), ys.len(), |k, j| self.phi[(ys[j], k)]);
        left * m * right
    }

    /// `x ↦ Σ_{k,l} φ_k(x) M_{kl} φ_l(y)` at single points.
    pub fn pair(&self, m: &DMatrix<f64>, x: usize, y: usize) -> f64 {
        let row = self.phi.row(x);
        let col = self.phi.row(y);
        (row * m * col.transpose())[(0, 0)]
    }

    /// Kernel `u(t, x, y)` from the retained modes.
    pub fn kernel(&self, t: f64, x: usize, y: usize) -> f64 {
        let (px, py) = (self.phi.row(x), self.phi.row(y));
        (0..self.n_modes())
            .map(|k| (-self.lambda[k] * t).exp() * (px[k] * py[k]))
            .sum()
    }

    /// Grid values `Σ_k c_k φ_k`.
    pub fn synthesize(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.phi * coeffs
    }
}

fn scale_columns(m: &mut DMatrix<f64>, d: &DVector<f64>) {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= d[j];
    }
}
