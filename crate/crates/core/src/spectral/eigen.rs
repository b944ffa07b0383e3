//! Lowest eigenpairs by Chebyshev-filtered subspace iteration with
//! Rayleigh-Ritz projection.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};

use super::hamiltonian::Hamiltonian;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EigenConfig {
    /// Number of wanted eigenpairs.
    pub n_modes: usize,
    /// Extra block vectors that shield the wanted ones from slow convergence.
    pub guard: usize,
    /// Target residual `‖Hv - λv‖ <= tol (1 + |λ|)` for unit vectors.
    pub tol: f64,
    pub max_iterations: usize,
}

impl EigenConfig {
    pub fn new(n_modes: usize) -> Self {
        Self {
            n_modes,
            guard: (n_modes / 2).max(8),
            tol: 1e-11,
            max_iterations: 5000,
        }
    }
}

/// Ascending eigenvalues with unit-norm (Euclidean) eigenvectors.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (u, v) in y.iter_mut().zip(x) {
        *u += a * v;
    }
}

/// Modified Gram-Schmidt, applied twice. Columns that collapse are replaced
/// by fresh random directions.
fn orthonormalize(block: &mut [Vec<f64>], rng: &mut rand_chacha::ChaCha8Rng) {
    for i in 0..block.len() {
        for _attempt in 0..3 {
            let norm0 = dot(&block[i], &block[i]).sqrt();
            for _pass in 0..2 {
                for j in 0..i {
                    let (head, tail) = block.split_at_mut(i);
                    let c = dot(&head[j], &tail[0]);
                    axpy(&mut tail[0], -c, &head[j]);
                }
            }
            let nrm = dot(&block[i], &block[i]).sqrt();
            if nrm > 1e-10 * norm0 && nrm > 0.0 {
                block[i].iter_mut().for_each(|v| *v /= nrm);
                break;
            }
            for v in block[i].iter_mut() {
                *v = StandardNormal.sample(rng);
            }
        }
    }
}

/// Rayleigh-Ritz on an orthonormal block: returns Ritz values, vectors and
/// their images under `H`.
fn rayleigh_ritz(h: &Hamiltonian, block: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let p = block.len();
    let hb = h.apply_block(block);
    let mut g = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v = 0.5 * (dot(&block[i], &hb[j]) + dot(&block[j], &hb[i]));
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = block[0].len();
    let mut vecs = Vec::with_capacity(p);
    let mut hvecs = Vec::with_capacity(p);
    let mut vals = Vec::with_capacity(p);
    for &c in &order {
        let mut v = vec![0.0; n];
        let mut hv = vec![0.0; n];
        for i in 0..p {
            let q = eig.eigenvectors[(i, c)];
            axpy(&mut v, q, &block[i]);
            axpy(&mut hv, q, &hb[i]);
        }
        vals.push(eig.eigenvalues[c]);
        vecs.push(v);
        hvecs.push(hv);
    }
    (vals, vecs, hvecs)
}

/// Degree-`m` scaled Chebyshev filter damping `[a, b]` and amplifying below.
fn chebyshev_filter(h: &Hamiltonian, block: &[Vec<f64>], m: usize, a: f64, b: f64, low: f64) -> Vec<Vec<f64>> {
    let e = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let sigma1 = e / (low - c);
    let mut x: Vec<Vec<f64>> = block.to_vec();
    let hx = h.apply_block(&x);
    let mut y: Vec<Vec<f64>> = hx
        .iter()
        .zip(&x)
        .map(|(hv, v)| hv.iter().zip(v).map(|(p, q)| (p - c * q) * sigma1 / e).collect())
        .collect();
    let mut sigma = sigma1;
    for _ in 2..=m {
        let sigma2 = 1.0 / (2.0 / sigma1 - sigma);
        let hy = h.apply_block(&y);
        let ynew: Vec<Vec<f64>> = hy
            .iter()
            .zip(&y)
            .zip(&x)
            .map(|((hv, yv), xv)| {
                hv.iter()
                    .zip(yv)
                    .zip(xv)
                    .map(|((p, q), r)| 2.0 * sigma2 / e * (p - c * q) - sigma * sigma2 * r)
                    .collect()
            })
            .collect();
        x = std::mem::replace(&mut y, ynew);
        sigma = sigma2;
    }
    y
}

/// Computes the `n_modes` lowest eigenpairs of `h`.
pub fn lowest_eigenpairs(h: &Hamiltonian, config: &EigenConfig) -> Result<EigenResult> {
    let n = h.dim();
    let p = (config.n_modes + config.guard).min(n);
    if config.n_modes == 0 || config.n_modes > n {
        return Err(Error::param("n_modes", format!("must lie in 1..={n}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x005e_ed0f_ba5e);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    orthonormalize(&mut block, &mut rng);
    let upper = h.spectral_upper_bound() * (1.0 + 1e-12) + 1e-12;
    let mut worst = f64::INFINITY;
    let mut best_worst = f64::INFINITY;
    let mut stalled = 0usize;
    for iter in 0..config.max_iterations {
        let (vals, vecs, hvecs) = rayleigh_ritz(h, &block);
        let residuals: Vec<f64> = (0..p)
            .map(|k| {
                let r: f64 = hvecs[k]
                    .iter()
                    .zip(&vecs[k])
                    .map(|(a, b)| (a - vals[k] * b).powi(2))
                    .sum();
                r.sqrt()
            })
            .collect();
        worst = (0..config.n_modes)
            .map(|k| residuals[k] / (1.0 + vals[k].abs()))
            .fold(0.0, f64::max);
        if worst <= config.tol || (p == n) {
            return Ok(EigenResult {
                values: vals[..config.n_modes].to_vec(),
                vectors: vecs[..config.n_modes].to_vec(),
                residuals: residuals[..config.n_modes].to_vec(),
                iterations: iter,
            });
        }
        // Stop once rounding noise dominates and no further progress is made.
        if worst < 0.5 * best_worst {
            best_worst = worst;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 40 {
                break;
            }
        }
        let a = vals[p - 1];
        let low = vals[0];
        if !(a < upper) {
            return Err(Error::NonConvergence {
                iterations: iter,
                residual: worst,
            });
        }
        // Degree so that the lowest Ritz value is amplified about 1e4 times.
        let gap = (a - low).max(1e-14 * (upper - low));
        let rho = (1.0 + 2.0 * gap / (upper - a)).acosh();
        let m = ((1e4f64.ln() / rho).ceil() as usize).clamp(6, 400);
        block = chebyshev_filter(h, &vecs, m, a, upper, low);
        orthonormalize(&mut block, &mut rng);
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::super::grid::GridSpec;
    use super::*;
    use crate::potentials::{catalog, PotentialKind};
    use crate::stable::StableParams;

    #[test]
    fn free_spectrum_is_the_multiplier() {
        let g = GridSpec::line(10.0, 256).unwrap();
        let p = StableParams::new(1.0, 1).unwrap();
        let v = catalog(PotentialKind::Zero, &p).unwrap();
        let h = Hamiltonian::new(g, p, &v, None).unwrap();
        let r = lowest_eigenpairs(&h, &EigenConfig::new(5)).unwrap();
        let k = g.base_frequency();
        let want = [0.0, k, k, 2.0 * k, 2.0 * k];
        for (a, b) in r.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-10, "{:?}", r.values);
        }
    }
}
