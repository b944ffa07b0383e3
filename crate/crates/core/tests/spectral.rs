use fracphi_core::potentials::{catalog, PotentialKind};
use fracphi_core::spectral::{GridSpec, SpectralConfig, SpectralModel};
use fracphi_core::StableParams;
use nalgebra::{DMatrix, SymmetricEigen};

fn oscillator_params() -> (StableParams, fracphi_core::PotentialSpec) {
    let p = StableParams::new(1.0, 1).unwrap();
    let v = catalog(PotentialKind::Power { delta: 2.0 }, &p).unwrap();
    (p, v)
}

/// Dense periodic matrix of `(-Δ)^{α/2} + V` assembled from a cosine sum,
/// independent of the FFT path.
fn dense_levels(alpha: f64, l: f64, n: usize, v: impl Fn(f64) -> f64, count: usize) -> Vec<f64> {
    let k0 = std::f64::consts::PI / l;
    let sym: Vec<f64> = (0..n)
        .map(|j| {
            let s = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            (s * k0).abs().powf(alpha)
        })
        .collect();
    let row: Vec<f64> = (0..n)
        .map(|r| {
            sym.iter()
                .enumerate()
                .map(|(j, m)| m * (2.0 * std::f64::consts::PI * (j * r % n) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let h = 2.0 * l / n as f64;
    let mut a = DMatrix::<f64>::from_fn(n, n, |i, j| row[(i + n - j) % n]);
    for i in 0..n {
        a[(i, i)] += v(-l + i as f64 * h);
    }
    let mut e: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e.truncate(count);
    e
}

#[test]
fn subspace_solver_matches_dense_eigensolve() {
    let (p, v) = oscillator_params();
    let dense = dense_levels(1.0, 40.0, 1024, |x| x * x, 4);
    let m = SpectralModel::build(GridSpec::line(40.0, 1024).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    for (a, b) in m.eigenvalues().iter().zip(&dense) {
        assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} {b}");
    }
    // The production grid refines the dense one; its bottom level stays close.
    let fine = SpectralModel::build(GridSpec::line(40.0, 4096).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    assert!((fine.lambda0() - dense[0]).abs() < 1e-3);
    assert!(fine.lambda0() > 0.0 && fine.gap() > 0.0);
    assert!(fine.ground_state().iter().all(|&x| x > 0.0));
}

/// For `α = 1` and `V = x²` the Fourier transform turns the operator into
/// `-d²/dk² + |k|`, whose levels are the moduli of the zeros of `Ai'` and `Ai`.
#[test]
fn relativistic_oscillator_levels_are_airy_zeros() {
    let (p, v) = oscillator_params();
    let airy = [1.018_792_97, 2.338_107_41, 3.248_197_58, 4.087_949_44];
    let m = SpectralModel::build(GridSpec::line(40.0, 4096).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    for (a, b) in m.eigenvalues().iter().zip(airy) {
        assert!((a - b).abs() < 1e-3, "{a} {b}");
    }
}

#[test]
fn bottom_level_converges_under_grid_refinement() {
    let (p, v) = oscillator_params();
    let levels: Vec<f64> = [1024, 2048, 4096]
        .iter()
        .map(|&n| {
            SpectralModel::build(GridSpec::line(40.0, n).unwrap(), p, &v, &SpectralConfig::with_modes(2))
                .unwrap()
                .lambda0()
        })
        .collect();
    let d1 = (levels[1] - levels[0]).abs();
    let d2 = (levels[2] - levels[1]).abs();
    assert!(d2 <= 0.5 * d1, "{levels:?}");
}

#[test]
fn kernel_is_positive_after_t_min() {
    let (p, v) = oscillator_params();
    let m = SpectralModel::build(GridSpec::line(20.0, 512).unwrap(), p, &v, &SpectralConfig::with_modes(16)).unwrap();
    let t = m.t_min();
    let pts: Vec<usize> = (0..512).step_by(8).collect();
    for &x in &pts {
        for &y in &pts {
            assert!(m.semigroup_kernel(t, x, y, 16).unwrap() > 0.0);
        }
    }
}

#[test]
fn shallow_well_binds_in_the_recurrent_case() {
    let p = StableParams::new(1.5, 1).unwrap();
    let v = catalog(PotentialKind::Well { depth: 1.0, radius: 1.0 }, &p).unwrap();
    let m = SpectralModel::build(GridSpec::line(200.0, 8192).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    assert!(m.lambda0() < 0.0);
    assert!(m.eigenvalues()[1] > m.lambda0() + 0.1, "{:?}", m.eigenvalues());
    assert!(!m.flags().iter().any(|f| f.starts_with("no_ground_state")));
}

#[test]
fn oscillator_ground_state_decays_like_inverse_fourth_power() {
    let (p, v) = oscillator_params();
    let m = SpectralModel::build(GridSpec::line(40.0, 4096).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    let f = m.decay_fit((8.0, 25.0), 1.0).unwrap();
    assert!((f.exponent + 4.0).abs() < 0.3, "{f:?}");
    assert!((f.profile_slope.unwrap() - 1.0).abs() < 0.1, "{f:?}");
}

#[test]
fn power_log_profile_slope_is_one() {
    let p = StableParams::new(1.0, 1).unwrap();
    let v = catalog(PotentialKind::PowerLog { beta: 2.0 }, &p).unwrap();
    let m = SpectralModel::build(GridSpec::line(40.0, 4096).unwrap(), p, &v, &SpectralConfig::with_modes(4)).unwrap();
    let f = m.decay_fit((8.0, 25.0), 1.0).unwrap();
    assert!((f.profile_slope.unwrap() - 1.0).abs() < 0.1, "{f:?}");
}
