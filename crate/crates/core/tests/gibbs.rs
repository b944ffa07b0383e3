use fracphi_core::gibbs::{
    boundary_convergence, build_chain, dlr_check, inverse_gs_moment, random_event_pair, BoundaryProfile, Constraint,
    Cylinder, PPhi1Chain, Start,
};
use fracphi_core::mc::chunk_rng;
use fracphi_core::potentials::{catalog, PotentialKind};
use fracphi_core::spectral::{GridSpec, SpectralConfig, SpectralModel};
use fracphi_core::StableParams;
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn oscillator(l: f64, n: usize, modes: usize) -> SpectralModel {
    let p = StableParams::new(1.0, 1).unwrap();
    let v = catalog(PotentialKind::Power { delta: 2.0 }, &p).unwrap();
    SpectralModel::build(GridSpec::line(l, n).unwrap(), p, &v, &SpectralConfig::with_modes(modes)).unwrap()
}

/// Consecutive states grouped into `k` bins of roughly equal stationary mass.
fn mass_bins(chain: &PPhi1Chain, k: usize) -> (Vec<usize>, Vec<f64>) {
    let mut bin_of = vec![0; chain.n_states()];
    let mut mass = vec![0.0; k];
    let mut acc = 0.0;
    for (s, r) in chain.stationary().iter().enumerate() {
        let b = ((acc * k as f64) as usize).min(k - 1);
        bin_of[s] = b;
        mass[b] += r;
        acc += r;
    }
    (bin_of, mass)
}

#[test]
fn stationary_marginals_pass_chi_square() {
    let model = oscillator(40.0, 1024, 48);
    let chain = build_chain(&model, 1.0).unwrap();
    let (bin_of, mass) = mass_bins(&chain, 10);
    let n_paths = 10_000;
    let mut counts = vec![vec![0.0; 10]; 3];
    let mut rng = chunk_rng(21, 0);
    for _ in 0..n_paths {
        let states = chain.sample_states(3, 5, &Start::Stationary, &mut rng).unwrap();
        for (j, &i) in [0usize, 3, 8].iter().enumerate() {
            counts[j][bin_of[states[i]]] += 1.0;
        }
    }
    let critical = ChiSquared::new(9.0).unwrap().inverse_cdf(0.99);
    for c in counts {
        let stat: f64 = c
            .iter()
            .zip(&mass)
            .map(|(o, m)| {
                let e = m * n_paths as f64;
                (o - e).powi(2) / e
            })
            .sum();
        assert!(stat < critical, "chi-square {stat} above {critical}");
    }
}

#[test]
#[allow(clippy::needless_range_loop)]
fn stationary_pair_law_is_symmetric_under_time_reversal() {
    let model = oscillator(40.0, 1024, 48);
    let chain = build_chain(&model, 1.0).unwrap();
    let k = 4;
    let (bin_of, _) = mass_bins(&chain, k);
    let mut table = vec![vec![0.0f64; k]; k];
    let mut rng = chunk_rng(22, 0);
    for _ in 0..10_000 {
        let s = chain.sample_states(0, 2, &Start::Stationary, &mut rng).unwrap();
        table[bin_of[s[0]]][bin_of[s[2]]] += 1.0;
    }
    // Bowker's symmetry test.
    let mut stat = 0.0f64;
    for a in 0..k {
        for b in a + 1..k {
            let (x, y) = (table[a][b], table[b][a]);
            if x + y > 0.0 {
                stat += (x - y).powi(2) / (x + y);
            }
        }
    }
    let critical = ChiSquared::new((k * (k - 1) / 2) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "{stat} above {critical}");
}

#[test]
fn two_halves_are_uncorrelated_given_the_start() {
    let model = oscillator(40.0, 1024, 48);
    let chain = build_chain(&model, 1.0).unwrap();
    let mut rng = chunk_rng(23, 0);
    let n = 10_000;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for _ in 0..n {
        let p = chain.sample_path(1, 1, &Start::Point(vec![0.5]), &mut rng).unwrap();
        let (x, y) = (p.position(0)[0], p.position(2)[0]);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    let nf = n as f64;
    let cov = sxy / nf - sx * sy / nf / nf;
    let corr = cov / ((sxx / nf - (sx / nf).powi(2)) * (syy / nf - (sy / nf).powi(2))).sqrt();
    assert!(corr.abs() * nf.sqrt() < 4.0, "correlation {corr}");
}

#[test]
fn inverse_moment_is_stable_under_box_doubling() {
    let sups: Vec<f64> = [(20.0, 512), (40.0, 1024)]
        .iter()
        .map(|&(l, n)| {
            let chain = build_chain(&oscillator(l, n, 48), 1.0).unwrap();
            inverse_gs_moment(&chain, &[]).unwrap().sup
        })
        .collect();
    assert!((sups[1] / sups[0] - 1.0).abs() < 0.1, "{sups:?}");
}

#[test]
fn polynomial_boundary_inside_the_good_set_converges() {
    let model = oscillator(40.0, 1024, 48);
    let event = Cylinder::new(vec![Constraint {
        time: 0.2,
        lo: -1.0,
        hi: 0.5,
    }])
    .unwrap();
    let curve = boundary_convergence(
        &model,
        1.0,
        BoundaryProfile::Polynomial { scale: 1.0, power: 1.0 },
        &event,
        &[2.0, 4.0, 6.0, 8.0, 10.0],
    )
    .unwrap();
    assert!(curve.monotone, "{curve:?}");
    let last = curve.points.last().unwrap();
    assert!(last.discrepancy.unwrap() < 1e-6, "{last:?}");
    assert!(last.omega_star < curve.points[1].omega_star);
}

#[test]
fn fast_boundary_curve_is_reported_without_verdict() {
    let model = oscillator(40.0, 1024, 48);
    let event = Cylinder::new(vec![Constraint {
        time: 0.0,
        lo: -1.0,
        hi: 1.0,
    }])
    .unwrap();
    let curve = boundary_convergence(
        &model,
        1.0,
        BoundaryProfile::Exponential { scale: 0.2, rate: 1.0 },
        &event,
        &[2.0, 3.0, 4.0, 5.0],
    )
    .unwrap();
    assert_eq!(curve.points.len(), 4);
    assert!(!curve.omega_star_decreasing_on_sample);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn dlr_identity_holds_for_random_events(seed in any::<u64>()) {
        let model = oscillator(20.0, 256, 48);
        let mut rng = chunk_rng(seed, 0);
        let pair = random_event_pair(&mut rng, 1.0, 2.0, 3.0).unwrap();
        let report = dlr_check(&model, 1.0, 2.0, &[pair]).unwrap();
        prop_assert!(report.max_discrepancy < 1e-8);
        let p = report.pairs[0].rhs;
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&p));
    }
}
