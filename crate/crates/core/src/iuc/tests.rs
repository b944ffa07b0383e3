use super::*;
use crate::feynman_kac::{Ball, FKConfig};
use crate::potentials::{catalog, PotentialKind};
use crate::spectral::{GridSpec, SpectralConfig, SpectralModel};
use crate::stable::StableParams;

fn line() -> StableParams {
    StableParams::new(1.0, 1).unwrap()
}

fn verdict(kind: PotentialKind) -> IUCVerdict {
    let v = catalog(kind, &line()).unwrap();
    classify(&v, &IUCConfig::default()).unwrap()
}

#[test]
fn catalog_ground_truth() {
    let iuc = verdict(PotentialKind::Power { delta: 2.0 });
    assert_eq!(iuc.class, IUCClass::Iuc, "{iuc:?}");
    assert_eq!(iuc.liminf_ratio, LiminfRatio::Infinite);
    let aiuc = verdict(PotentialKind::WellPlusLog { alpha: 1.0 });
    assert_eq!(aiuc.class, IUCClass::AiucOnly, "{aiuc:?}");
    assert!(matches!(aiuc.liminf_ratio, LiminfRatio::Positive { lower_bound } if lower_bound > 0.0));
    let not = verdict(PotentialKind::LogOverLogLog);
    assert_eq!(not.class, IUCClass::NotAiuc, "{not:?}");
}

#[test]
fn every_power_is_iuc() {
    for delta in [1.0, 2.0, 4.0] {
        assert_eq!(verdict(PotentialKind::Power { delta }).class, IUCClass::Iuc, "{delta}");
    }
    assert_eq!(verdict(PotentialKind::PowerLog { beta: 1.0 }).class, IUCClass::Iuc);
    assert_eq!(verdict(PotentialKind::Exponential { beta: 0.5 }).class, IUCClass::Iuc);
    // Slow powers need more decades to reach the divergence level.
    let v = catalog(PotentialKind::Power { delta: 0.5 }, &line()).unwrap();
    assert_eq!(classify(&v, &IUCConfig::default()).unwrap().class, IUCClass::Inconclusive);
    let long = IUCConfig {
        r_grid: (1..=8).map(|k| 10f64.powi(k)).collect(),
        ..IUCConfig::default()
    };
    assert_eq!(classify(&v, &long).unwrap().class, IUCClass::Iuc);
}

#[test]
fn compact_perturbation_keeps_the_verdict() {
    let p = line();
    for kind in [
        PotentialKind::Power { delta: 2.0 },
        PotentialKind::WellPlusLog { alpha: 1.0 },
        PotentialKind::LogOverLogLog,
    ] {
        let v = catalog(kind, &p).unwrap();
        let w = v.plus(PotentialKind::Well { depth: 5.0, radius: 1.0 }, &p).unwrap();
        let a = classify(&v, &IUCConfig::default()).unwrap();
        let b = classify(&w, &IUCConfig::default()).unwrap();
        assert_eq!(a.class, b.class);
        assert_eq!(a.ratios, b.ratios);
    }
}

#[test]
fn decaying_potential_is_not_aiuc() {
    let v = verdict(PotentialKind::Well { depth: 1.0, radius: 1.0 });
    assert_eq!(v.class, IUCClass::NotAiuc, "{v:?}");
}

#[test]
fn numeric_disagreement_is_inconclusive() {
    // log|x| plus a large constant: the ratio still falls over the scanned decades.
    let p = line();
    let v = catalog(
        PotentialKind::Sum {
            terms: vec![PotentialKind::LogPlus { c: 1.0 }, PotentialKind::Constant { c: 20.0 }],
        },
        &p,
    )
    .unwrap();
    let r = classify(&v, &IUCConfig::default()).unwrap();
    assert_eq!(r.class, IUCClass::Inconclusive, "{r:?}");
}

#[test]
fn bad_radius_grid_is_rejected() {
    let v = catalog(PotentialKind::Power { delta: 2.0 }, &line()).unwrap();
    let cfg = IUCConfig {
        r_grid: vec![10.0],
        ..IUCConfig::default()
    };
    assert!(classify(&v, &cfg).is_err());
}

fn oscillator(l: f64, n: usize) -> SpectralModel {
    let p = line();
    let v = catalog(PotentialKind::Power { delta: 2.0 }, &p).unwrap();
    SpectralModel::build(GridSpec::line(l, n).unwrap(), p, &v, &SpectralConfig::with_modes(16)).unwrap()
}

#[test]
fn tail_bound_is_non_increasing_in_time() {
    let m = oscillator(20.0, 512);
    let t0 = m.t_min().max(1.0);
    let s: Vec<f64> = [t0, 2.0 * t0, 4.0 * t0]
        .iter()
        .map(|&t| tail_bound_scan(&m, t, &[]).unwrap().sup)
        .collect();
    assert!(s[1] <= s[0] && s[2] <= s[1], "{s:?}");
}

#[test]
fn constant_potential_tail_bound_grows_with_the_box() {
    let p = line();
    let v = catalog(PotentialKind::Constant { c: 1.0 }, &p).unwrap();
    let cfg = SpectralConfig::with_modes(4);
    let small = SpectralModel::build(GridSpec::line(10.0, 256).unwrap(), p, &v, &cfg).unwrap();
    let large = SpectralModel::build(GridSpec::line(40.0, 256).unwrap(), p, &v, &cfg).unwrap();
    let t = small.t_min().max(large.t_min());
    let a = tail_bound_scan(&small, t, &[]).unwrap().sup;
    let b = tail_bound_scan(&large, t, &[]).unwrap().sup;
    assert!(b > 10.0 * a, "{a} {b}");
}

#[test]
fn sup_deviation_decreases_and_ignores_constant_shifts() {
    let p = line();
    let v = catalog(PotentialKind::Power { delta: 2.0 }, &p).unwrap();
    let w = v.shifted(2.5, &p).unwrap();
    let g = GridSpec::line(20.0, 512).unwrap();
    let cfg = SpectralConfig::with_modes(12);
    let a = SpectralModel::build(g, p, &v, &cfg).unwrap();
    let b = SpectralModel::build(g, p, &w, &cfg).unwrap();
    let t0 = a.t_min().max(b.t_min());
    let times: Vec<f64> = (0..5).map(|i| t0 + i as f64).collect();
    let sa = uniform_convergence_scan(&a, &times).unwrap();
    let sb = uniform_convergence_scan(&b, &times).unwrap();
    for w in sa.sup_deviation.windows(2) {
        assert!(w[1] < w[0]);
    }
    for (x, y) in sa.sup_deviation.iter().zip(&sb.sup_deviation) {
        assert!((x - y).abs() < 1e-6 * x.max(1e-12), "{x} {y}");
    }
    assert!(!sa.small_region);
}

#[test]
fn free_survival_ratio_is_inverse_probability_minus_one() {
    let p = line();
    let v = catalog(PotentialKind::Zero, &p).unwrap();
    let ball = Ball::new(vec![0.0], 1.0).unwrap();
    let cfg = FKConfig {
        dt: 1.0,
        n_paths: 20_000,
        seed: 3,
        ..FKConfig::default()
    };
    let r = survival_ratio_test(&v, 1.0, &ball, &[vec![0.0], vec![5.0], vec![20.0]], &p, &cfg).unwrap();
    for pt in &r.points {
        let prob = pt.inside.mean;
        assert!(pt.ratio >= 0.0);
        if !pt.lower_bound_only {
            assert!((pt.ratio - (1.0 / prob - 1.0)).abs() < 1e-9 * pt.ratio.max(1.0));
        }
    }
    // Exact Cauchy probability of landing in [-1, 1] from x at t = 1.
    let exact = |x: f64| ((x + 1.0).atan() - (x - 1.0).atan()) / std::f64::consts::PI;
    for pt in &r.points {
        let want = 1.0 / exact(pt.x[0]) - 1.0;
        assert!((pt.ratio - want).abs() < 4.0 * pt.ratio_stderr, "{pt:?} {want}");
    }
    assert!(r.points[2].ratio > r.points[1].ratio);
}
