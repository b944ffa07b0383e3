//! Acceptance criteria; one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use fracphi_core::feynman_kac::{fk_kernel_bridge, FKConfig};
use fracphi_core::gibbs::{
    boundary_convergence, build_chain, dlr_check, random_event_pair, typical_path_check, BoundaryProfile, Constraint,
    Cylinder, TypicalConfig, TypicalReport,
};
use fracphi_core::iuc::{classify, uniform_convergence_scan, IUCClass, IUCConfig};
use fracphi_core::mc::{chunk_rng, Chunking, MCEstimate};
use fracphi_core::numerics::Quadrature;
use fracphi_core::potentials::{catalog, PotentialKind};
use fracphi_core::spectral::{GridSpec, SpectralConfig, SpectralModel};
use fracphi_core::stable::sample::increment_1d;
use fracphi_core::{StableLaw, StableParams};

type Check = Result<(bool, String), String>;

struct Harness {
    failures: usize,
}

impl Harness {
    fn run(&mut self, id: &str, title: &str, budget_s: f64, check: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok && secs < budget_s, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            self.failures += 1;
        }
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{id} {verdict} {title}: {detail} [{secs:.1} s, budget {budget_s:.0} s]");
    }
}

fn line(alpha: f64) -> StableParams {
    StableParams::new(alpha, 1).unwrap()
}

fn model(alpha: f64, kind: PotentialKind, l: f64, n: usize, modes: usize) -> Result<SpectralModel, String> {
    let p = line(alpha);
    let v = catalog(kind, &p).map_err(|e| e.to_string())?;
    let grid = GridSpec::line(l, n).map_err(|e| e.to_string())?;
    SpectralModel::build(grid, p, &v, &SpectralConfig::with_modes(modes)).map_err(|e| e.to_string())
}

fn oscillator() -> PotentialKind {
    PotentialKind::Power { delta: 2.0 }
}

const CF_FREQUENCIES: [f64; 3] = [0.5, 1.0, 2.0];
const CF_ALPHAS: [f64; 3] = [0.5, 1.0, 1.5];

/// Empirical characteristic function at [`CF_FREQUENCIES`] as (re, im) pairs.
fn empirical_cf(alpha: f64, seed: u64) -> Vec<(f64, f64)> {
    let n = 1_000_000;
    let chunking = Chunking {
        seed,
        chunk_size: 1 << 16,
    };
    let parts = chunking.map(n, |rng, count, _| {
        let mut sums = [(0.0f64, 0.0f64); 3];
        for _ in 0..count {
            let x = increment_1d(alpha, 1.0, rng);
            for (s, xi) in sums.iter_mut().zip(CF_FREQUENCIES) {
                s.0 += (xi * x).cos();
                s.1 += (xi * x).sin();
            }
        }
        sums
    });
    let mut total = [(0.0f64, 0.0f64); 3];
    for p in parts {
        for (t, s) in total.iter_mut().zip(p) {
            t.0 += s.0;
            t.1 += s.1;
        }
    }
    total.iter().map(|(c, s)| (c / n as f64, s / n as f64)).collect()
}

fn cf_seed(alpha: f64) -> u64 {
    100 + (alpha * 10.0) as u64
}

fn ac1(store: &mut Vec<Vec<(f64, f64)>>) -> Check {
    let mut worst = 0.0f64;
    for alpha in CF_ALPHAS {
        let cf = empirical_cf(alpha, cf_seed(alpha));
        store.push(cf.clone());
        for ((re, im), xi) in cf.iter().zip(CF_FREQUENCIES) {
            let want = (-xi.powf(alpha)).exp();
            worst = worst.max((re - want).hypot(*im));
        }
    }
    Ok((worst < 0.005, format!("max |φ̂ - e^(-|ξ|^α)| = {worst:.2e} (limit 5e-3)")))
}

fn ac2() -> Check {
    let law = StableLaw::new(line(1.0)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for t in [0.5, 1.0, 2.0] {
        for i in 0..200 {
            let x = -50.0 + 100.0 * i as f64 / 199.0;
            let want = t / (PI * (t * t + x * x));
            let got = law.density(t, &[x]).map_err(|e| e.to_string())?;
            worst = worst.max((got / want - 1.0).abs());
        }
    }
    Ok((worst < 1e-6, format!("max relative error {worst:.2e} (limit 1e-6)")))
}

/// `∫ p(s, x - z) p(t, z) dz` over the line.
fn convolution(law: &StableLaw, s: f64, t: f64, x: f64) -> Result<f64, String> {
    let q = Quadrature::with_tol(1e-15, 1e-10);
    let f = |z: f64| law.density(s, &[x - z]).unwrap() * law.density(t, &[z]).unwrap();
    let (lo, hi) = (x.min(0.0) - 1.0, x.max(0.0) + 1.0);
    let mut mid = vec![lo, x.min(0.0), x.max(0.0), hi];
    mid.dedup();
    let centre = q.integrate_breaks(&mut { f }, &mid).map_err(|e| e.to_string())?.value;
    let right = q.integrate_to_infinity(f, hi).map_err(|e| e.to_string())?.value;
    let left = q.integrate_to_infinity(|z| f(-z), -lo).map_err(|e| e.to_string())?.value;
    Ok(left + centre + right)
}

fn ac3() -> Check {
    let mut scaling = 0.0f64;
    let mut ck = 0.0f64;
    for alpha in [0.7, 1.3] {
        let law = StableLaw::new(line(alpha)).map_err(|e| e.to_string())?;
        for t in [0.25f64, 0.5, 2.0, 7.0] {
            let c = t.powf(-1.0 / alpha);
            for i in 0..41 {
                let x = -20.0 + i as f64;
                let lhs = law.density(t, &[x]).map_err(|e| e.to_string())?;
                let rhs = c * law.density(1.0, &[c * x]).map_err(|e| e.to_string())?;
                scaling = scaling.max((lhs / rhs - 1.0).abs());
            }
        }
        for &(s, t) in &[(0.6, 1.1), (0.3, 2.0)] {
            for x in [0.0, 0.5, 2.0, 7.0, 25.0] {
                let want = law.density(s + t, &[x]).map_err(|e| e.to_string())?;
                let got = convolution(&law, s, t, x)?;
                ck = ck.max((got / want - 1.0).abs());
            }
        }
    }
    Ok((
        scaling < 1e-8 && ck < 1e-5,
        format!("scaling {scaling:.2e} (limit 1e-8), Chapman-Kolmogorov {ck:.2e} (limit 1e-5)"),
    ))
}

fn bridge_estimate() -> Result<MCEstimate, String> {
    let p = line(1.0);
    let v = catalog(oscillator(), &p).map_err(|e| e.to_string())?;
    let cfg = FKConfig {
        dt: 0.02,
        n_paths: 100_000,
        seed: 4,
        ..FKConfig::default()
    };
    fk_kernel_bridge(&[0.0], &[0.0], 1.0, &v, &p, &cfg).map_err(|e| e.to_string())
}

fn ac4(m: &SpectralModel, store: &mut Option<MCEstimate>) -> Check {
    let o = m.grid().origin();
    let spectral = m
        .semigroup_kernel_within(1.0, o, o, m.n_modes(), 1e-6)
        .map_err(|e| e.to_string())?;
    let mc = bridge_estimate()?;
    *store = Some(mc);
    let z = mc.z_score(spectral);
    Ok((
        z < 3.0,
        format!(
            "spectral {spectral:.6}, bridge MC {:.6} ± {:.1e}, |z| = {z:.2}",
            mc.mean, mc.stderr
        ),
    ))
}

fn ac5(m: &SpectralModel) -> Check {
    let fit = m.decay_fit((8.0, 25.0), 1.0).map_err(|e| e.to_string())?;
    let kept = fit.window == (8.0, 25.0) && fit.retries == 0;
    Ok((
        kept && (fit.exponent + 4.0).abs() <= 0.3,
        format!(
            "slope {:.3} ± {:.3} on [{}, {}], curvature {:.3}",
            fit.exponent, fit.exponent_stderr, fit.window.0, fit.window.1, fit.curvature
        ),
    ))
}

fn ac6() -> Check {
    let m = model(1.5, PotentialKind::Well { depth: 1.0, radius: 1.0 }, 400.0, 4096, 4)?;
    let fit = m.decay_fit((20.0, 100.0), 1.0).map_err(|e| e.to_string())?;
    let kept = fit.window == (20.0, 100.0) && fit.retries == 0;
    Ok((
        kept && (fit.exponent + 2.5).abs() <= 0.3 && m.lambda0() < 0.0,
        format!("slope {:.3} on [{}, {}], λ₀ = {:.5}", fit.exponent, fit.window.0, fit.window.1, m.lambda0()),
    ))
}

fn ac7(gibbs_model: &SpectralModel) -> Check {
    let chain = build_chain(gibbs_model, 1.0).map_err(|e| e.to_string())?;
    let m = model(1.0, oscillator(), 40.0, 2048, 16)?;
    let times: Vec<f64> = (0..6).map(|i| 4.0 + i as f64).collect();
    let scan = uniform_convergence_scan(&m, &times).map_err(|e| e.to_string())?;
    let rel = (scan.rate / m.gap() - 1.0).abs();
    Ok((
        chain.row_defect <= 1e-6 && rel < 0.15,
        format!(
            "row sum defect {:.1e}, sup|ũ-1| rate {:.4} vs gap {:.4} ({:.1}%)",
            chain.row_defect,
            scan.rate,
            m.gap(),
            100.0 * rel
        ),
    ))
}

fn ac8(m: &SpectralModel) -> Check {
    let mut rng = chunk_rng(8, 0);
    let events = (0..20)
        .map(|_| random_event_pair(&mut rng, 1.0, 2.0, 3.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let report = dlr_check(m, 1.0, 2.0, &events).map_err(|e| e.to_string())?;
    Ok((
        report.max_discrepancy < 1e-8,
        format!("max discrepancy {:.2e} over 20 pairs", report.max_discrepancy),
    ))
}

fn ac9() -> Check {
    let p = line(1.0);
    let cfg = IUCConfig::default();
    let cases = [
        (oscillator(), IUCClass::Iuc),
        (PotentialKind::WellPlusLog { alpha: 1.0 }, IUCClass::AiucOnly),
        (PotentialKind::LogOverLogLog, IUCClass::NotAiuc),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (kind, want) in cases {
        let v = catalog(kind, &p).map_err(|e| e.to_string())?;
        let w = v
            .plus(PotentialKind::Well { depth: 5.0, radius: 1.0 }, &p)
            .map_err(|e| e.to_string())?;
        let a = classify(&v, &cfg).map_err(|e| e.to_string())?.class;
        let b = classify(&w, &cfg).map_err(|e| e.to_string())?.class;
        ok &= a == want && b == want;
        detail.push(format!("{a}/{b}"));
    }
    Ok((ok, format!("plain/perturbed verdicts {}", detail.join(", "))))
}

fn ac10(m: &SpectralModel) -> Check {
    let event = Cylinder::new(vec![Constraint {
        time: 0.0,
        lo: -1.0,
        hi: 1.0,
    }])
    .map_err(|e| e.to_string())?;
    let curve = boundary_convergence(
        m,
        1.0,
        BoundaryProfile::Constant { value: 0.0 },
        &event,
        &[2.0, 3.0, 4.0, 6.0],
    )
    .map_err(|e| e.to_string())?;
    let d: Vec<f64> = curve.points.iter().map(|p| p.discrepancy.unwrap_or(f64::NAN)).collect();
    let last = *d.last().unwrap();
    Ok((
        curve.monotone && last < 1e-4,
        format!("discrepancies {}", d.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(", ")),
    ))
}

const TYPICAL_SEEDS: [u64; 3] = [11, 13, 15];

fn typical_config(seed: u64) -> TypicalConfig {
    TypicalConfig {
        n_paths: 200,
        n_max: 50,
        n_start: 10,
        threshold_factor: 10.0,
        seed,
        pilot_seed: seed + 1,
        chunk_size: 64,
        // V = |x|^2, d = 1, α = 1, θ = 1
        growth: Some((4.0, 1.0)),
    }
}

fn typical_runs(m: &SpectralModel) -> Result<Vec<TypicalReport>, String> {
    let chain = build_chain(m, 1.0).map_err(|e| e.to_string())?;
    let seq: Vec<f64> = (1..=50).map(|n| (n as f64).powi(-2)).collect();
    TYPICAL_SEEDS
        .iter()
        .map(|&s| typical_path_check(&chain, &seq, &typical_config(s)).map_err(|e| e.to_string()))
        .collect()
}

fn ac11(reports: &[TypicalReport]) -> Check {
    let ok = reports
        .iter()
        .all(|r| r.violation_fraction < 0.05 && r.growth_violations == 0);
    let detail = reports
        .iter()
        .map(|r| format!("{:.3}/{}", r.violation_fraction, r.growth_violations))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((ok, format!("violation fraction/growth crossings per seed: {detail}")))
}

fn ac12(cf: &[Vec<(f64, f64)>], bridge: Option<&MCEstimate>, typical: &[TypicalReport], gibbs_model: &SpectralModel) -> Check {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(2)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| {
        let cf_again: Vec<_> = CF_ALPHAS.iter().map(|&a| empirical_cf(a, cf_seed(a))).collect();
        let bits = |v: &[Vec<(f64, f64)>]| -> Vec<u64> {
            v.iter().flatten().flat_map(|(a, b)| [a.to_bits(), b.to_bits()]).collect()
        };
        let same_cf = bits(cf) == bits(&cf_again);
        let first = bridge.ok_or("no first bridge estimate to compare")?;
        let b = bridge_estimate()?;
        let same_bridge = b.mean.to_bits() == first.mean.to_bits() && b.stderr.to_bits() == first.stderr.to_bits();
        let again = typical_runs(gibbs_model)?;
        let same_typical = again.len() == typical.len()
            && again.iter().zip(typical).all(|(a, b)| {
                a.statistics.iter().map(|x| x.to_bits()).eq(b.statistics.iter().map(|x| x.to_bits()))
                    && a.threshold.to_bits() == b.threshold.to_bits()
            });
        Ok((
            same_cf && same_bridge && same_typical,
            format!(
                "bit-identical on rerun with 2 workers: stable samples {same_cf}, bridge MC {same_bridge}, chain paths {same_typical}"
            ),
        ))
    })
}

fn main() {
    let mut h = Harness { failures: 0 };
    let mut cf = Vec::new();
    h.run("AC1", "stable law characteristic function", 120.0, || ac1(&mut cf));
    h.run("AC2", "Cauchy density", 10.0, ac2);
    h.run("AC3", "scaling and Chapman-Kolmogorov", 60.0, ac3);

    // Model construction is timed inside the first criterion that needs it.
    let mut bridge = None;
    let mut fine = None;
    h.run("AC4", "spectral vs bridge Monte Carlo", 300.0, || {
        let m = model(1.0, oscillator(), 40.0, 4096, 64)?;
        let r = ac4(&m, &mut bridge);
        fine = Some(m);
        r
    });
    h.run("AC5", "oscillator ground-state decay", 120.0, || match &fine {
        Some(m) => ac5(m),
        None => ac5(&model(1.0, oscillator(), 40.0, 4096, 64)?),
    });
    h.run("AC6", "potential-well decay", 300.0, ac6);

    let mut gibbs_model = Err("not built".to_string());
    h.run("AC7", "intrinsic kernel stochasticity and convergence", 120.0, || {
        gibbs_model = model(1.0, oscillator(), 40.0, 1024, 48);
        ac7(gibbs_model.as_ref().map_err(|e| e.clone())?)
    });
    let gibbs = gibbs_model.as_ref().map_err(|e| e.clone());
    h.run("AC8", "DLR tower identity", 120.0, || ac8(gibbs.clone()?));
    h.run("AC9", "IUC classifier ground truth", 60.0, ac9);
    h.run("AC10", "boundary convergence", 120.0, || ac10(gibbs.clone()?));

    let mut typical = Vec::new();
    h.run("AC11", "typical path behaviour", 300.0, || {
        typical = typical_runs(gibbs.clone()?)?;
        ac11(&typical)
    });

    h.run("AC12", "reproducibility", 600.0, || {
        ac12(&cf, bridge.as_ref(), &typical, gibbs.clone()?)
    });

    println!("{} of 12 criteria failed", h.failures);
    if h.failures > 0 {
        std::process::exit(1);
    }
}
