//! One function per subcommand; each writes its files through [`Output`]
//! and returns their paths.

use std::path::PathBuf;

use fracphi_core::feynman_kac::{fk_expectation, fk_kernel_bridge, survival_growth, FKConfig};
use fracphi_core::gibbs::{
    boundary_convergence, build_chain, dlr_check, inverse_gs_moment, random_event_pair, typical_path_check,
    BoundaryConvergence, Cylinder, DlrReport, InverseMoment, Start, TypicalConfig, TypicalReport,
};
use fracphi_core::iuc::{classify, tail_bound_scan, uniform_convergence_scan, IUCVerdict, TailBound, UniformConvergence};
use fracphi_core::mc::chunk_rng;
use fracphi_core::potentials::{catalog, kato_check};
use fracphi_core::spectral::{GridSpec, SpectralModel};
use fracphi_core::{PotentialSpec, StableLaw};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FkMode, PathKind, RunConfig};
use crate::error::CliError;
use crate::output::Output;

/// Subcommand names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandName {
    Density,
    Spectrum,
    Fk,
    Iuc,
    Gibbs,
    Paths,
    Kato,
}

impl CommandName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandName::Density => "density",
            CommandName::Spectrum => "spectrum",
            CommandName::Fk => "fk",
            CommandName::Iuc => "iuc",
            CommandName::Gibbs => "gibbs",
            CommandName::Paths => "paths",
            CommandName::Kato => "kato",
        }
    }
}

type Written = Result<Vec<PathBuf>, CliError>;

pub fn execute(command: CommandName, cfg: &RunConfig, out: &Output) -> Written {
    match command {
        CommandName::Density => cmd_density(cfg, out),
        CommandName::Spectrum => cmd_spectrum(cfg, out),
        CommandName::Fk => cmd_fk(cfg, out),
        CommandName::Iuc => cmd_iuc(cfg, out),
        CommandName::Gibbs => cmd_gibbs(cfg, out),
        CommandName::Paths => cmd_paths(cfg, out),
        CommandName::Kato => cmd_kato(cfg, out),
    }
}

/// Point `(x, 0, …)` in the configured dimension.
fn on_axis(cfg: &RunConfig, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; cfg.params.dim()];
    p[0] = x;
    p
}

fn potential(cfg: &RunConfig) -> Result<PotentialSpec, CliError> {
    Ok(catalog(cfg.potential()?.clone(), &cfg.params)?)
}

fn model(cfg: &RunConfig) -> Result<SpectralModel, CliError> {
    if let Some(m) = &cfg.model {
        let model = SpectralModel::load(&m.file)?;
        if model.params() != &cfg.params {
            return Err(CliError::Config(format!(
                "model file {} was solved for different stable parameters",
                m.file.display()
            )));
        }
        return Ok(model);
    }
    let g = cfg.grid()?;
    let grid = GridSpec::new(cfg.params.dim(), g.half_width, g.n_points)?;
    Ok(SpectralModel::build(grid, cfg.params, &potential(cfg)?, &cfg.spectral)?)
}

fn fk_config(cfg: &RunConfig) -> Result<FKConfig, CliError> {
    Ok(FKConfig {
        dt: cfg.mc.dt,
        n_paths: cfg.mc.n_paths,
        seed: cfg.seed()?,
        chunk_size: cfg.mc.chunk_size,
        ..FKConfig::default()
    })
}

pub fn cmd_density(cfg: &RunConfig, out: &Output) -> Written {
    let d = cfg.density.as_ref().ok_or_else(|| CliError::missing("density"))?;
    if d.n == 0 || !(d.x_max >= d.x_min) {
        return Err(CliError::Config("density needs n >= 1 and x_max >= x_min".into()));
    }
    let law = StableLaw::new(cfg.params)?;
    let step = if d.n > 1 { (d.x_max - d.x_min) / (d.n - 1) as f64 } else { 0.0 };
    let rows = (0..d.n)
        .map(|i| {
            let x = d.x_min + i as f64 * step;
            let b = law.density_bounds(d.t, &on_axis(cfg, x))?;
            Ok(vec![x, b.value, b.lower, b.upper])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(vec![out.csv("density.csv", &["x", "p", "lower", "upper"], &rows)?])
}

#[derive(Debug, Serialize)]
struct SpectrumReport {
    lambda0: f64,
    lambda1: Option<f64>,
    gap: f64,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    iterations: usize,
    t_min: f64,
    no_ground_state: bool,
    flags: Vec<String>,
}

fn coordinate_columns(dim: usize) -> Vec<&'static str> {
    ["x", "y", "z"][..dim.min(3)].to_vec()
}

pub fn cmd_spectrum(cfg: &RunConfig, out: &Output) -> Written {
    let m = model(cfg)?;
    let report = SpectrumReport {
        lambda0: m.lambda0(),
        lambda1: m.eigenvalues().get(1).copied(),
        gap: m.gap(),
        eigenvalues: m.eigenvalues().to_vec(),
        residuals: m.residuals().to_vec(),
        iterations: m.iterations(),
        t_min: m.t_min(),
        no_ground_state: m.flags().iter().any(|f| f.starts_with("no_ground_state")),
        flags: m.flags().to_vec(),
    };
    let mut written = vec![out.json("spectrum.json", &report)?];
    let grid = m.grid();
    let rows: Vec<Vec<f64>> = (0..grid.total_points())
        .map(|i| {
            let mut r = grid.point(i);
            r.push(m.ground_state()[i]);
            r
        })
        .collect();
    let mut cols = coordinate_columns(grid.dim);
    cols.push("phi0");
    written.push(out.csv("ground_state.csv", &cols, &rows)?);
    if cfg.spectrum.as_ref().is_some_and(|s| s.save_model) {
        let path = out.path("model.fpsm");
        m.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_fk(cfg: &RunConfig, out: &Output) -> Written {
    let f = cfg.fk.as_ref().ok_or_else(|| CliError::missing("fk"))?;
    let v = potential(cfg)?;
    let fk = fk_config(cfg)?;
    let p = &cfg.params;
    match f.mode {
        FkMode::Semigroup => {
            let rows = f
                .points
                .iter()
                .map(|&x| {
                    let e = fk_expectation(&on_axis(cfg, x), f.t, |_| 1.0, &v, p, &fk)?;
                    Ok(vec![x, e.mean, e.stderr, e.n_samples as f64])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![out.csv("fk.csv", &["x", "estimate", "stderr", "n_samples"], &rows)?])
        }
        FkMode::Bridge => {
            let targets = f.targets.clone().unwrap_or_else(|| f.points.clone());
            if targets.len() != f.points.len() {
                return Err(CliError::Config("fk.targets must match fk.points in length".into()));
            }
            let rows = f
                .points
                .iter()
                .zip(&targets)
                .map(|(&x, &y)| {
                    let e = fk_kernel_bridge(&on_axis(cfg, x), &on_axis(cfg, y), f.t, &v, p, &fk)?;
                    Ok(vec![x, y, e.mean, e.stderr, e.n_samples as f64])
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(vec![out.csv("fk.csv", &["x", "y", "kernel", "stderr", "n_samples"], &rows)?])
        }
        FkMode::Growth => {
            let times = f.times.as_ref().ok_or_else(|| CliError::Config("fk.times is required for growth".into()))?;
            let starts: Vec<Vec<f64>> = f.points.iter().map(|&x| on_axis(cfg, x)).collect();
            let g = survival_growth(&v, p, times, &starts, &fk)?;
            let rows: Vec<Vec<f64>> = g.times.iter().zip(&g.sup_values).map(|(&t, &s)| vec![t, s]).collect();
            Ok(vec![
                out.json("fk_growth.json", &g)?,
                out.csv("fk_growth.csv", &["t", "sup_mass"], &rows)?,
            ])
        }
    }
}

#[derive(Debug, Serialize)]
struct IucReport {
    verdict: IUCVerdict,
    tail_bound: Option<TailBound>,
    uniform_convergence: Option<UniformConvergence>,
}

pub fn cmd_iuc(cfg: &RunConfig, out: &Output) -> Written {
    let section = cfg.iuc.clone().unwrap_or_default();
    let verdict = classify(&potential(cfg)?, &section.classifier)?;
    let needs_model = section.tail_time.is_some() || section.uniform_times.is_some();
    let m = if needs_model { Some(model(cfg)?) } else { None };
    let tail_bound = match (&m, section.tail_time) {
        (Some(m), Some(t)) => Some(tail_bound_scan(m, t, &[])?),
        _ => None,
    };
    let uniform_convergence = match (&m, &section.uniform_times) {
        (Some(m), Some(times)) => Some(uniform_convergence_scan(m, times)?),
        _ => None,
    };
    let mut written = Vec::new();
    if let Some(u) = &uniform_convergence {
        let rows: Vec<Vec<f64>> = u.times.iter().zip(&u.sup_deviation).map(|(&t, &s)| vec![t, s]).collect();
        written.push(out.csv("iuc_uniform.csv", &["t", "sup_deviation"], &rows)?);
    }
    let report = IucReport {
        verdict,
        tail_bound,
        uniform_convergence,
    };
    written.insert(0, out.json("iuc.json", &report)?);
    Ok(written)
}

#[derive(Debug, Serialize)]
struct ChainSummary {
    t_unit: f64,
    n_states: usize,
    row_defect: f64,
    clipped: usize,
    stationarity_defect: f64,
    reversibility_defect: f64,
    inverse_moment: InverseMoment,
}

#[derive(Debug, Default, Serialize)]
struct GibbsReport {
    lambda0: f64,
    gap: f64,
    dlr: Option<DlrReport>,
    boundary: Option<BoundaryConvergence>,
    chain: Option<ChainSummary>,
    typical: Option<TypicalReport>,
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

pub fn cmd_gibbs(cfg: &RunConfig, out: &Output) -> Written {
    let g = cfg.gibbs.as_ref().ok_or_else(|| CliError::missing("gibbs"))?;
    let m = model(cfg)?;
    let mut report = GibbsReport {
        lambda0: m.lambda0(),
        gap: m.gap(),
        ..GibbsReport::default()
    };
    let mut written = Vec::new();
    if let Some(d) = &g.dlr {
        let mut rng = chunk_rng(cfg.seed()?, 0);
        let events = (0..d.n_pairs)
            .map(|_| random_event_pair(&mut rng, d.inner, d.outer, d.reach))
            .collect::<Result<Vec<_>, _>>()?;
        report.dlr = Some(dlr_check(&m, d.inner, d.outer, &events)?);
    }
    if let Some(b) = &g.boundary {
        let event = Cylinder::new(b.event.clone())?;
        let curve = boundary_convergence(&m, b.half_width, b.profile, &event, &b.n_grid)?;
        let rows: Vec<Vec<f64>> = curve
            .points
            .iter()
            .map(|p| {
                vec![
                    p.n,
                    p.boundary,
                    nan_if_none(p.value),
                    nan_if_none(p.discrepancy),
                    nan_if_none(p.kernel_deviation),
                    p.omega_star,
                ]
            })
            .collect();
        written.push(out.csv(
            "gibbs_boundary.csv",
            &["N", "boundary", "value", "discrepancy", "kernel_deviation", "omega_star"],
            &rows,
        )?);
        report.boundary = Some(curve);
    }
    if g.typical.is_some() && g.chain.is_none() {
        return Err(CliError::Config("gibbs.typical needs a [gibbs.chain] section".into()));
    }
    if let Some(c) = &g.chain {
        let chain = build_chain(&m, c.t_unit)?;
        report.chain = Some(ChainSummary {
            t_unit: c.t_unit,
            n_states: chain.n_states(),
            row_defect: chain.row_defect,
            clipped: chain.clipped,
            stationarity_defect: chain.stationarity_defect,
            reversibility_defect: chain.reversibility_defect,
            inverse_moment: inverse_gs_moment(&chain, &[])?,
        });
        if let Some(t) = &g.typical {
            let seed = cfg.seed()?;
            let seq: Vec<f64> = (1..=t.n_max).map(|n| (n as f64).powf(-t.decay)).collect();
            let tc = TypicalConfig {
                n_paths: t.n_paths,
                n_max: t.n_max,
                n_start: t.n_start,
                threshold_factor: t.threshold_factor,
                seed,
                pilot_seed: seed.wrapping_add(1),
                chunk_size: 64,
                growth: t.growth,
            };
            report.typical = Some(typical_path_check(&chain, &seq, &tc)?);
        }
    }
    written.insert(0, out.json("gibbs.json", &report)?);
    Ok(written)
}

pub fn cmd_paths(cfg: &RunConfig, out: &Output) -> Written {
    let s = cfg.paths.as_ref().ok_or_else(|| CliError::missing("paths"))?;
    let seed = cfg.seed()?;
    let dim = cfg.params.dim();
    let origin = vec![0.0; dim];
    let start = s.start.clone().unwrap_or_else(|| origin.clone());
    if start.len() != dim || s.end.as_ref().is_some_and(|e| e.len() != dim) {
        return Err(CliError::Config("paths.start and paths.end need one coordinate per dimension".into()));
    }
    if s.n_steps == 0 || !(s.t_end > 0.0) {
        return Err(CliError::Config("paths needs n_steps >= 1 and t_end > 0".into()));
    }
    let dt = s.t_end / s.n_steps as f64;
    let skeletons = match s.kind {
        PathKind::Stable => {
            let law = StableLaw::new(cfg.params)?;
            let times: Vec<f64> = (0..=s.n_steps).map(|i| i as f64 * dt).collect();
            (0..s.n_paths)
                .into_par_iter()
                .map(|i| law.sample_path(&start, &times, &mut chunk_rng(seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?
        }
        PathKind::Bridge => {
            let law = StableLaw::new(cfg.params)?;
            let end = s.end.clone().unwrap_or(origin);
            let interior: Vec<f64> = (1..s.n_steps).map(|i| i as f64 * dt).collect();
            (0..s.n_paths)
                .into_par_iter()
                .map(|i| law.sample_bridge(&start, 0.0, &end, s.t_end, &interior, &mut chunk_rng(seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?
        }
        PathKind::Chain => {
            let t_unit = s
                .t_unit
                .ok_or_else(|| CliError::Config("paths.t_unit is required for chain paths".into()))?;
            let chain = build_chain(&model(cfg)?, t_unit)?;
            let from = match &s.start {
                Some(x) => Start::Point(x.clone()),
                None => Start::Stationary,
            };
            (0..s.n_paths)
                .into_par_iter()
                .map(|i| chain.sample_path(s.back, s.n_steps, &from, &mut chunk_rng(seed, i as u64)))
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    let mut rows = Vec::new();
    for (i, path) in skeletons.iter().enumerate() {
        for (t, x) in path.iter() {
            let mut r = vec![i as f64, t];
            r.extend_from_slice(x);
            rows.push(r);
        }
    }
    let mut cols = vec!["path", "t"];
    cols.extend(coordinate_columns(dim));
    Ok(vec![out.csv("paths.csv", &cols, &rows)?])
}

pub fn cmd_kato(cfg: &RunConfig, out: &Output) -> Written {
    let kc = cfg.kato.clone().unwrap_or_default();
    let report = kato_check(&potential(cfg)?, &cfg.params, &kc)?;
    Ok(vec![out.json("kato.json", &report)?])
}
