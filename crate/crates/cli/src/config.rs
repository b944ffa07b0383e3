//! Run configuration: one TOML file, optionally patched by `--set key=value`
//! and the global flags.

use std::path::{Path, PathBuf};

use fracphi_core::gibbs::{BoundaryProfile, Constraint};
use fracphi_core::iuc::IUCConfig;
use fracphi_core::potentials::{KatoConfig, PotentialKind};
use fracphi_core::spectral::SpectralConfig;
use fracphi_core::StableParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: StableParams,
    pub grid: Option<GridSection>,
    pub potential: Option<PotentialKind>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub spectral: SpectralConfig,
    pub model: Option<ModelSection>,
    pub density: Option<DensitySection>,
    pub spectrum: Option<SpectrumSection>,
    pub fk: Option<FkSection>,
    pub iuc: Option<IucSection>,
    pub gibbs: Option<GibbsSection>,
    pub paths: Option<PathsSection>,
    pub kato: Option<KatoConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub chunk_size: usize,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_paths: 10_000,
            dt: 0.01,
            seed: None,
            threads: None,
            chunk_size: 4096,
        }
    }
}

/// A saved spectral model to use instead of solving again.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub file: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub t: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSection {
    /// Also write the solved model as `model.fpsm`.
    pub save_model: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FkMode {
    /// `E^x[e^{-∫V}]`.
    Semigroup,
    /// Kernel `u(t, x, y)` from pinned bridges.
    Bridge,
    /// Exponential growth fit of `sup_x T_t 1(x)`.
    Growth,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkSection {
    pub mode: FkMode,
    #[serde(default = "one")]
    pub t: f64,
    /// Start points on the first axis.
    pub points: Vec<f64>,
    /// Bridge end points; defaults to the start points.
    pub targets: Option<Vec<f64>>,
    /// Time grid for `growth`.
    pub times: Option<Vec<f64>>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IucSection {
    pub classifier: IUCConfig,
    /// Time for the weighted tail-mass scan; needs a model.
    pub tail_time: Option<f64>,
    /// Times for the uniform convergence scan; needs a model.
    pub uniform_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DlrSection {
    pub inner: f64,
    pub outer: f64,
    #[serde(default = "default_pairs")]
    pub n_pairs: usize,
    #[serde(default = "default_reach")]
    pub reach: f64,
}

fn default_pairs() -> usize {
    20
}

fn default_reach() -> f64 {
    3.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub half_width: f64,
    pub profile: BoundaryProfile,
    pub event: Vec<Constraint>,
    pub n_grid: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub t_unit: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TypicalSection {
    #[serde(default = "default_typical_paths")]
    pub n_paths: usize,
    pub n_max: usize,
    #[serde(default = "default_n_start")]
    pub n_start: usize,
    /// `a_n = n^{-decay}`.
    pub decay: f64,
    #[serde(default = "default_factor")]
    pub threshold_factor: f64,
    /// `(q, θ)` of the growth envelope `c N^{(1+θ)/q}`.
    pub growth: Option<(f64, f64)>,
}

fn default_typical_paths() -> usize {
    200
}

fn default_n_start() -> usize {
    10
}

fn default_factor() -> f64 {
    10.0
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsSection {
    pub dlr: Option<DlrSection>,
    pub boundary: Option<BoundarySection>,
    pub chain: Option<ChainSection>,
    pub typical: Option<TypicalSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathKind {
    Stable,
    Bridge,
    Chain,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub kind: PathKind,
    pub n_paths: usize,
    /// Stable and bridge paths: time span and number of steps.
    #[serde(default = "one")]
    pub t_end: f64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    /// Start point; `None` starts chain paths from the stationary law.
    pub start: Option<Vec<f64>>,
    /// Bridge end point.
    pub end: Option<Vec<f64>>,
    /// Chain paths: step and number of steps on each side of time 0.
    pub t_unit: Option<f64>,
    #[serde(default)]
    pub back: usize,
}

fn default_steps() -> usize {
    100
}

/// Parsed configuration with its canonical text and hash.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
}

/// Overrides applied after the file is read.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    /// `dotted.key=value`, value in TOML syntax (bare words are strings).
    pub set: Vec<String>,
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::Config(format!("empty key in `{key}`")))?;
    let mut node = table;
    for p in parts {
        let entry = node
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        node = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("`{p}` in `{key}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(text: &str) -> toml::Value {
    let doc = format!("v = {text}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(text.into())),
        Err(_) => toml::Value::String(text.into()),
    }
}

/// Hash of the canonical TOML of `table` without run-environment keys.
fn config_hash(table: &toml::Table) -> Result<String, CliError> {
    let mut t = table.clone();
    if let Some(mc) = t.get_mut("mc").and_then(|v| v.as_table_mut()) {
        mc.remove("threads");
    }
    let text = toml::to_string(&t).map_err(|e| CliError::Config(e.to_string()))?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn load_str(text: &str, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    for item in &overrides.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not key=value")))?;
        set_path(&mut table, k.trim(), parse_value(v.trim()))?;
    }
    if let Some(seed) = overrides.seed {
        let seed = i64::try_from(seed).map_err(|_| CliError::Config("seed must fit in a signed 64-bit integer".into()))?;
        set_path(&mut table, "mc.seed", toml::Value::Integer(seed))?;
    }
    if let Some(threads) = overrides.threads {
        set_path(&mut table, "mc.threads", toml::Value::Integer(threads as i64))?;
    }
    let sha256 = config_hash(&table)?;
    let config: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    Ok(LoadedConfig { config, sha256 })
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    load_str(&text, overrides)
}

impl RunConfig {
    pub fn potential(&self) -> Result<&PotentialKind, CliError> {
        self.potential.as_ref().ok_or_else(|| CliError::missing("potential"))
    }

    pub fn grid(&self) -> Result<&GridSection, CliError> {
        self.grid.as_ref().ok_or_else(|| CliError::missing("grid"))
    }

    /// Seed for stochastic commands.
    pub fn seed(&self) -> Result<u64, CliError> {
        self.mc
            .seed
            .ok_or_else(|| CliError::Config("a seed is required: set mc.seed or pass --seed".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "[params]\nalpha = 1.0\nd = 1\n[mc]\nseed = 4\n";

    #[test]
    fn set_patches_nested_keys_and_parses_values() {
        let o = Overrides {
            set: vec!["grid.half_width=12.5".into(), "grid.n_points=64".into(), "potential.name=zero".into()],
            ..Overrides::default()
        };
        let c = load_str(BASE, &o).unwrap().config;
        assert_eq!(c.grid().unwrap().n_points, 64);
        assert_eq!(c.grid().unwrap().half_width, 12.5);
        assert_eq!(c.potential().unwrap(), &PotentialKind::Zero);
    }

    #[test]
    fn flags_override_file_values() {
        let o = Overrides {
            seed: Some(99),
            ..Overrides::default()
        };
        assert_eq!(load_str(BASE, &o).unwrap().config.seed().unwrap(), 99);
    }

    #[test]
    fn hash_ignores_thread_count_but_not_seed() {
        let h = |o: Overrides| load_str(BASE, &o).unwrap().sha256;
        let base = h(Overrides::default());
        assert_eq!(base, h(Overrides { threads: Some(3), ..Overrides::default() }));
        assert_ne!(base, h(Overrides { seed: Some(5), ..Overrides::default() }));
    }

    #[test]
    fn malformed_input_is_a_config_error() {
        assert!(matches!(load_str("[params]\nalpha = 1.0\n", &Overrides::default()), Err(CliError::Config(_))));
        let bad = Overrides {
            set: vec!["novalue".into()],
            ..Overrides::default()
        };
        assert!(matches!(load_str(BASE, &bad), Err(CliError::Config(_))));
        assert!(load_str("[params]\nalpha = 1.0\nd = 1\n", &Overrides::default()).unwrap().config.seed().is_err());
    }
}
