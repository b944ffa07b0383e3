//! Log-spaced radial table of `p(1, r)` with cubic Hermite interpolation of
//! `ln p` against `ln r`, plus the small- and large-radius expansions.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::density::{
    density_at_origin, origin_curvature, radial_by_quadrature, tail_coefficients, tail_value,
};
use super::params::StableParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"FPDT";
const FORMAT_VERSION: u32 = 1;

/// Table construction knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TableConfig {
    /// Nodes per unit of `ln r`.
    pub resolution: usize,
    /// Smallest tabulated scaled radius; a Taylor expansion is used below.
    pub r_min: f64,
    /// Scaled radius beyond which the tail expansion replaces the table.
    pub switch_radius: f64,
    /// Directory for on-disk tables; `None` disables disk caching.
    pub cache_dir: Option<PathBuf>,
}

impl Default for TableConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            r_min: 1e-3,
            switch_radius: 100.0,
            cache_dir: None,
        }
    }
}

impl TableConfig {
    fn validate(&self, params: &StableParams) -> Result<()> {
        if self.resolution < 4 {
            return Err(Error::param("resolution", "need at least 4 nodes per unit of ln r"));
        }
        if !(self.r_min > 0.0 && self.r_min < 0.1) {
            return Err(Error::param("r_min", "must lie in (0, 0.1)"));
        }
        let limit = super::density::quadrature_limit(params.dim());
        if !(self.switch_radius > 1.0 && self.switch_radius <= limit) {
            return Err(Error::param(
                "switch_radius",
                format!("must lie in (1, {limit}]"),
            ));
        }
        Ok(())
    }
}

/// Tabulated unit-time radial density.
#[derive(Debug)]
pub struct DensityTable {
    params: StableParams,
    resolution: usize,
    r_min: f64,
    switch_radius: f64,
    u0: f64,
    h: f64,
    ln_p: Vec<f64>,
    slope: Vec<f64>,
    p0: f64,
    curvature: f64,
    tail: Vec<f64>,
    envelope_c: OnceLock<f64>,
}

type Key = (u64, usize, usize, u64, u64);

fn memo() -> &'static Mutex<HashMap<Key, Arc<DensityTable>>> {
    static M: OnceLock<Mutex<HashMap<Key, Arc<DensityTable>>>> = OnceLock::new();
    M.get_or_init(|| Mutex::new(HashMap::new()))
}

impl DensityTable {
    /// Returns a shared table, building it (or loading it from the disk cache)
    /// on first use.
    pub fn shared(params: &StableParams, config: &TableConfig) -> Result<Arc<DensityTable>> {
        config.validate(params)?;
        let key = (
            params.alpha().to_bits(),
            params.dim(),
            config.resolution,
            config.r_min.to_bits(),
            config.switch_radius.to_bits(),
        );
        if let Some(t) = memo().lock().expect("table memo poisoned").get(&key) {
            return Ok(t.clone());
        }
        let table = match &config.cache_dir {
            Some(dir) => {
                let path = dir.join(cache_file_name(params, config));
                match Self::load(&path) {
                    Ok(t) if t.matches(params, config) => t,
                    _ => {
                        let t = Self::build(params, config)?;
                        fs::create_dir_all(dir)?;
                        t.save(&path)?;
                        t
                    }
                }
            }
            None => Self::build(params, config)?,
        };
        let table = Arc::new(table);
        memo()
            .lock()
            .expect("table memo poisoned")
            .entry(key)
            .or_insert(table.clone());
        Ok(table)
    }

    /// Builds a table by direct quadrature at every node.
    pub fn build(params: &StableParams, config: &TableConfig) -> Result<DensityTable> {
        config.validate(params)?;
        let h = 1.0 / config.resolution as f64;
        let u0 = config.r_min.ln();
        let n = ((config.switch_radius.ln() - u0) / h).ceil() as usize + 1;
        let mut ln_p = Vec::with_capacity(n);
        let mut slope = Vec::with_capacity(n);
        for i in 0..n {
            let r = (u0 + i as f64 * h).exp();
            let v = radial_by_quadrature(params, r)?;
            ln_p.push(v.p.ln());
            slope.push(r * v.dp / v.p);
        }
        limit_slopes(&ln_p, &mut slope, h);
        Ok(Self::assemble(params, config, u0, h, ln_p, slope))
    }

    fn assemble(
        params: &StableParams,
        config: &TableConfig,
        u0: f64,
        h: f64,
        ln_p: Vec<f64>,
        slope: Vec<f64>,
    ) -> DensityTable {
        DensityTable {
            params: *params,
            resolution: config.resolution,
            r_min: config.r_min,
            switch_radius: config.switch_radius,
            u0,
            h,
            ln_p,
            slope,
            p0: density_at_origin(params),
            curvature: origin_curvature(params),
            tail: tail_coefficients(params, config.switch_radius),
            envelope_c: OnceLock::new(),
        }
    }

    fn matches(&self, params: &StableParams, config: &TableConfig) -> bool {
        self.params == *params
            && self.resolution == config.resolution
            && self.r_min == config.r_min
            && self.switch_radius == config.switch_radius
    }

    pub fn params(&self) -> &StableParams {
        &self.params
    }

    pub fn switch_radius(&self) -> f64 {
        self.switch_radius
    }

    pub fn len(&self) -> usize {
        self.ln_p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_p.is_empty()
    }

    /// `p(1, 0)`.
    pub fn peak(&self) -> f64 {
        self.p0
    }

    /// `p(1, r)` for a scaled radius `r >= 0`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        if r < self.r_min {
            return self.p0 - self.curvature * r * r;
        }
        if r > self.switch_radius {
            return tail_value(&self.params, &self.tail, r).p;
        }
        let u = (r.ln() - self.u0) / self.h;
        let i = (u.floor() as usize).min(self.ln_p.len() - 2);
        let s = u - i as f64;
        let (y0, y1) = (self.ln_p[i], self.ln_p[i + 1]);
        let (m0, m1) = (self.slope[i] * self.h, self.slope[i + 1] * self.h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        v.exp()
    }

    /// Smallest `C` with `1/C <= p(1, r) / min(r^{-d-α}, 1) <= C` over a
    /// log-spaced radius grid covering every regime of the table.
    pub fn envelope_constant(&self) -> f64 {
        *self.envelope_c.get_or_init(|| {
            let e = self.params.tail_exponent();
            let (lo, hi) = ((self.r_min * 0.1).ln(), (self.switch_radius * 1e3).ln());
            let n = 4000;
            let mut c: f64 = 1.0;
            // r = 1 is the kink of the envelope, where the ratio is extreme.
            let grid = (0..=n).map(|i| (lo + (hi - lo) * i as f64 / n as f64).exp());
            for r in grid.chain(std::iter::once(1.0)) {
                let ratio = self.eval(r) / r.powf(-e).min(1.0);
                c = c.max(ratio).max(1.0 / ratio);
            }
            // The ratio is constant beyond the grid up to the neglected tail terms.
            c * (1.0 + 1e-9)
        })
    }

    /// Writes the table in the versioned binary format.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(64 + 16 * self.ln_p.len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&self.params.alpha().to_le_bytes());
        buf.extend_from_slice(&(self.params.dim() as u64).to_le_bytes());
        buf.extend_from_slice(&(self.resolution as u64).to_le_bytes());
        buf.extend_from_slice(&self.r_min.to_le_bytes());
        buf.extend_from_slice(&self.switch_radius.to_le_bytes());
        buf.extend_from_slice(&(self.ln_p.len() as u64).to_le_bytes());
        for v in self.ln_p.iter().chain(&self.slope) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(tmp, path)?;
        Ok(())
    }

    /// Reads a table written by [`DensityTable::save`].
    pub fn load(path: &Path) -> Result<DensityTable> {
        let mut buf = Vec::new();
        fs::File::open(path)?.read_to_end(&mut buf)?;
        let bad = |reason: &str| Error::Format {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        };
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(4).ok_or_else(|| bad("truncated header"))? != MAGIC {
            return Err(bad("wrong magic"));
        }
        let version = u32::from_le_bytes(cur.take(4).ok_or_else(|| bad("truncated header"))?.try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }
        let alpha = cur.f64().ok_or_else(|| bad("truncated header"))?;
        let d = cur.u64().ok_or_else(|| bad("truncated header"))? as usize;
        let resolution = cur.u64().ok_or_else(|| bad("truncated header"))? as usize;
        let r_min = cur.f64().ok_or_else(|| bad("truncated header"))?;
        let switch_radius = cur.f64().ok_or_else(|| bad("truncated header"))?;
        let n = cur.u64().ok_or_else(|| bad("truncated header"))? as usize;
        if !(2..=10_000_000).contains(&n) {
            return Err(bad("implausible node count"));
        }
        let mut vals = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            vals.push(cur.f64().ok_or_else(|| bad("truncated data"))?);
        }
        if cur.pos != buf.len() {
            return Err(bad("trailing bytes"));
        }
        let params = StableParams::new(alpha, d)?;
        let config = TableConfig {
            resolution,
            r_min,
            switch_radius,
            cache_dir: None,
        };
        config.validate(&params)?;
        let h = 1.0 / resolution as f64;
        let u0 = r_min.ln();
        if n != ((switch_radius.ln() - u0) / h).ceil() as usize + 1 {
            return Err(bad("node count inconsistent with header"));
        }
        let slope = vals.split_off(n);
        Ok(Self::assemble(&params, &config, u0, h, vals, slope))
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn f64(&mut self) -> Option<f64> {
        self.take(8).map(|b| f64::from_le_bytes(b.try_into().unwrap()))
    }
    fn u64(&mut self) -> Option<u64> {
        self.take(8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
    }
}

fn cache_file_name(params: &StableParams, config: &TableConfig) -> String {
    format!(
        "density_a{:016x}_d{}_n{}_lo{:016x}_sw{:016x}.fpdt",
        params.alpha().to_bits(),
        params.dim(),
        config.resolution,
        config.r_min.to_bits(),
        config.switch_radius.to_bits()
    )
}

/// Fritsch-Carlson safeguard: keeps the interpolant monotone between nodes.
fn limit_slopes(y: &[f64], m: &mut [f64], h: f64) {
    for i in 0..y.len() - 1 {
        let delta = (y[i + 1] - y[i]) / h;
        if delta == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let (a, b) = (m[i] / delta, m[i + 1] / delta);
        if a < 0.0 {
            m[i] = 0.0;
        }
        if b < 0.0 {
            m[i + 1] = 0.0;
        }
        let s = a * a + b * b;
        if s > 9.0 {
            let tau = 3.0 / s.sqrt();
            m[i] = tau * a * delta;
            m[i + 1] = tau * b * delta;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interpolates_cauchy() {
        let p = StableParams::new(1.0, 1).unwrap();
        let t = DensityTable::build(&p, &TableConfig::default()).unwrap();
        for i in 0..500 {
            let r = 10f64.powf(-4.0 + 7.0 * i as f64 / 499.0);
            let want = 1.0 / (PI * (1.0 + r * r));
            assert!((t.eval(r) / want - 1.0).abs() < 1e-9, "r={r}");
        }
    }

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let p = StableParams::new(1.3, 1).unwrap();
        let cfg = TableConfig {
            resolution: 16,
            ..TableConfig::default()
        };
        let t = DensityTable::build(&p, &cfg).unwrap();
        let path = dir.path().join("t.fpdt");
        t.save(&path).unwrap();
        let u = DensityTable::load(&path).unwrap();
        assert_eq!(t.ln_p, u.ln_p);
        assert_eq!(t.slope, u.slope);
        assert_eq!(t.eval(2.5), u.eval(2.5));

        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(DensityTable::load(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn rejects_bad_config() {
        let p = StableParams::new(1.0, 1).unwrap();
        let cfg = TableConfig {
            switch_radius: 0.5,
            ..TableConfig::default()
        };
        assert!(DensityTable::build(&p, &cfg).is_err());
    }
}
