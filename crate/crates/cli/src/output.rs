//! Output files: CSV curves with a `#` header block and JSON documents with
//! a `meta` object.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Output {
    dir: PathBuf,
    command: String,
    sha256: String,
}

#[derive(Serialize)]
struct Meta<'a> {
    version: &'a str,
    command: &'a str,
    config_sha256: &'a str,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: Meta<'a>,
    result: &'a T,
}

impl Output {
    pub fn new(dir: &Path, command: &str, sha256: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Output {
            path: dir.display().to_string(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            sha256: sha256.to_string(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|source| CliError::Output {
            path: path.display().to_string(),
            source,
        })?;
        Ok(path)
    }

    pub fn csv(&self, name: &str, columns: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        let mut text = String::new();
        let _ = writeln!(text, "# fracphi {VERSION}");
        let _ = writeln!(text, "# command {}", self.command);
        let _ = writeln!(text, "# config-sha256 {}", self.sha256);
        text.push_str(&columns.join(","));
        text.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        self.write(name, text.as_bytes())
    }

    pub fn json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf, CliError> {
        let doc = Document {
            meta: Meta {
                version: VERSION,
                command: &self.command,
                config_sha256: &self.sha256,
            },
            result,
        };
        let mut bytes = serde_json::to_vec_pretty(&doc).map_err(fracphi_core::Error::from)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }
}
