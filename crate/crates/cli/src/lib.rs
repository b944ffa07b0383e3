//! Command-line front end: configuration loading, output files and one
//! function per subcommand.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

pub use commands::CommandName;
pub use config::{load, load_str, LoadedConfig, Overrides, RunConfig};
pub use error::CliError;
pub use output::Output;

/// Load `config_path`, apply overrides and run `command`, writing into `out_dir`.
pub fn run(command: CommandName, config_path: &Path, overrides: &Overrides, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load(config_path, overrides)?;
    if let Some(n) = loaded.config.mc.threads {
        if n == 0 {
            return Err(CliError::Config("mc.threads must be at least 1".into()));
        }
        // Fails only when a global pool already exists, e.g. in-process reruns.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = Output::new(out_dir, command.as_str(), &loaded.sha256)?;
    commands::execute(command, &loaded.config, &out)
}
