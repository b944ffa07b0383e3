use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracphi_cli::{run, CommandName, Overrides};

#[derive(Parser)]
#[command(name = "fracphi", version, about = "Fractional P(phi)_1 processes: densities, spectra, Feynman-Kac, Gibbs measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed; overrides mc.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; overrides mc.threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Override a config value, e.g. `--set grid.n_points=512`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ConfigArg {
    /// TOML run configuration.
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Transition density with its two-sided envelope.
    Density(ConfigArg),
    /// Low-lying spectrum and ground state.
    Spectrum(ConfigArg),
    /// Feynman-Kac Monte Carlo estimates.
    Fk(ConfigArg),
    /// Intrinsic ultracontractivity classification and scans.
    Iuc(ConfigArg),
    /// Gibbs measure checks: DLR, boundary convergence, chain, typical paths.
    Gibbs(ConfigArg),
    /// Sample stable paths, bridges or ground-state chain paths.
    Paths(ConfigArg),
    /// Kato class check of the potential.
    Kato(ConfigArg),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, arg) = match &cli.command {
        Command::Density(a) => (CommandName::Density, a),
        Command::Spectrum(a) => (CommandName::Spectrum, a),
        Command::Fk(a) => (CommandName::Fk, a),
        Command::Iuc(a) => (CommandName::Iuc, a),
        Command::Gibbs(a) => (CommandName::Gibbs, a),
        Command::Paths(a) => (CommandName::Paths, a),
        Command::Kato(a) => (CommandName::Kato, a),
    };
    let overrides = Overrides {
        seed: cli.seed,
        threads: cli.threads,
        set: cli.set.clone(),
    };
    match run(name, &arg.config, &overrides, &cli.out_dir) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
