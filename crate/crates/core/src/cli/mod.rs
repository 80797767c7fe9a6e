//! Command-line front end: configuration, stage caching and report files.

mod cache;
mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use cache::{stage_key, Cache};
pub use commands::{
    morse_report, oracle_comparison, profile_stage, spectrum_stage, sweep_csv, OracleComparison, OracleRow,
    ProfileStage, SpectrumRecord, SpectrumStage,
};
pub use config::{OracleSettings, RunConfig, SweepAxis, SweepSettings};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("oracle mismatch: {0}")]
    Mismatch(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io { .. } => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "henon-morse",
    version,
    about = "Nodal radial solutions of the Hénon problem, their singular spectra and Morse indices",
    after_help = "Settings are taken from the defaults, then --config, then flags.\n\
                  Exit codes: 0 success, 2 config error, 3 solver failure, 4 oracle mismatch."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Space dimension.
    #[arg(long = "N", global = true)]
    pub n: Option<u32>,
    /// Hénon weight exponent.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Power exponent.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Nodal zones.
    #[arg(long, global = true)]
    pub m: Option<usize>,
    /// Eigenvalues per spectrum.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Minimum fine-grid size.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Cap on the Liouville domain length.
    #[arg(long, global = true)]
    pub xmax: Option<f64>,
    /// Richardson tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Parallel sweep workers.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// `full`, `trivial` or `cyclic-q`.
    #[arg(long, global = true, value_name = "LABEL")]
    pub symmetry: Option<String>,
    /// Stage cache directory, `<out>/cache` by default.
    #[arg(long, global = true, value_name = "DIR")]
    pub cache_dir: Option<PathBuf>,
    /// Neither read nor write the stage cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nodal profile (CSV + JSON).
    Solve,
    /// Singular and standard spectra of the linearization.
    Spectrum {
        /// Use a ≡ 0 instead of the linearized potential.
        #[arg(long)]
        zero_potential: bool,
    },
    /// Morse index report.
    Morse,
    /// Parameter sweep over p or alpha.
    Sweep {
        #[arg(long, value_enum)]
        axis: Option<SweepAxis>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Compare against the dense r-grid oracle.
    Oracle {
        #[arg(long = "oracle-n")]
        oracle_n: Option<usize>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

/// Effective configuration for a parsed command line.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let o = &cli.overrides;
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    macro_rules! set {
        ($src:expr, $dst:expr) => {
            if let Some(v) = $src.clone() {
                $dst = v;
            }
        };
    }
    set!(o.n, cfg.n);
    set!(o.alpha, cfg.alpha);
    set!(o.p, cfg.p);
    set!(o.m, cfg.m);
    set!(o.k, cfg.k);
    set!(o.grid, cfg.spectral.grid);
    set!(o.xmax, cfg.spectral.x_max);
    set!(o.tol, cfg.spectral.tol);
    set!(o.out, cfg.out);
    set!(o.symmetry, cfg.symmetry);
    if o.workers.is_some() {
        cfg.workers = o.workers;
    }
    if o.cache_dir.is_some() {
        cfg.cache = o.cache_dir.clone();
    }
    match &cli.command {
        Command::Spectrum { zero_potential } => cfg.zero_potential |= *zero_potential,
        Command::Sweep {
            axis,
            from,
            to,
            steps,
        } => {
            set!(axis, cfg.sweep.axis);
            set!(from, cfg.sweep.from);
            set!(to, cfg.sweep.to);
            set!(steps, cfg.sweep.steps);
        }
        Command::Oracle { oracle_n, epsilon } => {
            set!(oracle_n, cfg.oracle.n);
            set!(epsilon, cfg.oracle.epsilon);
        }
        Command::Solve | Command::Morse => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run a parsed command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<String>, CliError> {
    let cfg = resolve_config(cli)?;
    let cache = Cache::new(cfg.cache_dir(), !cli.overrides.no_cache);
    match cli.command {
        Command::Solve => commands::cmd_solve(&cfg, &cache),
        Command::Spectrum { .. } => commands::cmd_spectrum(&cfg, &cache),
        Command::Morse => commands::cmd_morse(&cfg, &cache),
        Command::Sweep { .. } => commands::cmd_sweep(&cfg, &cache),
        Command::Oracle { .. } => commands::cmd_oracle(&cfg, &cache),
    }
}

/// Parse, run and report; the return value is the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{f}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
