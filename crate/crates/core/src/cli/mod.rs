//! Configuration-driven command line front end.

pub mod commands;
pub mod config;
pub mod oracle;
pub mod schema;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::{Error, Result};
pub use commands::{config_hash, sha256_hex, Context};
pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const WORKERS_ENV: &str = "SPINBATH_WORKERS";
pub const METADATA_FILE: &str = "metadata.json";

#[derive(Debug, Parser)]
#[command(
    name = "spinbath",
    version,
    about = "Central-spin decoherence, register control and readout simulations"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample a bath and write it with its hash.
    BathGen,
    /// Cluster-correlation coherence curve of the electron or a nuclear register.
    CceRun,
    /// Filter-function coherence curve for a classical noise spectrum.
    NoiseRun,
    /// XY8 spectroscopy of a register or a quasi-static ensemble curve.
    SeqRun,
    /// Repetitive readout trace, histograms, threshold and T1.
    QndSim,
    /// Stretched-exponential, oscillation or lower-bound fit of a CSV series.
    Fit,
    /// Ramsey and Hahn 1/e times against diode bias.
    BiasScan,
    /// Exact-evolution and closed-form self test.
    OracleCheck,
    /// Print the configuration reference.
    Schema,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::BathGen => "bath-gen",
            Command::CceRun => "cce-run",
            Command::NoiseRun => "noise-run",
            Command::SeqRun => "seq-run",
            Command::QndSim => "qnd-sim",
            Command::Fit => "fit",
            Command::BiasScan => "bias-scan",
            Command::OracleCheck => "oracle-check",
            Command::Schema => "schema",
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::Parse(_)
        | Error::UnsupportedSpin(_)
        | Error::UnsupportedPulse { .. }
        | Error::BelowCutoff { .. }
        | Error::NearZeroDenominator(_)
        | Error::DimensionTooLarge { .. } => EXIT_VALIDATION,
        Error::NotHermitian { .. } | Error::Numerical(_) => EXIT_NUMERICAL,
        _ => EXIT_OTHER,
    }
}

fn load(cli: &Cli) -> Result<Context> {
    let (text, config_dir) = match &cli.config {
        Some(path) => (
            fs::read_to_string(path).map_err(|e| Error::Config(vec![format!("{}: {e}", path.display())]))?,
            path.parent().map(PathBuf::from).unwrap_or_default(),
        ),
        None => (String::new(), PathBuf::from(".")),
    };
    let mut config = RunConfig::parse(&text, cli.command.name())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.to_string_lossy().into_owned();
    }
    Ok(Context {
        command: cli.command.name().into(),
        out: PathBuf::from(&config.output_dir),
        config,
        config_dir,
        verbose: cli.verbose,
    })
}

/// Runs one subcommand and writes its metadata sidecar.
pub fn execute(cli: &Cli) -> Result<()> {
    if cli.command == Command::Schema {
        print!("{}", schema::reference());
        return Ok(());
    }
    let ctx = load(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config(vec!["--workers: must be >= 1".into()]));
        }
        pool = pool.num_threads(n);
    }
    fs::create_dir_all(&ctx.out)?;
    let pool = pool.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results = pool.install(|| commands::dispatch(&ctx))?;
    let metadata = json!({
        "command": ctx.command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": ctx.config.seed,
        "config_sha256": config_hash(&ctx.config),
        "results": results,
    });
    let body = serde_json::to_string_pretty(&metadata).map_err(|e| Error::Numerical(e.to_string()))?;
    fs::write(ctx.out.join(METADATA_FILE), body + "\n")?;
    if ctx.verbose {
        eprintln!("[{}] done; outputs in {}", ctx.command, ctx.out.display());
    }
    Ok(())
}

/// Parses `args`, runs, reports errors on stderr and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
