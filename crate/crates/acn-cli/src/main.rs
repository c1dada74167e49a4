//! `acn`: batch experiment runner for analog combining network design.
//!
//! Every subcommand reads one TOML experiment config (`--config`), writes a
//! deterministic report to `--out` or stdout, and exits with 0 on success,
//! 1 on usage or input errors, 2 when the requested design is infeasible,
//! and 3 when a validation command finds a failing check.

mod commands;
mod config;
mod output;

use acn_core::AcnError;
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "acn", version, about = "Analog combining network design and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// RNG seed; overrides the config's `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Grid override for the command's main sweep axis (azimuth points for
    /// sweep-aoa, rate-product points for sweep-alpha).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the optimal rotation-rate design as CSV.
    Design,
    /// Sweep the angle of arrival: SNR sums and burst error per scheme.
    SweepAoa,
    /// Sweep the rate-period product: worst-offset burst error.
    SweepAlpha,
    /// Compare the combining schemes at one angle of arrival.
    Compare,
    /// Validate the analytic pipeline against seeded simulation.
    Montecarlo,
    /// Run the analytic self-checks and report PASS/FAIL per property.
    VerifyTheory,
}

/// Command failures, mapped onto the documented exit codes.
pub enum CliError {
    /// Bad invocation or unusable input: exit 1.
    Usage(String),
    /// Core-library error: exit 2 for infeasible designs, 1 otherwise.
    Core(AcnError),
    /// A validation command found a failing check: exit 3.
    Validation(String),
}

impl From<AcnError> for CliError {
    fn from(e: AcnError) -> Self {
        Self::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(msg) | Self::Validation(msg) => f.write_str(msg),
            Self::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Core(AcnError::Infeasible(_)) => 2,
            Self::Core(_) => 1,
            Self::Validation(_) => 3,
        }
    }
}

/// Everything a command needs: the parsed config, its raw bytes (hashed
/// into output headers), the directory pattern paths resolve against, and
/// the resolved flag values.
pub struct Ctx {
    pub cfg: ExperimentConfig,
    pub raw: Vec<u8>,
    pub dir: PathBuf,
    pub seed: u64,
    pub grid: Option<usize>,
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Usage("a --config file is required".into()))?;
    let (cfg, raw, dir) = ExperimentConfig::load(&path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let ctx = Ctx {
        cfg,
        raw,
        dir,
        seed,
        grid: cli.grid,
        out: cli.out,
    };
    match cli.command {
        Command::Design => commands::design(&ctx),
        Command::SweepAoa => commands::sweep_aoa(&ctx),
        Command::SweepAlpha => commands::sweep_alpha(&ctx),
        Command::Compare => commands::compare(&ctx),
        Command::Montecarlo => commands::montecarlo(&ctx),
        Command::VerifyTheory => commands::verify_theory(&ctx),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("acn: {e}");
        std::process::exit(e.exit_code());
    }
}
