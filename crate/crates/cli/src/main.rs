//! `focusopt`: spectral tables, energy densities, crossings, field samples and
//! the verification suite.

mod config;
mod crossings;
mod error;
mod field;
mod output;
mod tables;
mod verify;

use std::io::BufReader;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigArgs, RunConfig};
use error::{CliError, CliResult};
use output::{emit, pretty};

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of Λ_{d,k}(R) for k = 0..kmax
    Lambda,
    /// Energy density against R, with its half-maximum radius
    Density {
        #[arg(long, value_enum, default_value_t = tables::ModeArg::Scalar)]
        mode: tables::ModeArg,
    },
    /// Roots of Λ_{d,0} − Λ_{d,1} and of the criterion margin
    Crossings,
    /// Run every invariant check and report pass/fail
    Verify,
    /// Synthesize a field at points read from a file or standard input
    Field {
        #[arg(long, value_enum, default_value_t = field::DensityArg::Ell)]
        density: field::DensityArg,
        /// Degree for `--density harmonic`
        #[arg(long, default_value_t = 0)]
        k: usize,
        /// Half-width of the band `|ξ₁| < band` for `--density masked`
        #[arg(long, default_value_t = 0.2)]
        band: f64,
        /// Points file, one point per line; `-` reads standard input
        #[arg(long, default_value = "-")]
        points: PathBuf,
    },
}

fn threads_from_env() -> CliResult<()> {
    let Ok(raw) = std::env::var("FOCUSOPT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("FOCUSOPT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<i32> {
    threads_from_env()?;
    let config = RunConfig::try_from(cli.config)?;
    let out = config.out.clone();
    let (text, code) = match cli.command {
        Command::Lambda => (tables::lambda_table(&config)?.render(&config), 0),
        Command::Density { mode } => (tables::density_table(&config, mode)?.render(&config), 0),
        Command::Crossings => (pretty(&crossings::crossings(&config)?), 0),
        Command::Verify => {
            let report = verify::verify(&config)?;
            (pretty(&report), if report.passed { 0 } else { 1 })
        }
        Command::Field { density, k, band, points } => {
            let pts = if points.as_os_str() == "-" {
                field::parse_points(std::io::stdin().lock(), config.d)?
            } else {
                let file = std::fs::File::open(&points).map_err(CliError::Input)?;
                field::parse_points(BufReader::new(file), config.d)?
            };
            (field::field_table(&config, density, k, band, &pts)?.render(&config), 0)
        }
    };
    emit(out.as_deref(), &text)?;
    Ok(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("focusopt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
