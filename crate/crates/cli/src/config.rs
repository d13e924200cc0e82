use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use focusopt::spectrum::Convention;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConventionArg {
    Surface,
    Oracle,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Surface => Convention::SurfaceMeasure,
            ConventionArg::Oracle => Convention::OracleConsistent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

/// Options shared by every subcommand. Flags win over `FOCUSOPT_*` variables,
/// which win over the defaults.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Ambient dimension
    #[arg(long = "d", global = true, env = "FOCUSOPT_D", default_value_t = 3)]
    pub d: usize,
    /// Smallest radius of the R lattice
    #[arg(long, global = true, env = "FOCUSOPT_R_MIN", default_value_t = 0.05, allow_negative_numbers = true)]
    pub r_min: f64,
    /// Largest radius of the R lattice
    #[arg(long, global = true, env = "FOCUSOPT_R_MAX", default_value_t = 2.0 * PI, allow_negative_numbers = true)]
    pub r_max: f64,
    /// Lattice spacing
    #[arg(long, global = true, env = "FOCUSOPT_R_STEP", default_value_t = 0.05, allow_negative_numbers = true)]
    pub r_step: f64,
    /// Highest harmonic degree
    #[arg(long, global = true, env = "FOCUSOPT_KMAX", default_value_t = 3)]
    pub kmax: usize,
    /// Sphere grid resolution
    #[arg(long, global = true, env = "FOCUSOPT_RESOLUTION", default_value_t = 24)]
    pub resolution: usize,
    #[arg(long, global = true, env = "FOCUSOPT_CONVENTION", value_enum, default_value_t = ConventionArg::Oracle)]
    pub convention: ConventionArg,
    #[arg(long, global = true, env = "FOCUSOPT_FORMAT", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output when absent
    #[arg(long, global = true, env = "FOCUSOPT_OUT")]
    pub out: Option<PathBuf>,
}

/// Validated run configuration. The output path is not part of the
/// serialized form so reports do not depend on where they are written.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub d: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub kmax: usize,
    pub resolution: usize,
    pub convention: ConventionArg,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl TryFrom<ConfigArgs> for RunConfig {
    type Error = CliError;

    fn try_from(a: ConfigArgs) -> CliResult<Self> {
        if a.d < 2 {
            return Err(CliError::usage(format!("--d must be at least 2, got {}", a.d)));
        }
        if !(a.r_min > 0.0) || !a.r_min.is_finite() {
            return Err(CliError::usage(format!("--r-min must be positive, got {}", a.r_min)));
        }
        if !(a.r_step > 0.0) || !a.r_step.is_finite() {
            return Err(CliError::usage(format!("--r-step must be positive, got {}", a.r_step)));
        }
        if !(a.r_max >= a.r_min) || !a.r_max.is_finite() {
            return Err(CliError::usage(format!(
                "--r-max must be at least --r-min ({}), got {}",
                a.r_min, a.r_max
            )));
        }
        if a.resolution < 8 {
            return Err(CliError::usage(format!("--resolution must be at least 8, got {}", a.resolution)));
        }
        Ok(RunConfig {
            d: a.d,
            r_min: a.r_min,
            r_max: a.r_max,
            r_step: a.r_step,
            kmax: a.kmax,
            resolution: a.resolution,
            convention: a.convention,
            format: a.format,
            out: a.out,
        })
    }
}

impl RunConfig {
    pub fn convention(&self) -> Convention {
        self.convention.into()
    }

    /// `r_min, r_min + step, …` up to `r_max`; a single point when the step
    /// overshoots the range.
    pub fn radii(&self) -> Vec<f64> {
        let span = (self.r_max - self.r_min) / self.r_step;
        let n = (span + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.r_min + i as f64 * self.r_step).collect()
    }
}
