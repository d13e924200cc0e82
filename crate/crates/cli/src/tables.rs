//! `lambda` and `density` subcommands.

use std::f64::consts::PI;

use clap::ValueEnum;
use focusopt::spectrum::{energy_density, half_max_radius, Convention, DensityMode, SpectralTable, DENSITY_FLOOR};
use focusopt::Error;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Table;

/// Plotted curves divide the surface-measure values by this at `d = 3`.
pub fn normalizer(config: &RunConfig) -> f64 {
    match (config.convention(), config.d) {
        (Convention::SurfaceMeasure, 3) => 2f64.powf(3.5) * PI.powf(2.5),
        _ => 1.0,
    }
}

pub fn lambda_table(config: &RunConfig) -> CliResult<Table> {
    let radii = config.radii();
    let spectral = SpectralTable::build(config.d, config.kmax, &radii, config.convention())?;
    let scale = normalizer(config);
    let mut table = Table::new(std::iter::once("R".to_string()).chain((0..=config.kmax).map(|k| format!("lambda_{k}"))));
    for (i, &r) in radii.iter().enumerate() {
        let mut row = vec![r];
        row.extend(spectral.row(i).iter().map(|v| v / scale));
        table.rows.push(row);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Scalar,
    Maxwell,
}

pub fn density_table(config: &RunConfig, mode: ModeArg) -> CliResult<Table> {
    if config.r_min < DENSITY_FLOOR {
        return Err(CliError::usage(format!(
            "density needs --r-min >= {DENSITY_FLOOR}, got {}",
            config.r_min
        )));
    }
    let mode = match mode {
        ModeArg::Scalar => DensityMode::Scalar { k: 0 },
        ModeArg::Maxwell => DensityMode::Maxwell,
    };
    let conv = config.convention();
    let radii = config.radii();
    let values = radii
        .iter()
        .map(|&r| energy_density(config.d, r, mode, conv))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(["R", "density"]);
    table.rows = radii.iter().zip(values).map(|(r, v)| vec![*r, v]).collect();
    let half = match half_max_radius(config.d, mode, conv, config.r_step, config.r_max) {
        Ok(r) => Some(r),
        Err(Error::Bracket { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    table.footer.push(("half_max_radius".into(), half));
    Ok(table)
}
