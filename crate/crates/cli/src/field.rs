//! `field` subcommand: synthesized fields at user-supplied points.

use std::io::BufRead;
use std::sync::Arc;

use clap::ValueEnum;
use focusopt::fields::{masked_optimum, standard_family, synthesize_many, Density, ScalarDensity, TangentDensity};
use focusopt::fields::HarmonicPolynomial;
use focusopt::quadrature::sphere_grid;
use focusopt::Complex64;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityArg {
    /// The extremal tangent density `ℓ`
    Ell,
    /// `f ≡ 1`
    Constant,
    /// First shipped harmonic of degree `--k`
    Harmonic,
    /// `ℓ` restricted to the band `|ξ₁| < --band`
    Masked,
}

/// One point per line, coordinates separated by commas or whitespace. Blank
/// lines and lines starting with `#` are skipped.
pub fn parse_points<R: BufRead>(reader: R, d: usize) -> CliResult<Vec<Vec<f64>>> {
    let mut points = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(CliError::Input)?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let coords = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse { line: i + 1, message: format!("not a number: {s:?}") })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        if coords.len() != d {
            return Err(CliError::Parse {
                line: i + 1,
                message: format!("expected {d} coordinates, found {}", coords.len()),
            });
        }
        points.push(coords);
    }
    Ok(points)
}

pub fn field_table(
    config: &RunConfig,
    density: DensityArg,
    k: usize,
    band: f64,
    points: &[Vec<f64>],
) -> CliResult<Table> {
    let d = config.d;
    let grid = Arc::new(sphere_grid(d, config.resolution)?);
    let boxed: Box<dyn Density> = match density {
        DensityArg::Ell => Box::new(TangentDensity::ell(grid)),
        DensityArg::Constant => Box::new(ScalarDensity::constant(grid, Complex64::new(1.0, 0.0))),
        DensityArg::Harmonic => {
            let p = standard_family(d, k)[0];
            Box::new(ScalarDensity::from_fn(grid, |xi| Complex64::new(p.eval(xi), 0.0))?)
        }
        DensityArg::Masked => {
            if !(band > 0.0) {
                return Err(CliError::usage(format!("--band must be positive, got {band}")));
            }
            Box::new(masked_optimum(grid, |xi| xi[0].abs() < band)?.0)
        }
    };
    let components = boxed.components();
    let tangent = components > 1;
    let mut columns: Vec<String> = (0..d).map(|a| format!("x{a}")).collect();
    for j in 0..components {
        columns.push(format!("e{j}_re"));
        columns.push(format!("e{j}_im"));
    }
    columns.push("abs_e".into());
    let b_len = if !tangent { 0 } else if d == 3 { 3 } else { 1 };
    for j in 0..b_len {
        columns.push(format!("b{j}_re"));
        columns.push(format!("b{j}_im"));
    }
    let mut table = Table::new(columns);
    for s in synthesize_many(boxed.as_ref(), points)? {
        let mut row = s.x.clone();
        for e in &s.e {
            row.extend([e.re, e.im]);
        }
        row.push(s.e.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt());
        for b in s.b.iter().take(b_len) {
            row.extend([b.re, b.im]);
        }
        table.rows.push(row);
    }
    Ok(table)
}
