//! `crossings` subcommand: sign changes of `Λ_{d,0} − Λ_{d,1}` and of the
//! criterion margin over the R lattice.

use focusopt::spectrum::{criterion_margin, lambda, sign_change_brackets, try_find_crossing, CROSSING_TOL};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliResult;

#[derive(Debug, Serialize)]
pub struct Crossing {
    /// First root on the lattice, `null` without a sign change.
    pub root: Option<f64>,
    pub roots: Vec<f64>,
    pub brackets: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
pub struct CrossingsReport<'a> {
    pub config: &'a RunConfig,
    pub tolerance: f64,
    pub scalar_crossing: Crossing,
    pub criterion_crossing: Crossing,
}

fn locate<F>(radii: &[f64], f: F) -> CliResult<Crossing>
where
    F: Fn(f64) -> focusopt::Result<f64>,
{
    let values = radii.iter().map(|&r| f(r)).collect::<focusopt::Result<Vec<_>>>()?;
    let brackets = sign_change_brackets(radii, &values);
    let roots = brackets
        .iter()
        .map(|&(a, b)| try_find_crossing(&f, a, b, CROSSING_TOL))
        .collect::<focusopt::Result<Vec<_>>>()?;
    Ok(Crossing {
        root: roots.first().copied(),
        roots,
        brackets: brackets.into_iter().map(|(a, b)| [a, b]).collect(),
    })
}

pub fn crossings(config: &RunConfig) -> CliResult<CrossingsReport<'_>> {
    let (d, conv) = (config.d, config.convention());
    let radii = config.radii();
    let scalar = locate(&radii, |r| Ok(lambda(d, 0, r, conv)? - lambda(d, 1, r, conv)?))?;
    let criterion = locate(&radii, |r| Ok(criterion_margin(d, r, conv)?.margin))?;
    Ok(CrossingsReport {
        config,
        tolerance: CROSSING_TOL,
        scalar_crossing: scalar,
        criterion_crossing: criterion,
    })
}
