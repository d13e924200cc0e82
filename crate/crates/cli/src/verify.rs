//! `verify` subcommand: the invariant suites as one machine-readable report.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use focusopt::fields::{
    origin_bound, random_scalar_density, random_tangent_density, synthesize, BoundKind, Density, ScalarDensity,
    TangentDensity,
};
use focusopt::oracle::{
    cluster_eigenvalues, perturbation_check, span_residual, top_eigenpairs, OracleGram, Subspace,
};
use focusopt::quadrature::{sphere_grid, SphereGrid};
use focusopt::specfun::{bessel_j, bessel_j_reference, BesselOrder};
use focusopt::spectrum::{check_monotonicity, criterion_margin, ell_rotate_eigenvalue, h_poly, lambda, ratio_bound_check, Convention};
use focusopt::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
}

/// One check: `observed` is compared against `tolerance` by the rule in `rule`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub status: Status,
    pub observed: f64,
    pub tolerance: f64,
    pub rule: Rule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `observed <= tolerance`
    AtMost,
    /// `observed < tolerance`
    Below,
    /// `observed >= tolerance`
    AtLeast,
    /// `observed > tolerance`
    Above,
    /// `|observed − 1| <= tolerance`
    RatioWithin,
}

impl Check {
    fn new(id: &'static str, observed: f64, rule: Rule, tolerance: f64) -> Self {
        let ok = match rule {
            Rule::AtMost => observed <= tolerance,
            Rule::Below => observed < tolerance,
            Rule::AtLeast => observed >= tolerance,
            Rule::Above => observed > tolerance,
            Rule::RatioWithin => (observed - 1.0).abs() <= tolerance,
        };
        Self {
            id,
            status: if ok { Status::Pass } else { Status::Fail },
            observed,
            tolerance,
            rule,
        }
    }

    fn force_fail(mut self) -> Self {
        self.status = Status::Fail;
        self
    }
}

#[derive(Debug, Serialize)]
pub struct VerifyReport<'a> {
    pub config: &'a RunConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
}

pub const ORACLE_RADII: [f64; 4] = [0.5, 1.0, 2.0, 3.0];
pub const TANGENT_RADII: [f64; 3] = [0.5, 1.5, 2.0];
pub const PERTURBATION_RADII: [f64; 3] = [0.25, 0.5, 1.0];
const SEED: u64 = 0x5eed;

/// The ratio farthest from one.
fn worst_ratio(ratios: impl IntoIterator<Item = f64>) -> f64 {
    ratios
        .into_iter()
        .fold(1.0, |a, b| if !((b - 1.0).abs() <= (a - 1.0).abs()) { b } else { a })
}

fn bessel_checks() -> CliResult<Vec<Check>> {
    let mut worst: f64 = 0.0;
    for n in 0..5 {
        let order = BesselOrder::new(n as f64 + 0.5)?;
        for i in 0..200 {
            let t = 0.05 + (10.0 - 0.05) * i as f64 / 199.0;
            worst = worst.max((bessel_j(order, t)? - bessel_j_reference(order, t)?).abs());
        }
    }
    Ok(vec![Check::new("specfun.cross_validation", worst, Rule::AtMost, 1e-10)])
}

fn quadrature_checks(grid: &SphereGrid) -> CliResult<Vec<Check>> {
    let d = grid.dim();
    let ell2 = |x: &[f64]| 1.0 - x[0] * x[0];
    let want = focusopt::specfun::surface_area(d)? * (d as f64 - 1.0) / d as f64;
    let exact = (grid.integrate_real(ell2) - want).abs();
    let smooth = |x: &[f64]| (x[0] + 0.3 * x[1]).cos() * (0.5 * x[d - 1]).exp();
    let fine = sphere_grid(d, 2 * grid.resolution())?;
    let doubling = (grid.integrate_real(smooth) - fine.integrate_real(smooth)).abs();
    let positive = grid.weights().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::new("quadrature.ell_norm", exact, Rule::AtMost, 1e-12),
        Check::new("quadrature.resolution_doubling", doubling, Rule::AtMost, 1e-10),
        Check::new("quadrature.min_weight", positive, Rule::Above, 0.0),
    ])
}

fn field_checks(grid: &Arc<SphereGrid>) -> CliResult<Vec<Check>> {
    let one = ScalarDensity::constant(Arc::clone(grid), Complex64::new(1.0, 0.0));
    let r_lim = ((grid.resolution() as f64 - 16.0) / 2.0).min(10.0);
    let r_lim = if r_lim > 0.0 { r_lim } else { 10.0 };
    let mut worst: f64 = 0.0;
    for i in 1..=50 {
        let r = r_lim * i as f64 / 50.0;
        let u = synthesize(&one, &[0.0, 0.0, r])?.e[0];
        let want = 4.0 * PI * r.sin() / r;
        worst = worst.max((u - want).norm() / want.abs());
    }

    let scalar = origin_bound(3, BoundKind::Scalar)?;
    let maxwell = origin_bound(3, BoundKind::Maxwell)?;
    let origin = [0.0; 3];
    let magnitude = |d: &dyn Density| -> CliResult<f64> {
        Ok(synthesize(d, &origin)?.e.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
    };
    let mut violations = 0usize;
    for k in 0..100u64 {
        let f = random_scalar_density(Arc::clone(grid), SEED + k, 3)?;
        let e = random_tangent_density(Arc::clone(grid), SEED + k, 3)?;
        if magnitude(&f)? > scalar * f.norm() {
            violations += 1;
        }
        if magnitude(&e)? > maxwell * e.norm() {
            violations += 1;
        }
    }
    let mut saturation = (magnitude(&one.normalized()?)? - scalar).abs();
    for a in 0..3 {
        let rotate = TangentDensity::ell_rotate(Arc::clone(grid), a).normalized()?;
        saturation = saturation.max((magnitude(&rotate)? - maxwell).abs());
    }
    let ratio = (maxwell / scalar).powi(2);
    Ok(vec![
        Check::new("fields.scalar_identity", worst, Rule::AtMost, 1e-9),
        Check::new("fields.pointwise_violations", violations as f64, Rule::AtMost, 0.0),
        Check::new("fields.bound_saturation", saturation, Rule::AtMost, 1e-8),
        Check::new("fields.bound_ratio", (ratio - 2.0 / 3.0).abs(), Rule::AtMost, 1e-15),
    ])
}

fn oracle_checks(grid: &Arc<SphereGrid>, conv: Convention) -> CliResult<Vec<Check>> {
    let mut asymmetry: f64 = 0.0;
    let mut psd = true;
    let mut inspect = |gram: &OracleGram| {
        let inv = gram.invariants();
        asymmetry = asymmetry.max(inv.asymmetry);
        psd &= inv.psd;
    };

    let mut sizes_ok = true;
    let mut ratios = Vec::new();
    for &r in &ORACLE_RADII {
        let gram = OracleGram::assemble(Arc::clone(grid), r, Subspace::FullScalar)?;
        inspect(&gram);
        let values: Vec<f64> = top_eigenpairs(&gram, 16)?.iter().map(|p| p.value).collect();
        let mut wanted = (0..4)
            .map(|k| Ok((2 * k + 1, lambda(3, k, r, conv)?)))
            .collect::<focusopt::Result<Vec<_>>>()?;
        wanted.sort_by(|a, b| b.1.total_cmp(&a.1));
        let clusters = cluster_eigenvalues(&values, 1e-6);
        let mut start = 0;
        for (i, &(size, want)) in wanted.iter().enumerate() {
            sizes_ok &= clusters.get(i).is_some_and(|c| c.size == size);
            ratios.extend(values[start..start + size].iter().map(|v| v / want));
            start += size;
        }
    }
    let mut scalar_check = Check::new("oracle.scalar_spectrum", worst_ratio(ratios), Rule::RatioWithin, 1e-6);
    if !sizes_ok {
        scalar_check = scalar_check.force_fail();
    }

    let rotates = |g: &Arc<SphereGrid>| -> Vec<Vec<f64>> {
        (0..3)
            .map(|a| TangentDensity::ell_rotate(Arc::clone(g), a).values().iter().map(|z| z.re).collect())
            .collect()
    };
    let (mut contract, mut corrected, mut second) = (Vec::new(), Vec::new(), Vec::new());
    let mut residual: f64 = 0.0;
    for &r in &TANGENT_RADII {
        let gram = OracleGram::assemble(Arc::clone(grid), r, Subspace::Tangent)?;
        inspect(&gram);
        let pairs = top_eigenpairs(&gram, 6)?;
        let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
        let clusters = cluster_eigenvalues(&values, 1e-6);
        let top = clusters[0];
        let l0 = lambda(3, 0, r, conv)?;
        let l2 = lambda(3, 2, r, conv)?;
        contract.push(top.mean / ((l0 - l2) * 2.0 / 3.0));
        corrected.push(top.mean / ell_rotate_eigenvalue(3, r, conv)?);
        if let Some(next) = clusters.get(1) {
            second.push(next.mean / lambda(3, 1, r, conv)?);
        }
        let functions: Vec<Vec<f64>> = pairs[top.start..top.start + top.size].iter().map(|p| p.function.clone()).collect();
        residual = residual.max(span_residual(grid, 3, &functions, &rotates(grid)));
    }

    let mut perturbation = 0usize;
    for &r in &PERTURBATION_RADII {
        perturbation += perturbation_check(Arc::clone(grid), r, 20, SEED)?.violations;
    }

    let mut second_check = Check::new("oracle.maxwell_second", worst_ratio(second.iter().copied()), Rule::RatioWithin, 1e-6);
    if second.len() != TANGENT_RADII.len() {
        second_check = second_check.force_fail();
    }
    let mut invariants = Check::new("oracle.gram_symmetry", asymmetry, Rule::AtMost, 1e-13);
    if !psd {
        invariants = invariants.force_fail();
    }
    Ok(vec![
        invariants,
        scalar_check,
        Check::new("oracle.maxwell_top_contract", worst_ratio(contract), Rule::RatioWithin, 1e-6),
        Check::new("oracle.maxwell_top_ell_rotate", worst_ratio(corrected), Rule::RatioWithin, 1e-6),
        Check::new("oracle.maxwell_span_residual", residual, Rule::Below, 1e-6),
        second_check,
        Check::new("oracle.perturbation_violations", perturbation as f64, Rule::AtMost, 0.0),
    ])
}

fn spectrum_checks() -> CliResult<Vec<Check>> {
    let mono = check_monotonicity(3, FRAC_PI_2, 6)?;
    let lattice: Vec<f64> = (1..=20).map(|i| FRAC_PI_2 * i as f64 / 20.0).collect();
    let mut ratio: f64 = 0.0;
    let mut chain = f64::INFINITY;
    let mut margin = f64::INFINITY;
    for &r in &lattice {
        let rb = ratio_bound_check(r)?;
        ratio = ratio.max(rb.ratio10 / (r * r / 16.0)).max(rb.ratio21 / (r * r / 36.0));
        let rep = criterion_margin(3, r, Convention::OracleConsistent)?;
        chain = chain.min(rep.margin / (rep.lambda0 * h_poly(r)));
        margin = margin.min(rep.margin / rep.lambda0);
    }
    Ok(vec![
        Check::new("spectrum.monotonicity", if mono.holds { 0.0 } else { 1.0 }, Rule::AtMost, 0.0),
        Check::new("spectrum.ratio_bounds", ratio, Rule::Below, 1.0),
        Check::new("spectrum.chain_margin_over_h", chain, Rule::AtLeast, 1.0),
        Check::new("spectrum.criterion_margin", margin, Rule::Above, 0.0),
        Check::new("spectrum.h_at_two", (h_poly(2.0) - 43.0 / 108.0).abs(), Rule::AtMost, 0.0),
    ])
}

pub fn verify(config: &RunConfig) -> CliResult<VerifyReport<'_>> {
    if config.d != 3 {
        return Err(CliError::usage(format!("verify runs the d = 3 suite, got --d {}", config.d)));
    }
    let grid = Arc::new(sphere_grid(3, config.resolution)?);
    let mut checks = bessel_checks()?;
    checks.extend(quadrature_checks(&grid)?);
    checks.extend(field_checks(&grid)?);
    checks.extend(spectrum_checks()?);
    checks.extend(oracle_checks(&grid, config.convention())?);
    let passed = checks.iter().all(|c| c.status == Status::Pass);
    Ok(VerifyReport { config, checks, passed })
}
