//! Eigenvalue functions `Λ_{d,k}(R)`, the Maxwell candidate eigenvalue, the
//! largest-eigenvalue criterion, and energy densities.
//!
//! `Λ_{d,k}(R) = C(d) ∫_0^R r J_ν(r)² dr` with `ν = (d + 2k − 2)/2`. The
//! prefactor `C(d)` depends on the [`Convention`]; every ordering, crossing,
//! criterion verdict and half-maximum radius is independent of it.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use crate::error::{accuracy, domain, Error, Result};
use crate::par;
use crate::quadrature::GaussLegendre;
use crate::specfun::{ball_volume, bessel_j, gamma, surface_area, BesselOrder};

/// Normalisation of `Λ_{d,k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `C(d) = (2π)^{d/2} |S^{d−1}|`, the normalisation used for the printed curves.
    SurfaceMeasure,
    /// `C(d) = (2π)^d`, which matches the quadrature oracle.
    #[default]
    OracleConsistent,
}

impl Convention {
    pub fn prefactor(self, d: usize) -> Result<f64> {
        let two_pi = 2.0 * PI;
        match self {
            Convention::SurfaceMeasure => Ok(two_pi.powf(d as f64 / 2.0) * surface_area(d)?),
            Convention::OracleConsistent => Ok(two_pi.powi(d as i32)),
        }
    }
}

/// Radial quadrature settings for [`lambda_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaOptions {
    /// Upper bound on the Gauss–Legendre panel width.
    pub max_panel_width: f64,
    pub nodes_per_panel: usize,
    /// Relative agreement demanded between a panel set and its halving.
    pub rel_tol: f64,
    /// How many times the panel count may double before giving up.
    pub max_doublings: usize,
}

impl Default for LambdaOptions {
    fn default() -> Self {
        Self {
            max_panel_width: FRAC_PI_4,
            nodes_per_panel: 16,
            rel_tol: 1e-10,
            max_doublings: 6,
        }
    }
}

/// A value of `Λ` together with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

fn check_args(d: usize, r: f64) -> Result<()> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return domain(format!("radius must be positive and finite, got {r}"));
    }
    Ok(())
}

fn panel_integral(rule: &GaussLegendre, order: BesselOrder, r: f64, panels: usize) -> Result<f64> {
    let width = r / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = p as f64 * width;
        let mut s = 0.0;
        for (x, w) in rule.on_interval(a, a + width) {
            let j = bessel_j(order, x)?;
            s += w * x * j * j;
        }
        total += s;
    }
    Ok(total)
}

/// `Λ_{d,k}(R)` with explicit quadrature settings.
pub fn lambda_with(
    d: usize,
    k: usize,
    r: f64,
    convention: Convention,
    opts: &LambdaOptions,
) -> Result<LambdaEstimate> {
    check_args(d, r)?;
    let order = BesselOrder::for_harmonic(d, k)?;
    let rule = GaussLegendre::new(opts.nodes_per_panel)?;
    let c = convention.prefactor(d)?;
    let mut panels = (r / opts.max_panel_width).ceil().max(1.0) as usize;
    let mut coarse = panel_integral(&rule, order, r, panels)?;
    for _ in 0..=opts.max_doublings {
        let fine = panel_integral(&rule, order, r, 2 * panels)?;
        let err = (fine - coarse).abs();
        if err <= opts.rel_tol * fine.abs() {
            return Ok(LambdaEstimate {
                value: c * fine,
                error: c * err,
                panels: 2 * panels,
            });
        }
        panels *= 2;
        coarse = fine;
    }
    accuracy(format!(
        "radial quadrature for Lambda_{{{d},{k}}}({r}) did not reach relative tolerance {}",
        opts.rel_tol
    ))
}

/// `Λ_{d,k}(R)` with the default radial rule.
pub fn lambda(d: usize, k: usize, r: f64, convention: Convention) -> Result<f64> {
    Ok(lambda_with(d, k, r, convention, &LambdaOptions::default())?.value)
}

/// Immutable table of `Λ_{d,k}(R_j)` for `k = 0..=kmax` over a list of radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralTable {
    d: usize,
    convention: Convention,
    radii: Vec<f64>,
    kmax: usize,
    /// Row-major by radius, `kmax + 1` entries per row.
    values: Vec<f64>,
}

impl SpectralTable {
    /// Evaluates every entry; rows are computed in parallel.
    pub fn build(d: usize, kmax: usize, radii: &[f64], convention: Convention) -> Result<Self> {
        let width = kmax + 1;
        let values: Vec<f64> = par::try_map_range(radii.len() * width, |idx| {
            lambda(d, idx % width, radii[idx / width], convention)
        })?;
        Ok(Self {
            d,
            convention,
            radii: radii.to_vec(),
            kmax,
            values,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `Λ_{d,k}(radii[i])`.
    pub fn get(&self, k: usize, i: usize) -> f64 {
        assert!(k <= self.kmax, "k = {k} exceeds table kmax {}", self.kmax);
        self.values[i * (self.kmax + 1) + k]
    }

    /// All `Λ_{d,k}` at `radii[i]`, indexed by `k`.
    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.kmax + 1;
        &self.values[i * w..(i + 1) * w]
    }
}

/// `(Λ_{d,0} − Λ_{d,2})(d − 1)/d`, the eigenvalue carried by rotates of the
/// extremal tangent density.
pub fn maxwell_top_eigenvalue(d: usize, r: f64, convention: Convention) -> Result<f64> {
    let l0 = lambda(d, 0, r, convention)?;
    let l2 = lambda(d, 2, r, convention)?;
    Ok((l0 - l2) * (d as f64 - 1.0) / d as f64)
}

/// Eigenvalue of `Π L*L Π` on the rotates of `ℓ`: `((d − 1)Λ_{d,0} + Λ_{d,2})/d`.
///
/// Exceeds [`maxwell_top_eigenvalue`] by `Λ_{d,2}`; the tangent oracle
/// reproduces this value.
pub fn ell_rotate_eigenvalue(d: usize, r: f64, convention: Convention) -> Result<f64> {
    let l0 = lambda(d, 0, r, convention)?;
    let l2 = lambda(d, 2, r, convention)?;
    Ok(((d as f64 - 1.0) * l0 + l2) / d as f64)
}

/// Verdict of the largest-eigenvalue criterion at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionReport {
    pub d: usize,
    pub r: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub maxwell_top: f64,
    pub margin: f64,
    pub satisfied: bool,
}

pub fn criterion_margin(d: usize, r: f64, convention: Convention) -> Result<CriterionReport> {
    let lambda0 = lambda(d, 0, r, convention)?;
    let lambda1 = lambda(d, 1, r, convention)?;
    let lambda2 = lambda(d, 2, r, convention)?;
    let maxwell_top = (lambda0 - lambda2) * (d as f64 - 1.0) / d as f64;
    let margin = maxwell_top - lambda1;
    Ok(CriterionReport {
        d,
        r,
        lambda0,
        lambda1,
        lambda2,
        maxwell_top,
        margin,
        satisfied: margin > 0.0,
    })
}

/// `h(R) = 2/3 − (2/3) R⁴/576 − R²/16`, a lower bound for `margin / Λ_{3,0}` on `(0, π/2]`.
pub fn h_poly(r: f64) -> f64 {
    let r2 = r * r;
    2.0 / 3.0 - (2.0 / 3.0) * r2 * r2 / 576.0 - r2 / 16.0
}

/// Default crossing tolerance in `R`.
pub const CROSSING_TOL: f64 = 1e-8;

/// Bisection root of a fallible function on `[a, b]`.
pub fn try_find_crossing<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a < b) || !(tol > 0.0) {
        return domain(format!("bad bracket [{a}, {b}] or tolerance {tol}"));
    }
    let (mut lo, mut hi) = (a, b);
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracket { a, b });
    }
    while hi - lo > 2.0 * tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection root of `f` on `[a, b]`, accurate to `tol`.
pub fn find_crossing<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_find_crossing(|x| Ok(f(x)), a, b, tol)
}

/// Subintervals `[R_i, R_{i+1}]` of a sampled curve on which the sign flips.
pub fn sign_change_brackets(radii: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    radii
        .windows(2)
        .zip(values.windows(2))
        .filter(|(_, v)| v[0] * v[1] < 0.0)
        .map(|(r, _)| (r[0], r[1]))
        .collect()
}

/// `Λ_{d,0} − Λ_{d,1}`; its root is the radius where the first harmonic
/// overtakes the constant one.
pub fn scalar_crossing(d: usize, a: f64, b: f64, tol: f64) -> Result<f64> {
    try_find_crossing(
        |r| Ok(lambda(d, 0, r, Convention::OracleConsistent)? - lambda(d, 1, r, Convention::OracleConsistent)?),
        a,
        b,
        tol,
    )
}

/// Radius where the criterion margin changes sign.
pub fn criterion_crossing(d: usize, a: f64, b: f64, tol: f64) -> Result<f64> {
    try_find_crossing(
        |r| Ok(criterion_margin(d, r, Convention::OracleConsistent)?.margin),
        a,
        b,
        tol,
    )
}

/// What the energy density is normalised against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DensityMode {
    /// Degree-`k` scalar harmonic: `Λ_{d,k}/|B_R|`.
    Scalar { k: usize },
    /// Extremal Maxwell field: `(d−1)/d (Λ_{d,0} − Λ_{d,2})/|B_R|`.
    Maxwell,
}

/// Radii below which dividing by `|B_R|` is numerically delicate.
pub const DENSITY_FLOOR: f64 = 1e-3;

pub fn energy_density(d: usize, r: f64, mode: DensityMode, convention: Convention) -> Result<f64> {
    check_args(d, r)?;
    if r < DENSITY_FLOOR {
        log::warn!("energy density at R = {r:e} divides by a tiny ball volume; expect cancellation");
    }
    let numerator = match mode {
        DensityMode::Scalar { k } => lambda(d, k, r, convention)?,
        DensityMode::Maxwell => maxwell_top_eigenvalue(d, r, convention)?,
    };
    Ok(numerator / ball_volume(d, r)?)
}

/// `lim_{R→0}` of [`energy_density`]; zero for scalar modes with `k > 0`.
pub fn density_limit(d: usize, mode: DensityMode, convention: Convention) -> Result<f64> {
    if d < 2 {
        return domain(format!("dimension must be at least 2, got {d}"));
    }
    let g = gamma(d as f64 / 2.0);
    let scalar = convention.prefactor(d)? / (2f64.powi(d as i32 - 2) * g * g * surface_area(d)?);
    Ok(match mode {
        DensityMode::Scalar { k: 0 } => scalar,
        DensityMode::Scalar { .. } => 0.0,
        DensityMode::Maxwell => scalar * (d as f64 - 1.0) / d as f64,
    })
}

/// Smallest radius at which the density drops to half its `R → 0` limit.
///
/// The curve is sampled every `step` from `step` to `r_max`, and the first
/// downward crossing is refined by bisection to [`CROSSING_TOL`].
pub fn half_max_radius(
    d: usize,
    mode: DensityMode,
    convention: Convention,
    step: f64,
    r_max: f64,
) -> Result<f64> {
    let half = 0.5 * density_limit(d, mode, convention)?;
    if half == 0.0 {
        return domain("half-maximum radius is undefined for a density that vanishes at R = 0");
    }
    let f = |r: f64| Ok(energy_density(d, r, mode, convention)? - half);
    let mut lo = step;
    let mut flo = f(lo)?;
    while lo < r_max {
        let hi = (lo + step).min(r_max);
        let fhi = f(hi)?;
        if flo > 0.0 && fhi <= 0.0 {
            return try_find_crossing(f, lo, hi, CROSSING_TOL);
        }
        lo = hi;
        flo = fhi;
    }
    Err(Error::Bracket { a: step, b: r_max })
}

/// Outcome of [`check_monotonicity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Monotonicity {
    pub holds: bool,
    /// First `(k, k + 1)` with `Λ_{d,k} ≤ Λ_{d,k+1}`.
    pub witness: Option<(usize, usize)>,
    pub values: Vec<f64>,
}

/// Tests `Λ_{d,0}(R) > Λ_{d,1}(R) > … > Λ_{d,kmax}(R)`.
///
/// The ordering is guaranteed for `R ≤ π/2`; larger radii are accepted so the
/// failure past the first crossing can be exhibited.
pub fn check_monotonicity(d: usize, r: f64, kmax: usize) -> Result<Monotonicity> {
    check_args(d, r)?;
    let values = (0..=kmax)
        .map(|k| lambda(d, k, r, Convention::OracleConsistent))
        .collect::<Result<Vec<_>>>()?;
    let witness = values
        .windows(2)
        .position(|w| w[0] <= w[1])
        .map(|k| (k, k + 1));
    Ok(Monotonicity {
        holds: witness.is_none(),
        witness,
        values,
    })
}

/// Outcome of [`ratio_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioBounds {
    /// `Λ_{3,1}/Λ_{3,0}`.
    pub ratio10: f64,
    /// `Λ_{3,2}/Λ_{3,1}`.
    pub ratio21: f64,
    pub holds: bool,
}

/// Checks `Λ_{3,1}/Λ_{3,0} < R²/16` and `Λ_{3,2}/Λ_{3,1} < R²/36` for `0 < R ≤ π/2`.
pub fn ratio_bound_check(r: f64) -> Result<RatioBounds> {
    if !(r > 0.0 && r <= FRAC_PI_2) {
        return domain(format!("ratio bounds apply on (0, pi/2], got R = {r}"));
    }
    let c = Convention::OracleConsistent;
    let (l0, l1, l2) = (lambda(3, 0, r, c)?, lambda(3, 1, r, c)?, lambda(3, 2, r, c)?);
    let (ratio10, ratio21) = (l1 / l0, l2 / l1);
    let r2 = r * r;
    Ok(RatioBounds {
        ratio10,
        ratio21,
        holds: ratio10 < r2 / 16.0 && ratio21 < r2 / 36.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORACLE: Convention = Convention::OracleConsistent;

    #[test]
    fn normalized_integral_at_pi_is_one() {
        let v = lambda(3, 0, PI, ORACLE).unwrap() / ORACLE.prefactor(3).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn known_values() {
        let cases = [
            (0.5, 0, 6.2585),
            (1.0, 1, 3.03999),
            (2.0, 2, 8.1757),
            (3.0, 3, 13.540),
            (1.0, 0, 43.059),
        ];
        for (r, k, want) in cases {
            let got = lambda(3, k, r, ORACLE).unwrap();
            assert!(((got - want) / want).abs() < 2e-4, "R={r} k={k}: {got}");
        }
    }

    #[test]
    fn refinement_meets_tolerance() {
        let e = lambda_with(3, 2, 5.0, ORACLE, &LambdaOptions::default()).unwrap();
        assert!(e.error <= 1e-10 * e.value);
        let tight = LambdaOptions {
            max_doublings: 0,
            rel_tol: 0.0,
            ..LambdaOptions::default()
        };
        assert!(matches!(lambda_with(3, 2, 5.0, ORACLE, &tight), Err(Error::Accuracy(_))));
    }

    #[test]
    fn conventions_differ_by_constant() {
        let p = lambda(3, 1, 2.0, Convention::SurfaceMeasure).unwrap();
        let o = lambda(3, 1, 2.0, ORACLE).unwrap();
        assert!((o / p - (PI / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn small_radius_volume_limit() {
        let r = 0.1;
        let want = 16.0 * PI * PI * 1e-3 / 3.0;
        let got = lambda(3, 0, r, ORACLE).unwrap();
        assert!(((got - want) / want).abs() < 0.05);
        let lim = density_limit(3, DensityMode::Scalar { k: 0 }, ORACLE).unwrap();
        assert!((lim - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn h_values() {
        assert_eq!(h_poly(0.0), 2.0 / 3.0);
        assert!((h_poly(2.0) - 43.0 / 108.0).abs() < 1e-15);
        assert!(h_poly(FRAC_PI_2) > h_poly(2.0));
    }

    #[test]
    fn bisection_basics() {
        let r = find_crossing(|x| x - 1.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert_eq!(
            find_crossing(|x| x * x + 1.0, -1.0, 1.0, 1e-8),
            Err(Error::Bracket { a: -1.0, b: 1.0 })
        );
        let brackets = sign_change_brackets(&[0.0, 1.0, 2.0, 3.0], &[1.0, -1.0, -2.0, 3.0]);
        assert_eq!(brackets, vec![(0.0, 1.0), (2.0, 3.0)]);
    }

    #[test]
    fn criterion_sides() {
        assert!(criterion_margin(3, 1.0, ORACLE).unwrap().satisfied);
        let far = criterion_margin(3, 3.0, ORACLE).unwrap();
        assert!(!far.satisfied && far.margin < 0.0);
    }

    #[test]
    fn monotonicity_witness() {
        assert!(check_monotonicity(3, FRAC_PI_2, 6).unwrap().holds);
        let m = check_monotonicity(3, 3.5, 1).unwrap();
        assert_eq!(m.witness, Some((0, 1)));
    }

    #[test]
    fn ratio_bounds() {
        let rb = ratio_bound_check(1.0).unwrap();
        let c = ORACLE;
        let l: Vec<f64> = (0..3).map(|k| lambda(3, k, 1.0, c).unwrap()).collect();
        assert_eq!(rb.ratio10, l[1] / l[0]);
        assert_eq!(rb.ratio21, l[2] / l[1]);
        assert_eq!(rb.holds, rb.ratio10 < 1.0 / 16.0 && rb.ratio21 < 1.0 / 36.0);
        // Λ_{3,1}/Λ_{3,0} → R²/15 as R → 0, which sits above R²/16
        assert!(!rb.holds);
        let small = ratio_bound_check(0.05).unwrap();
        assert!((small.ratio10 / (0.05f64.powi(2) / 15.0) - 1.0).abs() < 1e-2);
        assert!(ratio_bound_check(2.0).is_err());
    }

    #[test]
    fn table_matches_pointwise() {
        let radii = [0.5, 1.0, 2.0];
        let t = SpectralTable::build(3, 2, &radii, ORACLE).unwrap();
        for (i, &r) in radii.iter().enumerate() {
            for k in 0..=2 {
                assert_eq!(t.get(k, i), lambda(3, k, r, ORACLE).unwrap());
            }
        }
        assert_eq!(t.row(1).len(), 3);
    }
}
