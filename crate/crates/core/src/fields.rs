//! Densities on the unit sphere and the monochromatic fields they synthesize.
//!
//! A density `e` on `S^{d-1}` produces `E(x) = ∫ e^{ix·ξ} e(ξ) dσ(ξ)`; for a
//! vector density the magnetic part is `B(x) = −∫ e^{ix·ξ} ξ∧e(ξ) dσ(ξ)`.

use std::f64::consts::PI;
use std::ops::Add;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{accuracy, domain, Result};
use crate::par;
use crate::quadrature::{sphere_grid, SphereGrid};
use crate::specfun::{bessel_j, surface_area, BesselOrder};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Tolerance on `|ξ| = 1` accepted by [`ell`].
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `|ξ·e(ξ)|` for a [`TangentDensity`].
pub const TANGENCY_TOL: f64 = 1e-12;

fn check_unit(xi: &[f64]) -> Result<()> {
    let n = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (n - 1.0).abs() > UNIT_TOL {
        return domain(format!("expected a unit vector, |xi| = {n}"));
    }
    Ok(())
}

/// `ℓ(ξ) = e₁ − ξ₁ ξ`, the tangential part of the first coordinate vector.
pub fn ell(xi: &[f64]) -> Result<Vec<f64>> {
    check_unit(xi)?;
    Ok(ell_unchecked(xi))
}

fn ell_unchecked(xi: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = xi.iter().map(|&x| -xi[0] * x).collect();
    v[0] += 1.0;
    v
}

/// Degree-0 plus degree-2 harmonic form of `ℓ` on the sphere:
/// `((d−1)/d − Σ_{j≥2} (ξ₁² − ξ_j²)/d, −ξ₁ξ₂, …, −ξ₁ξ_d)`.
pub fn ell_expansion(xi: &[f64]) -> Vec<f64> {
    let d = xi.len() as f64;
    let x1 = xi[0];
    let mut v = Vec::with_capacity(xi.len());
    v.push((d - 1.0) / d - xi[1..].iter().map(|&xj| (x1 * x1 - xj * xj) / d).sum::<f64>());
    v.extend(xi[1..].iter().map(|&xj| -x1 * xj));
    v
}

/// Largest node-wise discrepancy between [`ell`] and [`ell_expansion`].
pub fn ell_expansion_check(grid: &SphereGrid) -> f64 {
    grid.nodes()
        .map(|xi| {
            ell_unchecked(xi)
                .iter()
                .zip(ell_expansion(xi))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// What a density's values represent at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityKind {
    Scalar,
    /// Unconstrained `ℂ^d` values.
    Vector,
    /// `ℂ^d` values with `ξ·e(ξ) = 0`.
    Tangent,
}

/// Node values of a density, flattened node-major.
pub trait Density: Sync {
    fn grid(&self) -> &Arc<SphereGrid>;
    fn kind(&self) -> DensityKind;
    fn values(&self) -> &[Complex64];

    fn components(&self) -> usize {
        match self.kind() {
            DensityKind::Scalar => 1,
            _ => self.grid().dim(),
        }
    }

    fn value(&self, node: usize) -> &[Complex64] {
        let c = self.components();
        &self.values()[node * c..(node + 1) * c]
    }

    /// `∫ |e|² dσ`.
    fn norm_sqr(&self) -> f64 {
        let g = self.grid();
        par::sum_range(g.len(), |i| {
            g.weight(i) * self.value(i).iter().map(|v| v.norm_sqr()).sum::<f64>()
        })
    }

    fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

macro_rules! density_common {
    ($t:ty) => {
        impl Density for $t {
            fn grid(&self) -> &Arc<SphereGrid> {
                &self.grid
            }
            fn kind(&self) -> DensityKind {
                Self::KIND
            }
            fn values(&self) -> &[Complex64] {
                &self.values
            }
        }

        impl $t {
            /// True once the density has been scaled to unit `L²` norm.
            pub fn is_normalized(&self) -> bool {
                self.normalized
            }

            /// Copy scaled to unit norm; fails for the zero density.
            pub fn normalized(&self) -> Result<Self> {
                let n = self.norm();
                if !(n > 0.0) {
                    return domain("cannot normalize a zero density");
                }
                Ok(Self {
                    grid: Arc::clone(&self.grid),
                    values: self.values.iter().map(|v| v / n).collect(),
                    normalized: true,
                })
            }

            /// Copy multiplied by a complex constant.
            pub fn scaled(&self, c: Complex64) -> Self {
                Self {
                    grid: Arc::clone(&self.grid),
                    values: self.values.iter().map(|v| v * c).collect(),
                    normalized: self.normalized && (c.norm() - 1.0).abs() < 1e-15,
                }
            }

            /// Weighted `L²(S^{d-1})` inner product `∫ ⟨self, other⟩ dσ`, conjugate-linear in `self`.
            pub fn inner(&self, other: &Self) -> Complex64 {
                let c = self.components();
                let g = &self.grid;
                par::sum_range(g.len(), |i| {
                    let a = &self.values[i * c..(i + 1) * c];
                    let b = &other.values[i * c..(i + 1) * c];
                    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * g.weight(i)
                })
            }
        }
    };
}

/// Complex scalar density `f(ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarDensity {
    grid: Arc<SphereGrid>,
    values: Vec<Complex64>,
    normalized: bool,
}

impl ScalarDensity {
    const KIND: DensityKind = DensityKind::Scalar;

    pub fn new(grid: Arc<SphereGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!("expected {} values, got {}", grid.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("density values must be finite");
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(grid: Arc<SphereGrid>, f: F) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<SphereGrid>, c: Complex64) -> Self {
        let values = vec![c; grid.len()];
        Self {
            grid,
            values,
            normalized: false,
        }
    }
}

/// Unconstrained complex vector density.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorDensity {
    grid: Arc<SphereGrid>,
    values: Vec<Complex64>,
    normalized: bool,
}

impl VectorDensity {
    const KIND: DensityKind = DensityKind::Vector;

    pub fn new(grid: Arc<SphereGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() * grid.dim() {
            return domain(format!(
                "expected {} values, got {}",
                grid.len() * grid.dim(),
                values.len()
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return domain("density values must be finite");
        }
        Ok(Self {
            grid,
            values,
            normalized: false,
        })
    }

    /// Builds node values from `f(ξ, out)`.
    pub fn from_fn<F: Fn(&[f64], &mut [Complex64])>(grid: Arc<SphereGrid>, f: F) -> Result<Self> {
        let d = grid.dim();
        let mut values = vec![ZERO; grid.len() * d];
        for (xi, out) in grid.nodes().zip(values.chunks_exact_mut(d)) {
            f(xi, out);
        }
        Self::new(grid, values)
    }

    /// Orthogonal projection onto tangent fields.
    pub fn project(&self) -> TangentDensity {
        project_tangent(Arc::clone(&self.grid), &self.values)
    }
}

/// Complex vector density with `ξ·e(ξ) = 0` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDensity {
    grid: Arc<SphereGrid>,
    values: Vec<Complex64>,
    normalized: bool,
}

impl TangentDensity {
    const KIND: DensityKind = DensityKind::Tangent;

    /// Wraps node values, rejecting any node with `|ξ·e| > 1e-12`.
    pub fn new(grid: Arc<SphereGrid>, values: Vec<Complex64>) -> Result<Self> {
        let d = grid.dim();
        let v = VectorDensity::new(Arc::clone(&grid), values)?;
        for (i, (xi, e)) in grid.nodes().zip(v.values.chunks_exact(d)).enumerate() {
            let dot: Complex64 = xi.iter().zip(e).map(|(x, y)| y * x).sum();
            if dot.norm() > TANGENCY_TOL {
                return domain(format!("value at node {i} is not tangent: |xi.e| = {:e}", dot.norm()));
            }
        }
        Ok(Self {
            grid,
            values: v.values,
            normalized: false,
        })
    }

    pub fn from_fn<F: Fn(&[f64], &mut [Complex64])>(grid: Arc<SphereGrid>, f: F) -> Result<Self> {
        let v = VectorDensity::from_fn(Arc::clone(&grid), f)?;
        Self::new(grid, v.values)
    }

    /// `ℓ` sampled on the grid.
    pub fn ell(grid: Arc<SphereGrid>) -> Self {
        Self::ell_rotate(grid, 0)
    }

    /// `Π e_a = e_a − ξ_a ξ`; `a = 0` is `ℓ` itself.
    pub fn ell_rotate(grid: Arc<SphereGrid>, a: usize) -> Self {
        let d = grid.dim();
        assert!(a < d, "axis {a} out of range for d = {d}");
        let mut values = Vec::with_capacity(grid.len() * d);
        for xi in grid.nodes() {
            values.extend((0..d).map(|b| {
                let delta = if a == b { 1.0 } else { 0.0 };
                Complex64::new(delta - xi[a] * xi[b], 0.0)
            }));
        }
        Self {
            grid,
            values,
            normalized: false,
        }
    }
}

density_common!(ScalarDensity);
density_common!(VectorDensity);
density_common!(TangentDensity);

/// `e(ξ) = v(ξ) − (ξ·v(ξ)) ξ` at every node of `grid`.
pub fn project_tangent(grid: Arc<SphereGrid>, values: &[Complex64]) -> TangentDensity {
    let d = grid.dim();
    assert_eq!(values.len(), grid.len() * d, "one d-vector per node");
    let mut out = Vec::with_capacity(values.len());
    for (xi, v) in grid.nodes().zip(values.chunks_exact(d)) {
        let dot: Complex64 = xi.iter().zip(v).map(|(x, y)| y * x).sum();
        out.extend(xi.iter().zip(v).map(|(&x, y)| y - dot * x));
    }
    TangentDensity {
        grid,
        values: out,
        normalized: false,
    }
}

fn monomials(d: usize, degree: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; d]];
    for _ in 0..degree {
        let mut next = out.clone();
        for m in &out {
            for a in 0..d {
                let mut n = m.clone();
                n[a] += 1;
                if !next.contains(&n) {
                    next.push(n);
                }
            }
        }
        out = next;
    }
    out
}

fn random_polynomial(rng: &mut ChaCha8Rng, d: usize, degree: usize) -> Vec<(Vec<usize>, Complex64)> {
    monomials(d, degree)
        .into_iter()
        .map(|m| {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (m, c)
        })
        .collect()
}

fn eval_polynomial(p: &[(Vec<usize>, Complex64)], xi: &[f64]) -> Complex64 {
    p.iter()
        .map(|(m, c)| c * m.iter().zip(xi).map(|(&e, &x)| x.powi(e as i32)).product::<f64>())
        .sum()
}

/// Smooth pseudo-random scalar density: a random complex polynomial of
/// degree ≤ `degree` restricted to the sphere, normalized.
pub fn random_scalar_density(grid: Arc<SphereGrid>, seed: u64, degree: usize) -> Result<ScalarDensity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_polynomial(&mut rng, grid.dim(), degree);
    ScalarDensity::from_fn(grid, |xi| eval_polynomial(&p, xi))?.normalized()
}

/// Smooth pseudo-random tangent density: a random polynomial vector field,
/// projected and normalized.
pub fn random_tangent_density(grid: Arc<SphereGrid>, seed: u64, degree: usize) -> Result<TangentDensity> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = grid.dim();
    let ps: Vec<_> = (0..d).map(|_| random_polynomial(&mut rng, d, degree)).collect();
    let v = VectorDensity::from_fn(grid, |xi, out| {
        for (o, p) in out.iter_mut().zip(&ps) {
            *o = eval_polynomial(p, xi);
        }
    })?;
    v.project().normalized()
}

/// Field value at one point. `e` has one entry for scalar densities and `d`
/// for vector ones; `b` holds `−∫ e^{ixξ} ξ∧e dσ` (three entries for `d = 3`,
/// one for `d = 2`) and is empty for scalar densities.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub x: Vec<f64>,
    pub e: Vec<Complex64>,
    pub b: Vec<Complex64>,
}

#[derive(Clone, Copy, Default)]
struct Acc([Complex64; 6]);

impl Add for Acc {
    type Output = Acc;
    fn add(mut self, rhs: Acc) -> Acc {
        for (a, b) in self.0.iter_mut().zip(rhs.0) {
            *a += b;
        }
        self
    }
}

/// Largest `|x|` at which a grid of this resolution may be used.
pub fn check_adequate(grid: &SphereGrid, radius: f64) -> Result<()> {
    let need = 2.0 * radius + 16.0;
    if (grid.resolution() as f64) < need {
        return accuracy(format!(
            "grid resolution {} is too coarse for |x| = {radius}; need at least {}",
            grid.resolution(),
            need.ceil()
        ));
    }
    Ok(())
}

fn wedge(xi: &[f64], e: &[Complex64], out: &mut [Complex64]) -> usize {
    match xi.len() {
        3 => {
            out[0] = e[2] * xi[1] - e[1] * xi[2];
            out[1] = e[0] * xi[2] - e[2] * xi[0];
            out[2] = e[1] * xi[0] - e[0] * xi[1];
            3
        }
        _ => {
            out[0] = e[1] * xi[0] - e[0] * xi[1];
            1
        }
    }
}

/// `E(x)` (and `B(x)` for vector densities) by quadrature on the density's grid.
pub fn synthesize<D: Density + ?Sized>(density: &D, x: &[f64]) -> Result<FieldSample> {
    let grid = density.grid();
    let d = grid.dim();
    if x.len() != d {
        return domain(format!("point has {} coordinates, grid has d = {d}", x.len()));
    }
    let radius = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    check_adequate(grid, radius)?;
    let c = density.components();
    let vector = c == d && density.kind() != DensityKind::Scalar;
    let acc = par::sum_range(grid.len(), |i| {
        let xi = grid.node(i);
        let phase = Complex64::cis(xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()) * grid.weight(i);
        let v = density.value(i);
        let mut out = Acc::default();
        for (o, vi) in out.0.iter_mut().zip(v) {
            *o = phase * vi;
        }
        if vector {
            let mut w = [ZERO; 3];
            let n = wedge(xi, v, &mut w);
            for (o, wi) in out.0[c..c + n].iter_mut().zip(&w[..n]) {
                *o = -phase * wi;
            }
        }
        out
    });
    let nb = if vector { d * (d - 1) / 2 } else { 0 };
    Ok(FieldSample {
        x: x.to_vec(),
        e: acc.0[..c].to_vec(),
        b: acc.0[c..c + nb].to_vec(),
    })
}

/// [`synthesize`] at many points, evaluated in parallel.
pub fn synthesize_many<D: Density + ?Sized>(density: &D, points: &[Vec<f64>]) -> Result<Vec<FieldSample>> {
    par::try_map_range(points.len(), |i| synthesize(density, &points[i]))
}

/// `∫ e^{ixξ} iξ·e(ξ) dσ`, the divergence of the synthesized field.
pub fn divergence<D: Density + ?Sized>(density: &D, x: &[f64]) -> Result<Complex64> {
    let grid = density.grid();
    if density.components() != grid.dim() || x.len() != grid.dim() {
        return domain("divergence needs a vector density and a point in R^d");
    }
    check_adequate(grid, x.iter().map(|v| v * v).sum::<f64>().sqrt())?;
    Ok(par::sum_range(grid.len(), |i| {
        let xi = grid.node(i);
        let dot: Complex64 = xi.iter().zip(density.value(i)).map(|(a, e)| e * a).sum();
        let phase = Complex64::cis(xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        phase * Complex64::i() * dot * grid.weight(i)
    }))
}

/// A homogeneous polynomial on `ℝ^d` that the caller asserts is harmonic.
pub trait HarmonicPolynomial: Sync {
    fn dim(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
}

/// Low-degree harmonics used throughout: `1`, `ξ_j`, `ξ_i² − ξ_j²`, `ξ_iξ_j`,
/// `ξ₁ξ₂ξ₃` and `Re (ξ₁ + iξ₂)^k`. Indices are zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardHarmonic {
    Constant { d: usize },
    Linear { d: usize, j: usize },
    DiffSquares { d: usize, i: usize, j: usize },
    Product { d: usize, i: usize, j: usize },
    Triple,
    Sectoral { d: usize, k: usize },
}

impl HarmonicPolynomial for StandardHarmonic {
    fn dim(&self) -> usize {
        match *self {
            StandardHarmonic::Constant { d }
            | StandardHarmonic::Linear { d, .. }
            | StandardHarmonic::DiffSquares { d, .. }
            | StandardHarmonic::Product { d, .. }
            | StandardHarmonic::Sectoral { d, .. } => d,
            StandardHarmonic::Triple => 3,
        }
    }

    fn degree(&self) -> usize {
        match *self {
            StandardHarmonic::Constant { .. } => 0,
            StandardHarmonic::Linear { .. } => 1,
            StandardHarmonic::DiffSquares { .. } | StandardHarmonic::Product { .. } => 2,
            StandardHarmonic::Triple => 3,
            StandardHarmonic::Sectoral { k, .. } => k,
        }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        match *self {
            StandardHarmonic::Constant { .. } => 1.0,
            StandardHarmonic::Linear { j, .. } => x[j],
            StandardHarmonic::DiffSquares { i, j, .. } => x[i] * x[i] - x[j] * x[j],
            StandardHarmonic::Product { i, j, .. } => x[i] * x[j],
            StandardHarmonic::Triple => x[0] * x[1] * x[2],
            StandardHarmonic::Sectoral { k, .. } => Complex64::new(x[0], x[1]).powu(k as u32).re,
        }
    }
}

/// The shipped harmonics of degree `k` in dimension `d`.
pub fn standard_family(d: usize, k: usize) -> Vec<StandardHarmonic> {
    match k {
        0 => vec![StandardHarmonic::Constant { d }],
        1 => (0..d).map(|j| StandardHarmonic::Linear { d, j }).collect(),
        2 => {
            let mut v: Vec<_> = (1..d).map(|j| StandardHarmonic::DiffSquares { d, i: 0, j }).collect();
            for i in 0..d {
                for j in i + 1..d {
                    v.push(StandardHarmonic::Product { d, i, j });
                }
            }
            v
        }
        3 if d == 3 => vec![StandardHarmonic::Triple, StandardHarmonic::Sectoral { d, k }],
        _ => vec![StandardHarmonic::Sectoral { d, k }],
    }
}

/// Largest `|ΔP|` found by central differences at five pseudo-random points
/// in the unit ball; errors when it is not at roundoff level.
pub fn laplacian_spot_check<P: HarmonicPolynomial + ?Sized>(p: &P, seed: u64) -> Result<f64> {
    let d = p.dim();
    let h = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let centre = p.eval(&x);
        let mut lap = 0.0;
        let mut y = x.clone();
        for a in 0..d {
            y[a] = x[a] + h;
            let fp = p.eval(&y);
            y[a] = x[a] - h;
            let fm = p.eval(&y);
            y[a] = x[a];
            lap += (fp - 2.0 * centre + fm) / (h * h);
        }
        worst = worst.max(lap.abs());
    }
    if worst > 1e-6 {
        return domain(format!("polynomial is not harmonic: |Delta P| = {worst:e}"));
    }
    Ok(worst)
}

/// Closed form of `∫ e^{ix·η} P(η) dσ(η)`:
/// `(2π)^{d/2} i^k |x|^{−(d−2)/2} J_{(d+2k−2)/2}(|x|) P(x/|x|)`.
pub fn harmonic_field<P: HarmonicPolynomial + ?Sized>(p: &P, x: &[f64]) -> Result<Complex64> {
    let d = p.dim();
    let k = p.degree();
    if x.len() != d {
        return domain(format!("point has {} coordinates, polynomial has d = {d}", x.len()));
    }
    laplacian_spot_check(p, 0x5eed)?;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        if k > 0 {
            return Ok(ZERO);
        }
        return Ok(Complex64::new(surface_area(d)? * p.eval(x), 0.0));
    }
    let xhat: Vec<f64> = x.iter().map(|v| v / r).collect();
    let order = BesselOrder::for_harmonic(d, k)?;
    let radial = (2.0 * PI).powf(d as f64 / 2.0) * r.powf(-(d as f64 - 2.0) / 2.0) * bessel_j(order, r)?;
    Ok(Complex64::i().powu(k as u32) * radial * p.eval(&xhat))
}

/// Which sharp origin bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Scalar,
    Maxwell,
}

/// Sharp constant `c` in `|E(0)| ≤ c ‖e‖`: `|S^{d−1}|^{1/2}` for scalar
/// densities, `((d−1)|S^{d−1}|/d)^{1/2}` for tangent ones.
pub fn origin_bound(d: usize, kind: BoundKind) -> Result<f64> {
    let s = surface_area(d)?;
    Ok(match kind {
        BoundKind::Scalar => s.sqrt(),
        BoundKind::Maxwell => ((d as f64 - 1.0) * s / d as f64).sqrt(),
    })
}

/// Best tangent density supported in `{mask}`: normalized `ℓ χ_Ω`, with the
/// `|E(0)|` it achieves.
pub fn masked_optimum<M>(grid: Arc<SphereGrid>, mask: M) -> Result<(TangentDensity, f64)>
where
    M: Fn(&[f64]) -> bool,
{
    let d = grid.dim();
    let ell = TangentDensity::ell(Arc::clone(&grid));
    let mut values = ell.values.clone();
    let mut any = false;
    for (xi, v) in grid.nodes().zip(values.chunks_exact_mut(d)) {
        if mask(xi) {
            any = true;
        } else {
            v.fill(ZERO);
        }
    }
    if !any {
        return domain("mask selects no grid nodes");
    }
    let masked = TangentDensity {
        grid,
        values,
        normalized: false,
    };
    if masked.norm() == 0.0 {
        return Ok((masked, 0.0));
    }
    let best = masked.normalized()?;
    let e0 = synthesize(&best, &vec![0.0; d])?;
    let achieved = e0.e.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok((best, achieved))
}

/// Large-sphere behaviour of a synthesized field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarFieldReport {
    pub r: f64,
    /// Fitted `p` in `|E(ρx̂)| ~ ρ^{−p}`, from the envelopes at `r` and `2r`.
    pub decay_exponent: f64,
    /// Cosine similarity between the fitted angular profile and the density.
    pub correlation: f64,
    /// Least-squares constant `c` in profile ≈ `c · e(x̂)`.
    pub amplitude: f64,
}

/// Sample directions used by [`far_field_check`].
pub fn far_field_directions(d: usize) -> Result<Vec<Vec<f64>>> {
    let g = sphere_grid(d, if d == 3 { 6 } else { 16 })?;
    Ok(g.nodes().map(|x| x.to_vec()).collect())
}

/// Fits `ρ^{(d−1)/2} E(ρx̂) ≈ A(x̂) sin ρ + B(x̂) cos ρ` at `ρ ∈ {r, r + π/2}`
/// over a fixed direction set and compares `A` with `e(x̂)`.
pub fn far_field_check<D: Density + ?Sized>(density: &D, r: f64) -> Result<FarFieldReport> {
    let grid = density.grid();
    let d = grid.dim();
    if !(grid.resolution() as f64 >= 2.0 * (2.0 * r + PI / 2.0) + 16.0) {
        return accuracy(format!(
            "grid resolution {} is too coarse for a far-field fit at r = {r}",
            grid.resolution()
        ));
    }
    let dirs = far_field_directions(d)?;
    let c = density.components();
    let power = (d as f64 - 1.0) / 2.0;
    let fit = |rho: f64| -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        let shifts = [rho, rho + PI / 2.0];
        let pts: Vec<Vec<f64>> = shifts
            .iter()
            .flat_map(|&s| dirs.iter().map(move |u| u.iter().map(|v| v * s).collect()))
            .collect();
        let samples = synthesize_many(density, &pts)?;
        let (sn, cs) = rho.sin_cos();
        let (w1, w2) = (shifts[0].powf(power), shifts[1].powf(power));
        let n = dirs.len();
        let mut a = Vec::with_capacity(n * c);
        let mut b = Vec::with_capacity(n * c);
        for j in 0..n {
            for comp in 0..c {
                let v1 = samples[j].e[comp] * w1;
                let v2 = samples[n + j].e[comp] * w2;
                a.push(v1 * sn + v2 * cs);
                b.push(v1 * cs - v2 * sn);
            }
        }
        Ok((a, b))
    };
    let envelope = |a: &[Complex64], b: &[Complex64]| {
        a.iter().chain(b).map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    };
    let (a1, b1) = fit(r)?;
    let (a2, b2) = fit(2.0 * r)?;
    let decay_exponent = power - (envelope(&a2, &b2) / envelope(&a1, &b1)).ln() / 2f64.ln();

    let target = density_at_directions(density, &dirs)?;
    let dot: Complex64 = target.iter().zip(&a1).map(|(t, p)| t.conj() * p).sum();
    let tn = target.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let pn = a1.iter().map(|v| v.norm_sqr()).sum::<f64>();
    Ok(FarFieldReport {
        r,
        decay_exponent,
        correlation: dot.norm() / (tn * pn).sqrt(),
        amplitude: dot.re / tn,
    })
}

/// Density values at arbitrary directions, taken from the nearest grid node.
fn density_at_directions<D: Density + ?Sized>(density: &D, dirs: &[Vec<f64>]) -> Result<Vec<Complex64>> {
    let grid = density.grid();
    let mut out = Vec::new();
    for u in dirs {
        let (best, _) = grid
            .nodes()
            .enumerate()
            .map(|(i, xi)| (i, xi.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()))
            .fold((0, f64::NEG_INFINITY), |acc, v| if v.1 > acc.1 { v } else { acc });
        out.extend_from_slice(density.value(best));
    }
    Ok(out)
}

/// Outcome of [`derivative_bound_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeBound {
    /// `|∂^α E(x)|` from Richardson-extrapolated central differences.
    pub value: f64,
    /// `c ‖e‖` with the sharp constant for the density kind.
    pub bound: f64,
    pub holds: bool,
}

/// Slack granted to the finite-difference estimate.
pub const DERIVATIVE_SLACK: f64 = 1e-6;

fn difference<D: Density + ?Sized>(density: &D, x: &[f64], alpha: &[usize], h: f64) -> Result<Vec<Complex64>> {
    let axes: Vec<usize> = alpha
        .iter()
        .enumerate()
        .flat_map(|(a, &n)| std::iter::repeat(a).take(n))
        .collect();
    let at = |shift: &[(usize, f64)]| -> Result<Vec<Complex64>> {
        let mut y = x.to_vec();
        for &(a, s) in shift {
            y[a] += s;
        }
        Ok(synthesize(density, &y)?.e)
    };
    let combine = |terms: Vec<(f64, Vec<Complex64>)>| {
        let n = terms[0].1.len();
        (0..n)
            .map(|i| terms.iter().map(|(c, v)| v[i] * *c).sum())
            .collect::<Vec<Complex64>>()
    };
    Ok(match axes.as_slice() {
        [] => at(&[])?,
        [a] => combine(vec![
            (0.5 / h, at(&[(*a, h)])?),
            (-0.5 / h, at(&[(*a, -h)])?),
        ]),
        [a, b] if a == b => combine(vec![
            (1.0 / (h * h), at(&[(*a, h)])?),
            (-2.0 / (h * h), at(&[])?),
            (1.0 / (h * h), at(&[(*a, -h)])?),
        ]),
        [a, b] => {
            let s = 0.25 / (h * h);
            combine(vec![
                (s, at(&[(*a, h), (*b, h)])?),
                (-s, at(&[(*a, h), (*b, -h)])?),
                (-s, at(&[(*a, -h), (*b, h)])?),
                (s, at(&[(*a, -h), (*b, -h)])?),
            ])
        }
        _ => return domain("derivative order |alpha| must be at most 2"),
    })
}

/// Checks `|∂^α E(x)| ≤ c ‖e‖` for `|α| ≤ 2`.
pub fn derivative_bound_check<D: Density + ?Sized>(
    density: &D,
    x: &[f64],
    alpha: &[usize],
    step: f64,
) -> Result<DerivativeBound> {
    let d = density.grid().dim();
    if alpha.len() != d || x.len() != d {
        return domain("alpha and x must have d entries");
    }
    if !(step > 0.0) {
        return domain(format!("step must be positive, got {step}"));
    }
    let coarse = difference(density, x, alpha, step)?;
    let fine = difference(density, x, alpha, 0.5 * step)?;
    let value = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| ((f * 4.0 - c) / 3.0).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let kind = match density.kind() {
        DensityKind::Tangent => BoundKind::Maxwell,
        _ => BoundKind::Scalar,
    };
    let bound = origin_bound(d, kind)? * density.norm();
    Ok(DerivativeBound {
        value,
        bound,
        holds: value <= bound + DERIVATIVE_SLACK,
    })
}

/// A rotation of `ℝ³` stored as an orthogonal matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    m: [[f64; 3]; 3],
}

impl Rotation3 {
    pub fn identity() -> Self {
        Self {
            m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        }
    }

    /// Rodrigues rotation by `angle` about `axis` (normalized internally).
    pub fn from_axis_angle(axis: [f64; 3], angle: f64) -> Result<Self> {
        let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return domain("rotation axis must be nonzero");
        }
        let [x, y, z] = axis.map(|v| v / n);
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Ok(Self {
            m: [
                [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
                [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
                [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
            ],
        })
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.m
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[j][i];
            }
        }
        Self { m }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.m[i][k] * other.m[k][j]).sum();
            }
        }
        Self { m }
    }

    pub fn apply(&self, v: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (o, row) in out.iter_mut().zip(&self.m) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> [Complex64; 3] {
        let mut out = [ZERO; 3];
        for (o, row) in out.iter_mut().zip(&self.m) {
            *o = row.iter().zip(v).map(|(a, b)| b * a).sum();
        }
        out
    }

    /// `max |QQᵀ − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.compose(&self.transpose());
        let mut worst: f64 = 0.0;
        for (i, row) in p.m.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
        worst
    }
}
