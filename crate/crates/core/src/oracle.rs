//! Brute-force discretisation of `L*L` and `Π L*L Π` on a sphere grid.
//!
//! With `K(ξ, ξ′) = ∫_{B_R} e^{ix·(ξ′−ξ)} dx`, the operator `L*L` has kernel
//! `K` on `L²(S^{d-1})`. The Nyström matrix `A_ij = √w_i K(ξ_i, ξ_j) √w_j` is
//! real symmetric and its eigenvalues approximate those of the operator.
//! Eigenvectors `v` of `A` correspond to node values `v_i / √w_i`.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::fields::{check_adequate, random_scalar_density, Density, DensityKind};
use crate::par;
use crate::quadrature::SphereGrid;
use crate::specfun::{ball_volume, bessel_j, surface_area, BesselOrder};

const SERIES_SWITCH: f64 = 1.0;
const SERIES_SWITCH_2D: f64 = 4.0;

/// `∫_{B_R(0)} e^{ix·ω} dx` for any `ω` with `|ω| = q`.
///
/// `d = 3`: `4π (sin u − u cos u)/q³`; `d = 2`: `2πR J₁(u)/q`, with `u = Rq`.
/// Below `u = 1` both are summed from their Taylor series.
pub fn ball_kernel(d: usize, radius: f64, q: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return domain(format!("kernel argument must be nonnegative, got {q}"));
    }
    let u = radius * q;
    match d {
        3 if u < SERIES_SWITCH => kernel_series(d, radius, u),
        2 if u < SERIES_SWITCH_2D => kernel_series(d, radius, u),
        2 | 3 => kernel_closed(d, radius, q),
        _ => domain(format!("ball kernel is implemented for d = 2, 3, got {d}")),
    }
}

fn kernel_series(d: usize, radius: f64, u: f64) -> Result<f64> {
    let vol = ball_volume(d, radius)?;
    let u2 = u * u;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 1..40 {
        let nf = n as f64;
        let t = if d == 3 {
            // 3 (sin u − u cos u)/u³ = Σ (−1)^n 6(n+1) u^{2n} / (2n+3)!
            term *= -u2 / ((2.0 * nf + 2.0) * (2.0 * nf + 3.0));
            term * (nf + 1.0)
        } else {
            // 2 J₁(u)/u = Σ (−1)^n (u/2)^{2n} / (n! (n+1)!)
            term *= -0.25 * u2 / (nf * (nf + 1.0));
            term
        };
        sum += t;
        if t.abs() < 1e-18 {
            break;
        }
    }
    Ok(vol * sum)
}

fn kernel_closed(d: usize, radius: f64, q: f64) -> Result<f64> {
    let u = radius * q;
    if d == 3 {
        Ok(4.0 * PI * (u.sin() - u * u.cos()) / (q * q * q))
    } else {
        Ok(2.0 * PI * radius * bessel_j(BesselOrder::new(1.0)?, u)? / q)
    }
}

/// Which operator the Gram matrix discretises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// `L*L` on scalar densities.
    FullScalar,
    /// `L*L` acting componentwise on `ℂ^d`-valued densities.
    FullVector,
    /// `Π L*L Π` on tangent densities.
    Tangent,
}

/// Symmetric Nyström matrix for one grid, radius and subspace.
#[derive(Debug, Clone)]
pub struct OracleGram {
    grid: Arc<SphereGrid>,
    radius: f64,
    subspace: Subspace,
    components: usize,
    matrix: DMatrix<f64>,
    /// `√w` per matrix row.
    sqrt_w: Vec<f64>,
}

/// Diagnostics from [`OracleGram::invariants`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramInvariants {
    /// `max |A − Aᵀ|`.
    pub asymmetry: f64,
    /// Whether `A + 1e-10 I` admits a Cholesky factorisation.
    pub psd: bool,
    /// Smallest eigenvalue, computed only for matrices up to 700 rows.
    pub min_eigenvalue: Option<f64>,
    /// `max |PA − AP|` for the node-wise tangent projector, `TANGENT` only.
    pub commutator: Option<f64>,
}

/// Shift added before the positive-semidefiniteness factorisation.
pub const PSD_SHIFT: f64 = 1e-10;

impl OracleGram {
    /// Builds the matrix; columns are filled in parallel.
    pub fn assemble(grid: Arc<SphereGrid>, radius: f64, subspace: Subspace) -> Result<Self> {
        if !(radius > 0.0) {
            return domain(format!("radius must be positive, got {radius}"));
        }
        check_adequate(&grid, radius)?;
        let d = grid.dim();
        let m = grid.len();
        let c = match subspace {
            Subspace::FullScalar => 1,
            _ => d,
        };
        let n = m * c;
        let sqrt_w: Vec<f64> = (0..n).map(|i| grid.weight(i / c).sqrt()).collect();
        let mut data = vec![0.0; n * n];
        let kernel_column = |j: usize| -> Result<Vec<f64>> {
            let xj = grid.node(j);
            (0..m)
                .map(|i| {
                    let xi = grid.node(i);
                    let q = xi.iter().zip(xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    Ok(ball_kernel(d, radius, q)? * (grid.weight(i) * grid.weight(j)).sqrt())
                })
                .collect()
        };
        let columns = par::try_map_range(m, kernel_column)?;
        par::fill_blocks(&mut data, c * n, |j, block| {
            let xj = grid.node(j);
            let kcol = &columns[j];
            for b in 0..c {
                let col = &mut block[b * n..(b + 1) * n];
                for (i, &k) in kcol.iter().enumerate() {
                    let xi = grid.node(i);
                    for a in 0..c {
                        let factor = match subspace {
                            Subspace::FullScalar => 1.0,
                            Subspace::FullVector => {
                                if a == b {
                                    1.0
                                } else {
                                    0.0
                                }
                            }
                            Subspace::Tangent => {
                                let dot: f64 = xi.iter().zip(xj).map(|(p, q)| p * q).sum();
                                let delta = if a == b { 1.0 } else { 0.0 };
                                delta - xi[a] * xi[b] - xj[a] * xj[b] + dot * xi[a] * xj[b]
                            }
                        };
                        col[i * c + a] = k * factor;
                    }
                }
            }
        });
        let mut matrix = DMatrix::from_vec(n, n, data);
        if subspace == Subspace::Tangent {
            for j in 0..n {
                for i in 0..j {
                    let avg = 0.5 * (matrix[(i, j)] + matrix[(j, i)]);
                    matrix[(i, j)] = avg;
                    matrix[(j, i)] = avg;
                }
            }
        }
        Ok(Self {
            grid,
            radius,
            subspace,
            components: c,
            matrix,
            sqrt_w,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    /// Unknowns per grid node.
    pub fn components(&self) -> usize {
        self.components
    }

    pub fn len(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_w
    }

    /// Symmetry, semidefiniteness and (for `TANGENT`) commutation with the projector.
    pub fn invariants(&self) -> GramInvariants {
        let n = self.len();
        let a = &self.matrix;
        let mut asymmetry: f64 = 0.0;
        for j in 0..n {
            for i in 0..j {
                asymmetry = asymmetry.max((a[(i, j)] - a[(j, i)]).abs());
            }
        }
        let shifted = a.clone() + DMatrix::<f64>::identity(n, n) * PSD_SHIFT;
        let psd = shifted.cholesky().is_some();
        let min_eigenvalue = (n <= 700).then(|| {
            SymmetricEigen::new(a.clone())
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min)
        });
        let commutator = (self.subspace == Subspace::Tangent).then(|| self.projector_commutator());
        GramInvariants {
            asymmetry,
            psd,
            min_eigenvalue,
            commutator,
        }
    }

    fn projector_commutator(&self) -> f64 {
        let d = self.components;
        let n = self.len();
        let a = &self.matrix;
        let proj = |node: usize, r: usize, s: usize| {
            let x = self.grid.node(node);
            (if r == s { 1.0 } else { 0.0 }) - x[r] * x[s]
        };
        let worst = par::map_range(n, |col| {
            let (j, b) = (col / d, col % d);
            let mut w: f64 = 0.0;
            for row in 0..n {
                let (i, r) = (row / d, row % d);
                let pa: f64 = (0..d).map(|s| proj(i, r, s) * a[(i * d + s, col)]).sum();
                let ap: f64 = (0..d).map(|s| a[(row, j * d + s)] * proj(j, s, b)).sum();
                w = w.max((pa - ap).abs());
            }
            w
        });
        worst.into_iter().fold(0.0, f64::max)
    }

    /// `A v` for a weighted coefficient vector.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        (&self.matrix * DVector::from_column_slice(v)).as_slice().to_vec()
    }

    fn weighted(&self, density: &dyn Density) -> Result<(Vec<f64>, Vec<f64>)> {
        let compatible = matches!(
            (self.subspace, density.kind()),
            (Subspace::FullScalar, DensityKind::Scalar)
                | (Subspace::FullVector, DensityKind::Vector | DensityKind::Tangent)
                | (Subspace::Tangent, DensityKind::Tangent)
        );
        if !compatible {
            return domain(format!(
                "{:?} density does not belong to the {:?} subspace",
                density.kind(),
                self.subspace
            ));
        }
        if **density.grid() != *self.grid {
            return domain("density lives on a different grid");
        }
        let (re, im) = density
            .values()
            .iter()
            .zip(&self.sqrt_w)
            .map(|(v, s)| (v.re * s, v.im * s))
            .unzip();
        Ok((re, im))
    }
}

/// Eigenvalue with its eigenfunction sampled at the grid nodes (node-major,
/// `components` entries per node, de-weighted).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub function: Vec<f64>,
}

/// Stopping rules for [`top_eigenpairs_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Relative Ritz-value change between sweeps.
    pub value_tol: f64,
    /// Residual `‖Av − θv‖` relative to `θ`.
    pub residual_tol: f64,
    /// Extra block columns beyond the requested count.
    pub guard: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            value_tol: 1e-12,
            residual_tol: 1e-8,
            guard: 12,
            seed: 0x0f0c_05e1,
        }
    }
}

/// Absolute slack, relative to the top Ritz value, for roundoff in `A X`.
const NOISE_FLOOR: f64 = 1e-14;

/// Largest number of eigenpairs [`top_eigenpairs`] will return.
pub const MAX_EIGENPAIRS: usize = 20;

fn orthonormalize(x: DMatrix<f64>) -> DMatrix<f64> {
    x.qr().q()
}

fn sorted_eigen(t: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i)).collect::<Vec<_>>());
    (values, vectors)
}

fn deweight(gram: &OracleGram, v: &[f64]) -> Vec<f64> {
    v.iter().zip(&gram.sqrt_w).map(|(x, s)| x / s).collect()
}

/// The `count` largest eigenpairs with the default [`EigenOptions`].
pub fn top_eigenpairs(gram: &OracleGram, count: usize) -> Result<Vec<EigenPair>> {
    top_eigenpairs_with(gram, count, &EigenOptions::default())
}

/// Block subspace iteration with Rayleigh–Ritz extraction.
///
/// Starts from a fixed pseudo-random block (node-wise projected for
/// `TANGENT`), so repeated calls return identical results. A sweep is final
/// once every requested Ritz value has stopped moving and its residual is
/// below tolerance, both up to an absolute floor at the roundoff level of the
/// top eigenvalue.
pub fn top_eigenpairs_with(gram: &OracleGram, count: usize, opts: &EigenOptions) -> Result<Vec<EigenPair>> {
    let n = gram.len();
    if count == 0 || count > MAX_EIGENPAIRS || count > n {
        return domain(format!("eigenpair count must lie in 1..={}, got {count}", MAX_EIGENPAIRS.min(n)));
    }
    let p = (count + opts.guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x = DMatrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
    if gram.subspace == Subspace::Tangent {
        let d = gram.components;
        for mut col in x.column_iter_mut() {
            for (node, chunk) in col.as_mut_slice().chunks_exact_mut(d).enumerate() {
                let xi = gram.grid.node(node);
                let dot: f64 = xi.iter().zip(chunk.iter()).map(|(a, b)| a * b).sum();
                for (v, a) in chunk.iter_mut().zip(xi) {
                    *v -= dot * a;
                }
            }
        }
    }
    x = orthonormalize(x);
    let mut previous: Option<Vec<f64>> = None;
    for _ in 0..opts.max_iterations {
        let z = &gram.matrix * &x;
        let mut t = x.transpose() * &z;
        t = (&t + t.transpose()) * 0.5;
        let (theta, v) = sorted_eigen(t);
        let az = &z * &v;
        let ritz = &x * &v;
        let noise = NOISE_FLOOR * theta[0].abs();
        let mut done = previous.is_some();
        for i in 0..count {
            let scale = theta[i].abs();
            let res = (az.column(i) - ritz.column(i) * theta[i]).norm();
            let moved = previous.as_ref().map_or(f64::INFINITY, |p| (p[i] - theta[i]).abs());
            if res > opts.residual_tol * scale + noise || moved > opts.value_tol * scale + noise {
                done = false;
                break;
            }
        }
        if done {
            return Ok((0..count)
                .map(|i| EigenPair {
                    value: theta[i],
                    function: deweight(gram, ritz.column(i).as_slice()),
                })
                .collect());
        }
        previous = Some(theta);
        x = orthonormalize(az);
    }
    Err(Error::Iteration {
        iterations: opts.max_iterations,
        detail: format!("top {count} eigenpairs of a {n}x{n} Gram matrix did not settle"),
    })
}

/// Dense symmetric eigendecomposition; returns the `count` largest pairs.
pub fn dense_eigenpairs(gram: &OracleGram, count: usize) -> Result<Vec<EigenPair>> {
    if count == 0 || count > gram.len() {
        return domain(format!("eigenpair count must lie in 1..={}, got {count}", gram.len()));
    }
    let (values, vectors) = sorted_eigen(gram.matrix.clone());
    Ok((0..count)
        .map(|i| EigenPair {
            value: values[i],
            function: deweight(gram, vectors.column(i).as_slice()),
        })
        .collect())
}

/// A run of nearly equal eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub start: usize,
    pub size: usize,
    pub mean: f64,
}

/// Groups descending eigenvalues whose consecutive relative gap is below `rel_gap`.
pub fn cluster_eigenvalues(values: &[f64], rel_gap: f64) -> Vec<Cluster> {
    let mut out: Vec<Cluster> = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len()
            || (values[i - 1] - values[i]).abs() > rel_gap * values[i - 1].abs().max(values[i].abs());
        if split {
            let members = &values[start..i];
            out.push(Cluster {
                start,
                size: members.len(),
                mean: members.iter().sum::<f64>() / members.len() as f64,
            });
            start = i;
        }
    }
    out
}

/// Node-sampled functions given as plain coefficient vectors, compared in the
/// grid's weighted inner product.
fn weighted_dot(grid: &SphereGrid, c: usize, a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(i, (x, y))| grid.weight(i / c) * x * y)
        .sum()
}

/// Largest relative residual of `vectors` after projection onto `span(basis)`.
pub fn span_residual(grid: &SphereGrid, components: usize, vectors: &[Vec<f64>], basis: &[Vec<f64>]) -> f64 {
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for q in &ortho {
            let c = weighted_dot(grid, components, q, &v);
            v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
        }
        let n = weighted_dot(grid, components, &v, &v).sqrt();
        if n > 1e-12 {
            v.iter_mut().for_each(|x| *x /= n);
            ortho.push(v);
        }
    }
    vectors
        .iter()
        .map(|v| {
            let mut r = v.clone();
            for q in &ortho {
                let c = weighted_dot(grid, components, q, v);
                r.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            (weighted_dot(grid, components, &r, &r) / weighted_dot(grid, components, v, v)).sqrt()
        })
        .fold(0.0, f64::max)
}

/// `‖L e‖²_{B_R} / ‖e‖²` for a density on the gram's grid.
pub fn rayleigh(gram: &OracleGram, density: &dyn Density) -> Result<f64> {
    let (re, im) = gram.weighted(density)?;
    let quad = |v: &[f64]| -> f64 {
        let av = gram.apply(v);
        v.iter().zip(&av).map(|(a, b)| a * b).sum()
    };
    let norm: f64 = re.iter().chain(&im).map(|v| v * v).sum();
    if !(norm > 0.0) {
        return domain("Rayleigh quotient of a zero density");
    }
    Ok((quad(&re) + quad(&im)) / norm)
}

/// `|B_R| |S^{d−1}| (d − 1)/d`, the small-radius limit of the top tangent eigenvalue.
pub fn lambda_plus(d: usize, radius: f64) -> Result<f64> {
    Ok(ball_volume(d, radius)? * surface_area(d)? * (d as f64 - 1.0) / d as f64)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return domain("power-law fit needs at least two positive (x, y) pairs");
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Outcome of [`perturbation_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub radius: f64,
    pub samples: usize,
    /// `max ‖(L − L₀)f‖ / (|S| R^{(d+2)/2} / √(d+2))` over the samples.
    pub max_difference_ratio: f64,
    /// `max ‖Lf‖ / √(|B_R||S|)` over the samples.
    pub max_norm_ratio: f64,
    pub violations: usize,
    /// `‖(L − L₀)1‖ / R^{(d+2)/2}` for the normalized constant density.
    pub constant_scaled: f64,
}

/// Compares `L` with its rank-one part `L₀ f = ∫ f dσ` on random unit densities.
///
/// Uses `‖(L−L₀)f‖² = ‖Lf‖² − (2K(1) − |B_R|) |∫ f dσ|²`, where `K(1)` is
/// [`ball_kernel`] at `q = 1`.
pub fn perturbation_check(grid: Arc<SphereGrid>, radius: f64, samples: usize, seed: u64) -> Result<PerturbationReport> {
    let d = grid.dim();
    let gram = OracleGram::assemble(Arc::clone(&grid), radius, Subspace::FullScalar)?;
    let s = surface_area(d)?;
    let vol = ball_volume(d, radius)?;
    let k1 = ball_kernel(d, radius, 1.0)?;
    let diff_bound = s * radius.powf((d as f64 + 2.0) / 2.0) / (d as f64 + 2.0).sqrt();
    let norm_bound = (vol * s).sqrt();
    let measure = |f: &dyn Density| -> Result<(f64, f64)> {
        let norm2 = f.norm_sqr();
        let lf2 = rayleigh(&gram, f)? * norm2;
        let mean = par::sum_range(grid.len(), |i| f.values()[i] * grid.weight(i));
        let diff2 = (lf2 - (2.0 * k1 - vol) * mean.norm_sqr()).max(0.0);
        Ok((diff2.sqrt() / norm2.sqrt(), lf2.sqrt() / norm2.sqrt()))
    };
    let mut report = PerturbationReport {
        radius,
        samples,
        max_difference_ratio: 0.0,
        max_norm_ratio: 0.0,
        violations: 0,
        constant_scaled: 0.0,
    };
    for k in 0..samples {
        let f = random_scalar_density(Arc::clone(&grid), seed.wrapping_add(k as u64), 3)?;
        let (diff, norm) = measure(&f)?;
        let (rd, rn) = (diff / diff_bound, norm / norm_bound);
        report.max_difference_ratio = report.max_difference_ratio.max(rd);
        report.max_norm_ratio = report.max_norm_ratio.max(rn);
        if rd > 1.0 || rn > 1.0 {
            report.violations += 1;
        }
    }
    let one = crate::fields::ScalarDensity::constant(Arc::clone(&grid), 1.0.into());
    report.constant_scaled = measure(&one)?.0 / radius.powf((d as f64 + 2.0) / 2.0);
    Ok(report)
}
