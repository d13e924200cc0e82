use std::f64::consts::PI;

use num_complex::Complex64;

use super::rules::GaussLegendre;
use crate::error::{domain, Result};
use crate::par;

/// Product quadrature on the unit sphere `S^{d-1}` for `d ∈ {2, 3}`.
///
/// * `d = 2`: `n` equally spaced angles with weights `2π/n` (trapezoid rule).
/// * `d = 3`: Gauss–Legendre in `ξ₃ = cos θ` (`n` nodes) times `2n` uniform
///   azimuths. Nodes are stored polar index major, azimuth index minor, so a
///   given resolution always yields the same node sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    dim: usize,
    resolution: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness: usize,
}

/// Builds the product grid described on [`SphereGrid`].
pub fn sphere_grid(d: usize, resolution: usize) -> Result<SphereGrid> {
    if resolution < 4 {
        return domain(format!("sphere grid resolution must be at least 4, got {resolution}"));
    }
    match d {
        2 => {
            let n = resolution;
            let w = 2.0 * PI / n as f64;
            let mut nodes = Vec::with_capacity(2 * n);
            for j in 0..n {
                let (s, c) = (2.0 * PI * j as f64 / n as f64).sin_cos();
                nodes.extend([c, s]);
            }
            Ok(SphereGrid {
                dim: 2,
                resolution,
                nodes,
                weights: vec![w; n],
                exactness: n - 1,
            })
        }
        3 => {
            let polar = GaussLegendre::new(resolution)?;
            let azimuths = 2 * resolution;
            let dphi = 2.0 * PI / azimuths as f64;
            let mut nodes = Vec::with_capacity(3 * resolution * azimuths);
            let mut weights = Vec::with_capacity(resolution * azimuths);
            for (&z, &wz) in polar.nodes().iter().zip(polar.weights()) {
                let rho = (1.0 - z * z).sqrt();
                for j in 0..azimuths {
                    let (s, c) = (dphi * j as f64).sin_cos();
                    nodes.extend([rho * c, rho * s, z]);
                    weights.push(wz * dphi);
                }
            }
            Ok(SphereGrid {
                dim: 3,
                resolution,
                nodes,
                weights,
                exactness: 2 * resolution - 1,
            })
        }
        _ => domain(format!("sphere grids exist for d = 2, 3 only, got {d}")),
    }
}

impl SphereGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        self.exactness
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest `|x|` for which synthesis on this grid meets its accuracy
    /// contract (`resolution ≥ 2|x| + 16`).
    pub fn max_synthesis_radius(&self) -> f64 {
        (self.resolution as f64 - 16.0) / 2.0
    }

    /// `∫ f dσ` for a real integrand.
    pub fn integrate_real<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        par::sum_range(self.len(), |i| self.weights[i] * f(self.node(i)))
    }

    /// `∫ f dσ` for a complex integrand.
    pub fn integrate<F>(&self, f: F) -> Complex64
    where
        F: Fn(&[f64]) -> Complex64 + Sync + Send,
    {
        par::sum_range(self.len(), |i| f(self.node(i)) * self.weights[i])
    }

    /// `∫ f dσ` for a vector integrand with `components` entries; `f` writes
    /// the value at a node into its output slice.
    pub fn integrate_vector<F>(&self, components: usize, f: F) -> Vec<Complex64>
    where
        F: Fn(&[f64], &mut [Complex64]) + Sync + Send,
    {
        let n = self.len();
        let mut values = vec![Complex64::new(0.0, 0.0); n * components];
        par::fill_blocks(&mut values, components * par::CHUNK, |block, out| {
            for (local, slot) in out.chunks_exact_mut(components).enumerate() {
                let i = block * par::CHUNK + local;
                f(self.node(i), slot);
            }
        });
        (0..components)
            .map(|c| par::sum_range(n, |i| values[i * components + c] * self.weights[i]))
            .collect()
    }

    /// Weighted sum of precomputed nodal values.
    pub fn integrate_values(&self, values: &[Complex64]) -> Complex64 {
        assert_eq!(values.len(), self.len(), "one value per node");
        par::sum_range(self.len(), |i| values[i] * self.weights[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::surface_area;

    #[test]
    fn weights_sum_to_area() {
        for (d, res) in [(2, 4), (2, 9), (3, 4), (3, 16), (3, 31)] {
            let g = sphere_grid(d, res).unwrap();
            let s: f64 = g.weights().iter().sum();
            let area = surface_area(d).unwrap();
            assert!(((s - area) / area).abs() < 1e-12, "d={d} res={res}");
            assert!(g.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn nodes_are_unit() {
        let g = sphere_grid(3, 20).unwrap();
        for x in g.nodes() {
            let r: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((r - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn second_and_fourth_moments() {
        for res in 4..12 {
            let g = sphere_grid(3, res).unwrap();
            let m = g.integrate_real(|x| x[0] * x[0]);
            assert!((m - 4.0 * PI / 3.0).abs() < 1e-12);
            let odd = g.integrate_real(|x| x[0] * x[1]);
            assert!(odd.abs() < 1e-12);
        }
        let g = sphere_grid(2, 8).unwrap();
        let m = g.integrate_real(|x| x[0].powi(4));
        assert!((m - 3.0 * PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(sphere_grid(4, 10).is_err());
        assert!(sphere_grid(3, 3).is_err());
    }

    #[test]
    fn vector_integration_is_componentwise() {
        let g = sphere_grid(3, 8).unwrap();
        let v = g.integrate_vector(3, |x, out| {
            for (o, xi) in out.iter_mut().zip(x) {
                *o = Complex64::new(xi * xi, -xi * xi);
            }
        });
        for c in v {
            assert!((c.re - 4.0 * PI / 3.0).abs() < 1e-12);
            assert!((c.im + 4.0 * PI / 3.0).abs() < 1e-12);
        }
    }
}
