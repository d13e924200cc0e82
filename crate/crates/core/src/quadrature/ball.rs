use super::rules::GaussLegendre;
use super::sphere::SphereGrid;
use crate::error::{domain, Result};

/// Radial Gauss–Legendre nodes on `[0, R]` tensored with a [`SphereGrid`].
///
/// Node `(i, j)` sits at `r_i ξ_j` with weight `w_i r_i^{d-1} · ω_j`; radial
/// index is the major index.
#[derive(Debug, Clone, PartialEq)]
pub struct BallGrid {
    radius: f64,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
    sphere: SphereGrid,
}

pub fn ball_grid(d: usize, radius: f64, radial_points: usize, sphere: SphereGrid) -> Result<BallGrid> {
    if !(radius > 0.0) {
        return domain(format!("ball radius must be positive, got {radius}"));
    }
    if radial_points < 4 {
        return domain(format!("need at least 4 radial points, got {radial_points}"));
    }
    if sphere.dim() != d {
        return domain(format!("sphere grid is for d = {}, ball requested d = {d}", sphere.dim()));
    }
    let rule = GaussLegendre::new(radial_points)?;
    let (radii, radial_weights) = rule
        .on_interval(0.0, radius)
        .map(|(r, w)| (r, w * r.powi(d as i32 - 1)))
        .unzip();
    Ok(BallGrid {
        radius,
        radii,
        radial_weights,
        sphere,
    })
}

impl BallGrid {
    pub fn dim(&self) -> usize {
        self.sphere.dim()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Radial weights including the Jacobian `r^{d-1}`.
    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn sphere(&self) -> &SphereGrid {
        &self.sphere
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.sphere.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Iterates `(point, weight)` over all nodes.
    pub fn points(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        self.radii
            .iter()
            .zip(&self.radial_weights)
            .flat_map(move |(&r, &wr)| {
                self.sphere
                    .nodes()
                    .zip(self.sphere.weights())
                    .map(move |(xi, &ws)| (xi.iter().map(|v| r * v).collect(), wr * ws))
            })
    }

    /// `∫_{B_R} f dx` with the deterministic reduction of [`crate::par`].
    pub fn integrate_real<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let m = self.sphere.len();
        let d = self.dim();
        crate::par::sum_range(self.len(), |idx| {
            let (i, j) = (idx / m, idx % m);
            let r = self.radii[i];
            let mut x = [0.0; 3];
            for (slot, v) in x.iter_mut().zip(self.sphere.node(j)) {
                *slot = r * v;
            }
            self.radial_weights[i] * self.sphere.weight(j) * f(&x[..d])
        })
    }
}
