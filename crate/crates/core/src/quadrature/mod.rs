//! Quadrature on `S^{d-1}` (d = 2, 3), on balls `B_R(0)`, and on intervals.

mod ball;
pub mod rules;
mod sphere;

pub use ball::{ball_grid, BallGrid};
pub use rules::{integrate_adaptive, AdaptiveOptions, Estimate, GaussLegendre};
pub use sphere::{sphere_grid, SphereGrid};
