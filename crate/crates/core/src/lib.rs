//! Optimal focusing of monochromatic scalar and electromagnetic waves.
//!
//! The crate computes the eigenvalue functions `Λ_{d,k}(R)` of the restricted
//! Fourier-extension operator `L*L`, the top eigenvalue of its divergence-free
//! (Maxwell) restriction together with the extremal density `ℓ(ξ)`, the sharp
//! pointwise bounds on fields synthesized from far-field densities, and the
//! energy-density curves `Λ/|B_R|`.
//!
//! Every analytic eigenvalue statement can be checked against [`oracle`], a
//! brute-force Nyström discretization of `L*L` on a product quadrature grid.
//!
//! Data-parallel loops (grid integration, batch synthesis, matrix assembly,
//! spectral tables) run on rayon when the default `parallel` feature is on and
//! sequentially otherwise. Reductions use a fixed chunking so results are
//! bit-identical for any worker count.

pub mod error;
pub mod fields;
pub mod oracle;
pub mod par;
pub mod quadrature;
pub mod specfun;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
