use std::f64::consts::PI;
use std::sync::Arc;

use focusopt::fields::{
    derivative_bound_check, divergence, ell, far_field_check, harmonic_field, laplacian_spot_check, masked_optimum,
    origin_bound, random_scalar_density, random_tangent_density, standard_family, synthesize, BoundKind, Density,
    HarmonicPolynomial, Rotation3, ScalarDensity, StandardHarmonic, TangentDensity, VectorDensity,
};
use focusopt::quadrature::{sphere_grid, SphereGrid};
use focusopt::specfun::{bessel_j, BesselOrder};
use focusopt::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(d: usize, res: usize) -> Arc<SphereGrid> {
    Arc::new(sphere_grid(d, res).unwrap())
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn random_point(rng: &mut ChaCha8Rng, d: usize, r: f64) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-r..r)).collect()
}

#[test]
fn constant_density_is_a_sinc() {
    let g = grid(3, 40);
    let f = ScalarDensity::constant(g, Complex64::new(1.0, 0.0));
    for r in [0.3, 1.0, PI, 7.5, 11.0] {
        let u = synthesize(&f, &[0.0, r * 0.6, r * 0.8]).unwrap().e[0];
        let want = 4.0 * PI * r.sin() / r;
        assert!((u.re - want).abs() <= 1e-9 * want.abs().max(1e-3), "r = {r}");
        assert!(u.im.abs() < 1e-9);
    }
    let u0 = synthesize(&f, &[0.0; 3]).unwrap().e[0];
    assert!((u0.re - 4.0 * PI).abs() < 1e-12);
}

#[test]
fn ell_at_origin() {
    let g = grid(3, 16);
    let s = synthesize(&TangentDensity::ell(g), &[0.0; 3]).unwrap();
    assert!((s.e[0].re - 8.0 * PI / 3.0).abs() < 1e-12);
    assert!(s.e[1].norm() < 1e-13 && s.e[2].norm() < 1e-13);
    assert!(norm(&s.b) < 1e-13);
}

#[test]
fn projection_examples() {
    let g = grid(3, 12);
    let v = VectorDensity::from_fn(Arc::clone(&g), |_, out| {
        out.fill(Complex64::new(0.0, 0.0));
        out[0] = Complex64::new(1.0, 0.0);
    })
    .unwrap();
    let p = v.project();
    for (i, xi) in g.nodes().enumerate() {
        let want = ell(xi).unwrap();
        for (a, w) in want.iter().enumerate() {
            assert!((p.value(i)[a].re - w).abs() < 1e-15);
        }
    }
    let again = VectorDensity::new(Arc::clone(&g), p.values().to_vec()).unwrap().project();
    let diff: f64 = again.values().iter().zip(p.values()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    assert!(diff < 1e-14);
    let radial = VectorDensity::from_fn(Arc::clone(&g), |xi, out| {
        for (o, x) in out.iter_mut().zip(xi) {
            *o = Complex64::new(*x, 0.0);
        }
    })
    .unwrap();
    assert!(radial.project().norm() < 1e-14);
}

#[test]
fn divergence_vanishes_for_tangent_densities() {
    let g = grid(3, 24);
    let e = random_tangent_density(g, 11, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let x = random_point(&mut rng, 3, 2.0);
        assert!(divergence(&e, &x).unwrap().norm() <= 1e-10, "x = {x:?}");
    }
}

fn analytic_tangent(xi: &[f64], out: &mut [Complex64]) {
    // Π(v) + i ξ × w for fixed v, w.
    let v = [0.3, -0.7, 0.5];
    let w = [0.2, 0.4, -0.1];
    let dot: f64 = xi.iter().zip(v).map(|(a, b)| a * b).sum();
    let cross = [
        xi[1] * w[2] - xi[2] * w[1],
        xi[2] * w[0] - xi[0] * w[2],
        xi[0] * w[1] - xi[1] * w[0],
    ];
    for a in 0..3 {
        out[a] = Complex64::new(v[a] - dot * xi[a], cross[a]);
    }
}

#[test]
fn synthesis_commutes_with_rotation() {
    let g = grid(3, 28);
    let q = Rotation3::from_axis_angle([1.0, 2.0, -0.5], 0.9).unwrap();
    let qt = q.transpose();
    let e = TangentDensity::from_fn(Arc::clone(&g), analytic_tangent).unwrap();
    let rotated = TangentDensity::from_fn(Arc::clone(&g), |xi, out| {
        let mut tmp = [Complex64::new(0.0, 0.0); 3];
        analytic_tangent(&qt.apply(xi), &mut tmp);
        out.copy_from_slice(&q.apply_complex(&tmp));
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..5 {
        let x = random_point(&mut rng, 3, 2.0);
        let lhs = synthesize(&rotated, &q.apply(&x)).unwrap();
        let rhs = q.apply_complex(&synthesize(&e, &x).unwrap().e);
        let err: f64 = lhs.e.iter().zip(&rhs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "x = {x:?}: {err:e}");
    }
}

#[test]
fn rotations_compose_orthogonally() {
    let a = Rotation3::from_axis_angle([0.0, 0.0, 1.0], 1.1).unwrap();
    let b = Rotation3::from_axis_angle([1.0, -1.0, 0.3], -2.4).unwrap();
    assert!(a.compose(&b).orthogonality_error() < 1e-14);
    assert!(a.compose(&a.transpose()).orthogonality_error() < 1e-14);
}

#[test]
fn closed_form_matches_synthesis_on_harmonics() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for d in [2, 3] {
        let g = grid(d, 30);
        for k in 0..=3 {
            for p in standard_family(d, k) {
                let f = ScalarDensity::from_fn(Arc::clone(&g), |xi| Complex64::new(p.eval(xi), 0.0)).unwrap();
                let scale = norm(&synthesize(&f, &vec![0.7; d]).unwrap().e).max(1e-2);
                for _ in 0..4 {
                    let x = random_point(&mut rng, d, 3.0);
                    let a = harmonic_field(&p, &x).unwrap();
                    let b = synthesize(&f, &x).unwrap().e[0];
                    let rel = (a - b).norm() / a.norm().max(scale);
                    assert!(rel < 1e-8, "d = {d}, {p:?}, x = {x:?}: {rel:e}");
                }
            }
        }
    }
}

#[test]
fn closed_form_examples() {
    let r = 1.3;
    let lin = StandardHarmonic::Linear { d: 3, j: 0 };
    let v = harmonic_field(&lin, &[r, 0.0, 0.0]).unwrap();
    let j = bessel_j(BesselOrder::new(1.5).unwrap(), r).unwrap();
    let want = Complex64::i() * (2.0 * PI).powf(1.5) * r.powf(-0.5) * j;
    assert!((v - want).norm() < 1e-13);
    let quad = StandardHarmonic::Product { d: 3, i: 0, j: 1 };
    let dir = [0.6, 0.8, 0.0];
    let small: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|t| harmonic_field(&quad, &dir.map(|c| c * t)).unwrap().norm() / (t * t))
        .collect();
    assert!((small[0] / small[1] - 1.0).abs() < 1e-3);
    assert_eq!(harmonic_field(&lin, &[0.0; 3]).unwrap(), Complex64::new(0.0, 0.0));
    let c2 = harmonic_field(&StandardHarmonic::Constant { d: 2 }, &[0.0, 0.0]).unwrap();
    assert!((c2.re - 2.0 * PI).abs() < 1e-14);
}

#[test]
fn non_harmonic_polynomial_is_rejected() {
    struct Square;
    impl HarmonicPolynomial for Square {
        fn dim(&self) -> usize {
            3
        }
        fn degree(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64]) -> f64 {
            x[0] * x[0]
        }
    }
    assert!(laplacian_spot_check(&Square, 1).is_err());
    assert!(harmonic_field(&Square, &[0.1, 0.2, 0.3]).is_err());
}

#[test]
fn origin_bound_constants() {
    let s = origin_bound(3, BoundKind::Scalar).unwrap();
    let m = origin_bound(3, BoundKind::Maxwell).unwrap();
    assert!((s - 3.5449).abs() < 1e-4);
    assert!((m - 2.8944).abs() < 1e-4);
    assert!(((m / s).powi(2) - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn saturation_requires_an_ell_rotate() {
    let g = grid(3, 16);
    let bound = origin_bound(3, BoundKind::Maxwell).unwrap();
    let rotates: Vec<TangentDensity> = (0..3).map(|a| TangentDensity::ell_rotate(Arc::clone(&g), a)).collect();
    for seed in 0..10 {
        let e = random_tangent_density(Arc::clone(&g), seed, 3).unwrap();
        let mut values = e.values().to_vec();
        for r in &rotates {
            let c = r.inner(&e) / r.norm_sqr();
            values.iter_mut().zip(r.values()).for_each(|(v, w)| *v -= c * w);
        }
        let orth = TangentDensity::new(Arc::clone(&g), values).unwrap().normalized().unwrap();
        let e0 = norm(&synthesize(&orth, &[0.0; 3]).unwrap().e);
        assert!(e0 < 1e-12 * bound, "seed {seed}: {e0:e}");
        let uproj = norm(&synthesize(&e, &[0.0; 3]).unwrap().e);
        assert!(uproj < bound * (1.0 - 1e-3), "seed {seed}");
    }
    let best = rotates[1].normalized().unwrap();
    let e0 = norm(&synthesize(&best, &[0.0; 3]).unwrap().e);
    assert!((e0 - bound).abs() < 1e-12);
}

#[test]
fn masked_optima() {
    let g = grid(3, 40);
    let (_, full) = masked_optimum(Arc::clone(&g), |_| true).unwrap();
    assert!((full - (8.0 * PI / 3.0).sqrt()).abs() < 1e-12);
    let (_, pole) = masked_optimum(Arc::clone(&g), |xi| xi[0] > 0.999).unwrap();
    assert!(pole < 0.1 * full);
    assert!(masked_optimum(Arc::clone(&g), |_| false).is_err());
    let band = |c: f64| masked_optimum(Arc::clone(&g), move |xi| (xi[0] - c).abs() < 0.2).unwrap().1;
    let equator = band(0.0);
    for c in [0.3, 0.5, 0.79, -0.6] {
        assert!(equator > band(c), "band centred at {c}");
    }
}

#[test]
fn derivative_bounds() {
    let g = grid(3, 24);
    let ell = TangentDensity::ell(Arc::clone(&g)).normalized().unwrap();
    let at0 = derivative_bound_check(&ell, &[0.0; 3], &[0, 0, 0], 1e-2).unwrap();
    assert!(at0.holds && (at0.value - at0.bound).abs() < 1e-8);
    let e = random_tangent_density(Arc::clone(&g), 2, 3).unwrap();
    let d1 = derivative_bound_check(&e, &[0.3, 0.1, 0.0], &[1, 0, 0], 1e-2).unwrap();
    assert!(d1.holds && d1.value < d1.bound);
    let f = random_scalar_density(Arc::clone(&g), 4, 3).unwrap();
    let d2 = derivative_bound_check(&f, &[0.2, -0.1, 0.4], &[0, 1, 1], 1e-2).unwrap();
    assert!(d2.holds);
    assert!((d2.bound - origin_bound(3, BoundKind::Scalar).unwrap()).abs() < 1e-12);
}

#[test]
fn far_field_profiles() {
    let g = grid(3, 420);
    let ell = TangentDensity::ell(Arc::clone(&g));
    let rep = far_field_check(&ell, 100.0).unwrap();
    assert!(rep.correlation > 0.999, "{rep:?}");
    assert!((rep.decay_exponent - 1.0).abs() < 0.05, "{rep:?}");
    let one = ScalarDensity::constant(Arc::clone(&g), Complex64::new(1.0, 0.0));
    let rep = far_field_check(&one, 100.0).unwrap();
    assert!((rep.amplitude - 4.0 * PI).abs() < 1e-6, "{rep:?}");
    let u = synthesize(&one, &[0.0, 100.0, 0.0]).unwrap().e[0];
    assert!((100.0 * u.re - 4.0 * PI * 100f64.sin()).abs() < 1e-8);
    assert!(far_field_check(&TangentDensity::ell(grid(3, 64)), 100.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_densities_respect_origin_bounds(seed in any::<u64>()) {
        let g = grid(3, 16);
        let f = random_scalar_density(Arc::clone(&g), seed, 3).unwrap();
        let u0 = synthesize(&f, &[0.0; 3]).unwrap().e[0].norm();
        prop_assert!(u0 <= origin_bound(3, BoundKind::Scalar).unwrap() * (1.0 + 1e-12));
        let e = random_tangent_density(g, seed, 3).unwrap();
        let e0 = norm(&synthesize(&e, &[0.0; 3]).unwrap().e);
        prop_assert!(e0 <= origin_bound(3, BoundKind::Maxwell).unwrap() * (1.0 + 1e-12));
    }
}
