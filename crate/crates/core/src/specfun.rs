//! Bessel functions of real order, the gamma function, and sphere/ball measures.
//!
//! All functions are pure; nothing here keeps state between calls.

use std::f64::consts::PI;

use crate::error::{accuracy, domain, Result};
use crate::quadrature::rules::{integrate_adaptive, AdaptiveOptions};

/// Largest half-integer order served by the closed-form/recurrence path.
pub const MAX_RECURRENCE_ORDER: f64 = 10.5;

/// Order `ν > -1/2` of a Bessel function `J_ν`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= -0.5 {
            return domain(format!("Bessel order must exceed -1/2, got {nu}"));
        }
        Ok(Self(nu))
    }

    /// The order `(d + 2k - 2)/2` attached to degree-`k` harmonics in dimension `d`.
    pub fn for_harmonic(d: usize, k: usize) -> Result<Self> {
        if d < 2 {
            return domain(format!("dimension must be at least 2, got {d}"));
        }
        Self::new((d as f64 + 2.0 * k as f64 - 2.0) / 2.0)
    }

    pub fn nu(self) -> f64 {
        self.0
    }

    /// True for `ν ∈ {1/2, 3/2, 5/2, …}`, where elementary closed forms exist.
    pub fn is_half_integer(self) -> bool {
        let twice = 2.0 * self.0;
        twice >= 1.0 && twice.fract() == 0.0 && (twice as i64) % 2 == 1
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(x)` by the Lanczos approximation with reflection below 1/2.
///
/// Returns `±inf` at the poles `x = 0, -1, -2, …`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = (PI * x).sin();
        if s == 0.0 {
            return f64::INFINITY;
        }
        return PI / (s * gamma(1.0 - x));
    }
    if x > 171.7 {
        return f64::INFINITY;
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    let t = z + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    // Split the power to stay finite up to the overflow threshold.
    let p = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * p * (a * (-t).exp()) * p
}

/// `|S^{d-1}| = 2π^{d/2}/Γ(d/2)`.
pub fn surface_area(d: usize) -> Result<f64> {
    if d < 2 {
        return domain(format!("sphere dimension must be at least 2, got {d}"));
    }
    let half = d as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / gamma(half))
}

/// `|B_R(0)| = |S^{d-1}| R^d / d`.
pub fn ball_volume(d: usize, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return domain(format!("ball radius must be nonnegative, got {radius}"));
    }
    Ok(surface_area(d)? * radius.powi(d as i32) / d as f64)
}

fn check_argument(order: BesselOrder, t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("Bessel argument must be finite and nonnegative, got {t}"));
    }
    if t == 0.0 && order.nu() < 0.0 {
        return domain(format!("J_{} is singular at t = 0", order.nu()));
    }
    Ok(())
}

fn value_at_zero(order: BesselOrder) -> f64 {
    if order.nu() == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `J_ν(t)` for `t ≥ 0`.
///
/// Half-integer orders up to [`MAX_RECURRENCE_ORDER`] use the elementary
/// closed forms for `J_{1/2}`, `J_{3/2}` followed by upward recurrence when
/// `t ≥ ν`, and the ascending power series for `t < ν` where the recurrence
/// loses digits. Every other order is evaluated by [`bessel_j_reference`].
pub fn bessel_j(order: BesselOrder, t: f64) -> Result<f64> {
    check_argument(order, t)?;
    if t == 0.0 {
        return Ok(value_at_zero(order));
    }
    let nu = order.nu();
    if order.is_half_integer() && nu <= MAX_RECURRENCE_ORDER {
        if t < nu {
            return Ok(power_series(nu, t));
        }
        return Ok(half_integer_recurrence(nu, t));
    }
    bessel_j_reference(order, t)
}

fn half_integer_recurrence(nu: f64, t: f64) -> f64 {
    let scale = (2.0 / (PI * t)).sqrt();
    let (s, c) = t.sin_cos();
    let mut prev = scale * s;
    if nu == 0.5 {
        return prev;
    }
    let mut cur = scale * (s / t - c);
    let mut mu = 1.5;
    while mu < nu {
        // J_{μ+1} = (2μ/t) J_μ − J_{μ−1}
        let next = 2.0 * mu / t * cur - prev;
        prev = cur;
        cur = next;
        mu += 1.0;
    }
    cur
}

/// `Σ_m (-1)^m (t/2)^{2m+ν} / (m! Γ(m+ν+1))`.
fn power_series(nu: f64, t: f64) -> f64 {
    let x = 0.5 * t;
    let x2 = x * x;
    let mut term = x.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for m in 1..200 {
        let mf = m as f64;
        term *= -x2 / (mf * (mf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Absolute accuracy targeted by [`bessel_j_reference`].
pub const REFERENCE_ABS_TOL: f64 = 1e-13;

/// `J_ν(t)` by adaptive quadrature of the Poisson integral
/// `2 (t/2)^ν / (Γ(ν+1/2) Γ(1/2)) ∫_0^1 cos(ts) (1-s²)^{ν-1/2} ds`.
///
/// With `s = sin θ` the integrand becomes `cos(t sin θ) cos^{2ν} θ`, which is
/// bounded for `ν ≥ 1/2`. For `ν < 1/2` the endpoint factor `u^{2ν}` (with
/// `u = π/2 - θ`) is absorbed by the substitution `w = u^{2ν+1}`. Intended for
/// `t ≤ 50`; a tolerance that cannot be met is reported, not returned.
pub fn bessel_j_reference(order: BesselOrder, t: f64) -> Result<f64> {
    check_argument(order, t)?;
    if t == 0.0 {
        return Ok(value_at_zero(order));
    }
    let nu = order.nu();
    let prefactor = 2.0 * (0.5 * t).powf(nu) / (gamma(nu + 0.5) * PI.sqrt());
    if prefactor == 0.0 || !prefactor.is_finite() {
        return accuracy(format!("Bessel prefactor under/overflows for nu={nu}, t={t}"));
    }
    let opts = AdaptiveOptions {
        abs_tol: REFERENCE_ABS_TOL / prefactor,
        rel_tol: 1e-15,
        max_intervals: 20_000,
    };
    let integral = if nu >= 0.5 {
        let power = 2.0 * nu;
        integrate_adaptive(
            |theta: f64| (t * theta.sin()).cos() * theta.cos().powf(power),
            0.0,
            0.5 * PI,
            opts,
        )?
    } else {
        let beta = 2.0 * nu + 1.0;
        let upper = (0.5 * PI).powf(beta);
        let integral = integrate_adaptive(
            |w: f64| {
                let u = w.powf(1.0 / beta);
                let sinc = if u < 1e-8 { 1.0 - u * u / 6.0 } else { u.sin() / u };
                (t * u.cos()).cos() * sinc.powf(2.0 * nu)
            },
            0.0,
            upper,
            opts,
        )?;
        crate::quadrature::rules::Estimate {
            value: integral.value / beta,
            error: integral.error / beta,
            intervals: integral.intervals,
        }
    };
    Ok(prefactor * integral.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn surface_areas() {
        assert!((surface_area(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((surface_area(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        // 2π^{d/2}/Γ(d/2) at d = 4 with Γ(2) = 1.
        assert!((surface_area(4).unwrap() - 2.0 * PI * PI).abs() < 1e-12);
        assert!((surface_area(4).unwrap() - 19.739_208_802).abs() < 1e-9);
        assert!(surface_area(1).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert!((ball_volume(3, 1.0).unwrap() - 4.188_790_205).abs() < 1e-9);
        assert!((ball_volume(2, 2.0).unwrap() - 4.0 * PI).abs() < 1e-13);
        for d in 2..7 {
            assert_eq!(ball_volume(d, 0.0).unwrap(), 0.0);
            let r = 1.7;
            assert_eq!(
                ball_volume(d, r).unwrap(),
                surface_area(d).unwrap() * r.powi(d as i32) / d as f64
            );
        }
        assert!(ball_volume(3, -1.0).is_err());
    }

    #[test]
    fn gamma_half_integer_ladder() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let mut exact = PI.sqrt();
        for n in 0..20 {
            let x = n as f64 + 0.5;
            let got = gamma(x);
            assert!(((got - exact) / exact).abs() < 1e-13, "Γ({x}) = {got} vs {exact}");
            exact *= x;
        }
    }

    #[test]
    fn gamma_integers() {
        let mut fact = 1.0;
        for n in 1..20 {
            let got = gamma(n as f64);
            assert!(((got - fact) / fact).abs() < 1e-13);
            fact *= n as f64;
        }
    }

    #[test]
    fn half_integer_flag() {
        assert!(order(0.5).is_half_integer());
        assert!(order(4.5).is_half_integer());
        assert!(!order(0.0).is_half_integer());
        assert!(!order(1.0).is_half_integer());
        assert!(!order(0.25).is_half_integer());
        assert!(BesselOrder::new(-0.5).is_err());
        assert_eq!(BesselOrder::for_harmonic(3, 2).unwrap().nu(), 2.5);
    }

    #[test]
    fn closed_forms() {
        let v = bessel_j(order(0.5), PI / 2.0).unwrap();
        assert!((v - 2.0 / PI).abs() < 1e-15);
        let r = bessel_j_reference(order(0.5), 1.0).unwrap();
        assert!((r - (2.0 / PI).sqrt() * 1f64.sin()).abs() < 1e-12);
        assert!((r - 0.671_396_707).abs() < 1e-9);
        assert_eq!(bessel_j_reference(order(0.0), 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(order(1.5), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn two_paths_agree() {
        for nu in [0.5, 1.5, 2.5, 3.5, 4.5, 6.5, 10.5] {
            for t in [0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
                let a = bessel_j(order(nu), t).unwrap();
                let b = bessel_j_reference(order(nu), t).unwrap();
                assert!((a - b).abs() < 1e-12, "nu={nu} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn reference_matches_integer_order_series() {
        // J_0(1), J_1(2), J_{1/4}(1.3) against the ascending series.
        for (nu, t) in [(0.0, 1.0), (1.0, 2.0), (0.25, 1.3), (-0.25, 0.7), (2.0, 7.0)] {
            let a = bessel_j_reference(order(nu), t).unwrap();
            let b = power_series(nu, t);
            assert!((a - b).abs() < 1e-12, "nu={nu} t={t}: {a} vs {b}");
        }
        assert!((bessel_j(order(0.0), 1.0).unwrap() - 0.765_197_686_557_966_6).abs() < 1e-13);
    }

    #[test]
    fn small_argument_order() {
        for nu in [0.5, 1.5, 2.5] {
            let ratios: Vec<f64> = (1..8)
                .map(|m| {
                    let t = 10f64.powi(-m);
                    bessel_j(order(nu), t).unwrap() / t.powf(nu)
                })
                .collect();
            let limit = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
            let last = *ratios.last().unwrap();
            assert!(last > 0.0 && ((last - limit) / limit).abs() < 1e-10);
        }
    }

    #[test]
    fn ratio_bound_for_consecutive_orders() {
        // J_{ν+1}(t)/J_ν(t) > t/(2ν + 2) while J_ν(t) > 0
        for nu in [0.5, 1.5, 2.5] {
            for i in 1..=40 {
                let r = PI / 2.0 * i as f64 / 40.0;
                let ratio = bessel_j(order(nu + 1.0), r).unwrap() / bessel_j(order(nu), r).unwrap();
                assert!(ratio > r / (2.0 * nu + 2.0), "nu={nu} r={r}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bessel_j(order(0.5), -1.0).is_err());
        assert!(bessel_j_reference(order(-0.25), 0.0).is_err());
    }
}
