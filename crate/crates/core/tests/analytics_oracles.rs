//! Analytics checked against independently coded series and quadratures.

use brownian_core::analytics::{
    bessel_first_passage, bessel_i0, bessel_k0, bessel_l, first_passage_parts, spitzer_limit,
    zero_hit_prob, QuadratureSpec,
};
use libm::erfc;

mod common;

use common::special::{e1_series, GAMMA, i0_series, k0_cosh, k0_series, log_grid};

// e^{z²} erfc(z), switching to the continued fraction for large z.
fn erfcx(z: f64) -> f64 {
    if z < 5.0 {
        return (z * z).exp() * erfc(z);
    }
    let mut f = 0.0;
    for k in (1..60).rev() {
        f = (k as f64 / 2.0) / (z + f);
    }
    1.0 / (std::f64::consts::PI.sqrt() * (z + f))
}

#[test]
fn i0_matches_series_on_log_grid() {
    let s = QuadratureSpec::default();
    assert_eq!(bessel_i0(0.0, &s).unwrap(), 1.0);
    for x in log_grid(64) {
        let got = bessel_i0(x, &s).unwrap();
        assert!((got - i0_series(x)).abs() <= 1e-6, "x={x}: {got}");
    }
    assert!((bessel_i0(1.0, &s).unwrap() - 1.266_065_877_752_008_4).abs() < 1e-12);
}

#[test]
fn k0_matches_series_and_cosh_form() {
    let s = QuadratureSpec::default();
    for x in log_grid(64) {
        let got = bessel_k0(x, &s).unwrap();
        assert!((got - k0_series(x)).abs() <= 1e-6, "x={x}: {got} vs {}", k0_series(x));
        assert!((got - k0_cosh(x)).abs() <= 1e-6, "x={x}: {got} vs {}", k0_cosh(x));
    }
    let tight = s.tightened(0.1);
    let a = bessel_k0(1.0, &s).unwrap();
    assert!((a - bessel_k0(1.0, &tight).unwrap()).abs() < 1e-9);
    assert!((a - 0.421_024_438_240_708_3).abs() < 1e-9);
}

#[test]
fn l_composes_from_series() {
    let s = QuadratureSpec::default();
    let (x, r) = (1.0, 2.0);
    let want = (i0_series(r * x) * k0_series(x) - i0_series(x) * k0_series(r * x))
        / (k0_series(x).powi(2) + std::f64::consts::PI.powi(2) * i0_series(x).powi(2));
    let got = bessel_l(x, r, &s).unwrap();
    assert!((got - want).abs() < 1e-10, "{got} {want}");
    for (x, r) in [(0.01, 3.0), (0.5, 1.01), (3.0, 10.0)] {
        assert!(bessel_l(x, r, &s).unwrap() > 0.0);
    }
}

#[test]
fn spitzer_limit_matches_exponential_integral() {
    let s = QuadratureSpec::default();
    assert!((spitzer_limit(1.0, &s).unwrap() - 0.5 * e1_series(0.5)).abs() < 1e-10);
    assert!((spitzer_limit(2f64.sqrt(), &s).unwrap() - 0.5 * e1_series(1.0)).abs() < 1e-10);
    assert!((spitzer_limit(1.0, &s).unwrap() - 0.279_886_8).abs() < 1e-6);
    assert!(spitzer_limit(12.0, &s).unwrap() < 1e-30);
}

#[test]
fn crossing_term_is_reflection_law() {
    let s = QuadratureSpec::default();
    let p = first_passage_parts(1.5, 0.5, &s).unwrap();
    assert!((p.crossing - erfc(1.0 / 2f64.sqrt())).abs() < 1e-10);
    assert!((p.crossing - 0.317_310_507_862_914).abs() < 1e-10);
}

// Scaled I0(z)e^{-z} and K0(z)e^{z}: power series for small z, the
// asymptotic expansion beyond.
fn asymptotic(z: f64, sign: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..30 {
        let odd = (2 * k - 1) as f64;
        term *= sign * odd * odd / (k as f64 * 8.0 * z);
        sum += term;
    }
    sum
}

fn i0_scaled(z: f64) -> f64 {
    if z <= 30.0 {
        i0_series(z) * (-z).exp()
    } else {
        asymptotic(z, 1.0) / (2.0 * std::f64::consts::PI * z).sqrt()
    }
}

fn k0_scaled(z: f64) -> f64 {
    if z <= 10.0 {
        k0_series(z) * z.exp()
    } else {
        asymptotic(z, -1.0) * (std::f64::consts::PI / (2.0 * z)).sqrt()
    }
}

// The s-integral of the Gaussian weight times e^{-x a/(eps √s)} is closed:
// e^{-a²/2 - b} erfcx((a + b/a)/√2) with b = x a / eps. That leaves a single
// integral over x, done here with Simpson's rule on a fixed log grid.
fn correction_swapped(radius: f64, eps: f64) -> f64 {
    let a = radius - eps;
    let r = radius / eps;
    let n = 30000;
    let (u0, u1) = (-(60f64.ln()), r.ln() + 60.0);
    let h = (u1 - u0) / n as f64;
    let pi = std::f64::consts::PI;
    let f = |u: f64| {
        let x = (-u).exp();
        let b = x * a / eps;
        // L(x) e^{-b}, using b = (r - 1) x
        let num = i0_scaled(r * x) * k0_scaled(x)
            - i0_scaled(x) * k0_scaled(r * x) * (-2.0 * (r - 1.0) * x).exp();
        let den = k0_scaled(x).powi(2) * (-2.0 * x).exp() + pi * pi * i0_scaled(x).powi(2) * (2.0 * x).exp();
        num / den * (-a * a / 2.0).exp() * erfcx((a + b / a) / 2f64.sqrt())
    };
    let mut acc = f(u0) + f(u1);
    for i in 1..n {
        acc += f(u0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let c = 2f64.ln() - GAMMA;
    let small = r.ln() / pi * (pi / 2.0 - ((u1 + c) / pi).atan()) * erfc(a / 2f64.sqrt());
    acc * h / 3.0 + small
}

#[test]
fn first_passage_matches_swapped_order_oracle() {
    let s = QuadratureSpec::default();
    for eps in [0.1, 0.01, 0.001] {
        let p = first_passage_parts(1.0, eps, &s).unwrap();
        let want = correction_swapped(1.0, eps);
        assert!((p.correction - want).abs() < 1e-7, "eps={eps}: {} vs {want}", p.correction);
        assert!(p.tail_bound < 1e-12);
    }
}

#[test]
fn first_passage_frozen_values() {
    // log(1/eps) * P(1, eps), computed once and cross-checked by the swapped-order oracle
    let s = QuadratureSpec::default();
    for (eps, want) in [(0.1, 0.33892), (0.01, 0.31220), (0.001, 0.301475)] {
        let v = (1.0 / eps as f64).ln() * bessel_first_passage(1.0, eps, &s).unwrap();
        assert!((v - want).abs() < 5e-5, "eps={eps}: {v}");
    }
}

#[test]
fn arctan_asymptotics() {
    for k in 2..=8 {
        let eps = 10f64.powi(-k);
        let ratio = zero_hit_prob(1.0, eps).unwrap() / (2.0 / std::f64::consts::PI * eps.sqrt());
        assert!((ratio - 1.0).abs() < 1e-2);
    }
}
