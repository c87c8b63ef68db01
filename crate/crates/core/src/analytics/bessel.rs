//! Modified Bessel functions of order zero from their integral representations.

use std::f64::consts::PI;

use super::quad::{integrate, wynn_epsilon, QuadratureSpec};
use crate::error::{invalid, Error, Result};

/// `I0(x) = (1/π) ∫_0^π e^{x cos t} dt`.
pub fn bessel_i0(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("I0 needs finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    Ok(i0e(x, spec)? * x.exp())
}

/// `K0(x) = ∫_0^∞ cos(xt) / sqrt(t² + 1) dt`.
///
/// The integral converges only conditionally. It is summed over the half
/// periods of `cos(xt)` and the partial sums are extrapolated.
pub fn bessel_k0(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("K0 needs finite x > 0, got {x}")));
    }
    let piece = spec.tightened(1e-2);
    let f = |t: f64| (x * t).cos() / (t * t + 1.0).sqrt();
    let zero = |k: usize| (k as f64 + 0.5) * PI / x;
    let mut sums = Vec::new();
    let mut total = 0.0;
    let mut left = 0.0;
    let mut last = f64::INFINITY;
    let mut settled = 0;
    for k in 0..400 {
        let right = zero(k);
        total += integrate(f, left, right, &piece)?.value;
        left = right;
        sums.push(total);
        if sums.len() < 6 {
            continue;
        }
        let tail = &sums[sums.len().saturating_sub(40)..];
        let (est, _) = wynn_epsilon(tail);
        if (est - last).abs() <= spec.abs_tol.max(spec.rel_tol * est.abs()) {
            settled += 1;
            if settled >= 2 {
                return Ok(est);
            }
        } else {
            settled = 0;
        }
        last = est;
    }
    Err(Error::Quadrature {
        value: last,
        error: f64::NAN,
    })
}

// Positive integrands, so tolerances are purely relative.
fn relative(spec: &QuadratureSpec) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: f64::MIN_POSITIVE,
        rel_tol: (spec.rel_tol * 0.1).max(1e-13),
        ..*spec
    }
}

/// `I0(z) e^{-z}`.
pub(crate) fn i0e(z: f64, spec: &QuadratureSpec) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    // the integrand is a bump of width ~ z^{-1/2} at t = 0
    let s = relative(spec);
    let g = |t: f64| (z * (t.cos() - 1.0)).exp();
    let w = (spec.truncation_radius * 2.0 / z).sqrt();
    let q = if w < PI {
        integrate(g, 0.0, w, &s)?.value + integrate(g, w, PI, &s)?.value
    } else {
        integrate(g, 0.0, PI, &s)?.value
    };
    Ok(q / PI)
}

/// `K0(z) e^{z} = ∫_0^∞ e^{-z (cosh t - 1)} dt`, cut where the exponent
/// reaches the truncation radius.
pub(crate) fn k0e(z: f64, spec: &QuadratureSpec) -> Result<f64> {
    let s = relative(spec);
    let g = |t: f64| (-z * (t.cosh() - 1.0)).exp();
    let top = (1.0 + spec.truncation_radius / z).acosh();
    // integrand is near 1 up to the knee, then falls off over O(1)
    let knee = (1.0 + 1.0 / z).acosh();
    let mut v = 0.0;
    if knee > 0.0 && knee < top {
        v += integrate(g, 0.0, knee, &s)?.value;
        v += integrate(g, knee, top, &s)?.value;
    } else {
        v += integrate(g, 0.0, top, &s)?.value;
    }
    Ok(v)
}

/// `(I0(rx)K0(x) - I0(x)K0(rx)) / (K0(x)² + π² I0(x)²)`.
pub fn bessel_l(x: f64, ratio: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("L needs finite x > 0, got {x}")));
    }
    if !(ratio >= 1.0) || !ratio.is_finite() {
        return Err(invalid(format!("L needs ratio >= 1, got {ratio}")));
    }
    l_damped(x, ratio, 0.0, spec)
}

/// `L(x) e^{-kx}`, assembled from scaled factors so that large arguments
/// neither overflow nor cancel.
pub(crate) fn l_damped(x: f64, r: f64, k: f64, spec: &QuadratureSpec) -> Result<f64> {
    if r == 1.0 {
        return Ok(0.0);
    }
    let rx = r * x;
    let (ia, ka) = (i0e(x, spec)?, k0e(x, spec)?);
    let (ib, kb) = (i0e(rx, spec)?, k0e(rx, spec)?);
    let num = ib * ka * ((r - 3.0 - k) * x).exp() - ia * kb * ((-1.0 - r - k) * x).exp();
    let den = ka * ka * (-4.0 * x).exp() + PI * PI * ia * ia;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn i0_series(x: f64) -> f64 {
        let q = x * x / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k * k) as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn scaled_forms_match_unscaled() {
        let s = QuadratureSpec::default();
        for x in [0.3, 1.0, 4.0, 20.0] {
            assert!((i0e(x, &s).unwrap() * x.exp() / i0_series(x) - 1.0).abs() < 1e-11);
        }
        for x in [0.3, 1.0, 4.0] {
            let k = bessel_k0(x, &s).unwrap();
            assert!((k0e(x, &s).unwrap() * (-x).exp() - k).abs() < 1e-9, "{x}");
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let s = QuadratureSpec::default();
        // I0(z) e^{-z} ~ 1/sqrt(2πz)
        let z = 1e5;
        let v = i0e(z, &s).unwrap();
        assert!((v * (2.0 * PI * z).sqrt() - 1.0).abs() < 1e-5);
        let k = k0e(1e-25, &s).unwrap();
        // K0(z) ~ -ln(z/2) - γ for small z
        let want = -(0.5e-25f64).ln() - 0.577_215_664_901_532_9;
        assert!((k / want - 1.0).abs() < 1e-9, "{k} {want}");
    }

    #[test]
    fn l_vanishes_at_unit_ratio() {
        let s = QuadratureSpec::default();
        assert_eq!(bessel_l(0.7, 1.0, &s).unwrap(), 0.0);
        assert!(bessel_l(0.7, 1.5, &s).unwrap() > 0.0);
    }

    #[test]
    fn rejects_domain() {
        let s = QuadratureSpec::default();
        assert!(bessel_i0(-1.0, &s).is_err());
        assert!(bessel_k0(0.0, &s).is_err());
        assert!(bessel_l(1.0, 0.5, &s).is_err());
    }
}
