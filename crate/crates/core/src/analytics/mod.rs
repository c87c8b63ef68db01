//! Closed forms and quadratures for hitting probabilities.
//!
//! Everything here is pure and deterministic.

mod bessel;
mod passage;
pub mod quad;

use std::f64::consts::PI;

use libm::erf;

pub use bessel::{bessel_i0, bessel_k0, bessel_l};
pub use passage::{bessel_first_passage, first_passage_parts, FirstPassage};
pub use quad::{integrate, Quadrature, QuadratureSpec};

use crate::error::{invalid, Result};

/// Constant in the two-interval zero bound: the product of two `2/π` factors.
pub const TWO_INTERVAL_CONSTANT: f64 = 4.0 / (PI * PI);

/// Probability that a path from the origin has a zero in `[a, a + eps]`.
pub fn zero_hit_prob(a: f64, eps: f64) -> Result<f64> {
    if !(a > 0.0 && eps > 0.0 && a.is_finite() && eps.is_finite()) {
        return Err(invalid(format!("need a > 0 and eps > 0, got a={a}, eps={eps}")));
    }
    Ok(2.0 / PI * (eps / a).sqrt().atan())
}

/// Upper bound on the chance of zeros in two `eps`-intervals, the first
/// starting at `a`, separated by `delta`.
pub fn two_interval_bound(a: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(a > 0.0 && eps > 0.0 && delta > 0.0) {
        return Err(invalid(format!(
            "need a, eps, delta > 0, got a={a}, eps={eps}, delta={delta}"
        )));
    }
    Ok(TWO_INTERVAL_CONSTANT * eps / (a * delta).sqrt())
}

/// `Pr(max_{[0,y]} B <= a)`.
pub fn max_cdf(a: f64, y: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    erf(a / (2.0 * y).sqrt())
}

/// `∫_{R²/2}^∞ e^{-x} / (2x) dx`, the limit of `log(1/eps)` times the
/// first-passage probability.
///
/// Computed as `∫_0^V e^{-z0 e^v} / 2 dv` with `x = z0 e^v`; the cut `V` puts
/// `x` at `z0 + T`, leaving a tail below `e^{-(z0+T)} / (2(z0+T))`.
pub fn spitzer_limit(radius: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("need R > 0, got {radius}")));
    }
    let z0 = radius * radius / 2.0;
    let top = ((z0 + spec.truncation_radius) / z0).ln();
    Ok(integrate(|v| 0.5 * (-z0 * v.exp()).exp(), 0.0, top, spec)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arctan_law_special_angles() {
        assert!((zero_hit_prob(1.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((zero_hit_prob(1.0, 3.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((zero_hit_prob(3.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(zero_hit_prob(0.0, 1.0).is_err());
    }

    #[test]
    fn two_interval_constant() {
        assert!((two_interval_bound(1.0, 1.0, 1.0).unwrap() - 0.405_284_734_569_351).abs() < 1e-14);
        let b = two_interval_bound(0.3, 0.01, 0.2).unwrap();
        assert!((b - 2.0 * two_interval_bound(1.2, 0.01, 0.2).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn max_cdf_edges() {
        assert_eq!(max_cdf(0.0, 1.0), 0.0);
        assert_eq!(max_cdf(-1.0, 1.0), 0.0);
        assert!((max_cdf(50.0, 1.0) - 1.0).abs() < 1e-15);
        let v = max_cdf(1.0, 1.0);
        assert!((v - 0.682_689_492_137_085_9).abs() < 1e-12, "{v:e}");
    }
}
