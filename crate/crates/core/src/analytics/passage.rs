//! Probability that the order-zero Bessel process started at `R` reaches `eps` by time 1.

use std::f64::consts::PI;

use super::bessel::l_damped;
use super::quad::{integrate, QuadratureSpec};
use crate::error::{invalid, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Pieces of the first-passage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstPassage {
    pub value: f64,
    /// Crossing probability of the level `R - eps` for linear motion.
    pub crossing: f64,
    /// The subtracted double integral.
    pub correction: f64,
    /// Largest bound on the dropped large-`x` tail over all outer nodes.
    pub tail_bound: f64,
}

/// `Pr(τ <= 1)`: the level-crossing term minus the Bessel correction.
pub fn bessel_first_passage(radius: f64, eps: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(first_passage_parts(radius, eps, spec)?.value)
}

/// Both terms separately, with the truncation bound.
///
/// The inner integral runs over `x = e^{-u}`. Below `x = e^{-U}` with
/// `U = ln(R/eps) + 60` the integrand is replaced by its small-argument form,
/// whose integral is closed. Above, the damping `e^{-x(R-eps)/(eps√s)}`
/// beats the growth `e^{(R/eps - 3)x}` of `L` by a rate `ρ >= 2`, and the
/// integral is cut at `x = T/ρ` (`T` = truncation radius), pushed out until
/// the integrand is below `abs_tol/10`. For large `x`,
/// `L(x) e^{-kx} / x <= e^{-ρx} / (π sqrt(R/eps) x)`, so the dropped tail is
/// at most `e^{-ρ X} / (π sqrt(R/eps) X ρ)` at cut `X`.
pub fn first_passage_parts(radius: f64, eps: f64, spec: &QuadratureSpec) -> Result<FirstPassage> {
    spec.validate()?;
    if !(eps > 0.0 && eps < radius && radius.is_finite()) {
        return Err(invalid(format!("need 0 < eps < R, got eps={eps}, R={radius}")));
    }
    let a = radius - eps;
    let r = radius / eps;
    let weight = |s: f64| {
        if s <= 0.0 {
            0.0
        } else {
            a / (2.0 * PI * s * s * s).sqrt() * (-a * a / (2.0 * s)).exp()
        }
    };
    let crossing = integrate(weight, 0.0, 1.0, spec)?.value;

    let u_low = r.ln() + 60.0;
    let c = 2f64.ln() - EULER_GAMMA;
    let small_tail = r.ln() / PI * (PI / 2.0 - ((u_low + c) / PI).atan());

    let inner_spec = spec.tightened(0.1);
    let mut tail_bound = 0.0f64;
    let mut failure = None;
    let outer = integrate(
        |s| {
            let w = weight(s);
            if w == 0.0 || failure.is_some() {
                return 0.0;
            }
            match inner(r, (r - 1.0) / s.sqrt(), u_low, &inner_spec) {
                Ok((v, tb)) => {
                    tail_bound = tail_bound.max(tb);
                    w * (v + small_tail)
                }
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let correction = outer?.value;
    Ok(FirstPassage {
        value: crossing - correction,
        crossing,
        correction,
        tail_bound,
    })
}

/// `∫_{e^{-U}}^{X} L(x) e^{-kx} / x dx` and the bound on what lies past `X`.
fn inner(r: f64, k: f64, u_low: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
    let rho = k - r + 3.0;
    let g = |x: f64| l_damped(x, r, k, spec);
    let mut top = spec.truncation_radius / rho;
    while g(top)? / top > spec.abs_tol / 10.0 {
        top *= 2.0;
    }
    let bound = (-rho * top).exp() / (PI * r.sqrt() * top * rho);
    let mut failure = None;
    let q = integrate(
        |u| {
            if failure.is_some() {
                return 0.0;
            }
            match g((-u).exp()) {
                Ok(v) => v,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        },
        -top.ln(),
        u_low,
        spec,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((q?.value, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn far_start_gives_negligible_probability() {
        let p = bessel_first_passage(10.0, 0.01, &QuadratureSpec::default()).unwrap();
        assert!(p.abs() < 1e-12, "{p}");
    }

    #[test]
    fn rejects_bad_radii() {
        let s = QuadratureSpec::default();
        assert!(bessel_first_passage(1.0, 1.0, &s).is_err());
        assert!(bessel_first_passage(1.0, 0.0, &s).is_err());
    }
}
