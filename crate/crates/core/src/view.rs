//! Affine views `V(t) = sigma * B(alpha * t + beta) + delta` of a path family.
//!
//! `delta` is an interval: shifting by a time whose value is only known to an
//! enclosure carries that uncertainty into every later evaluation.

use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::family::PathFamily;
use crate::path::{Enclosure, PathCoefficients};

#[derive(Debug, Clone)]
pub struct PathView {
    family: Arc<PathFamily>,
    pub(crate) sigma: f64,
    pub(crate) alpha: f64,
    pub(crate) beta: f64,
    pub(crate) delta_lo: f64,
    pub(crate) delta_hi: f64,
    pub(crate) delta_conf: f64,
}

impl PathView {
    pub fn new(family: Arc<PathFamily>) -> Self {
        Self {
            family,
            sigma: 1.0,
            alpha: 1.0,
            beta: 0.0,
            delta_lo: 0.0,
            delta_hi: 0.0,
            delta_conf: 1.0,
        }
    }

    pub fn of_family(family: PathFamily) -> Self {
        Self::new(Arc::new(family))
    }

    /// View of one unit path, constant after time 1.
    pub fn of_path(path: PathCoefficients) -> Self {
        Self::of_family(PathFamily::single(path))
    }

    pub fn family(&self) -> &PathFamily {
        &self.family
    }

    pub fn family_arc(&self) -> &Arc<PathFamily> {
        &self.family
    }

    /// Underlying time of view time `t`.
    #[inline]
    pub fn time(&self, t: f64) -> f64 {
        self.alpha * t + self.beta
    }

    /// View time of underlying time `u`.
    #[inline]
    pub fn view_time(&self, u: f64) -> f64 {
        (u - self.beta) / self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> (f64, f64) {
        (self.delta_lo, self.delta_hi)
    }

    /// Same time map as `other`, so joint searches can share time nodes.
    pub fn same_clock(&self, other: &PathView) -> bool {
        self.alpha == other.alpha && self.beta == other.beta
    }

    /// `(1/a) V(a^2 t)`.
    pub fn scale(&self, a: f64) -> Result<PathView> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(invalid(format!("scale factor {a} must be positive")));
        }
        let mut v = self.clone();
        v.sigma /= a;
        v.alpha *= a * a;
        v.delta_lo /= a;
        v.delta_hi /= a;
        Ok(v)
    }

    /// `V(tau + t) - V(tau)`.
    pub fn shift_at(&self, tau: f64) -> Result<PathView> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(invalid(format!("shift {tau} must be finite and non-negative")));
        }
        let b = self.time(tau);
        let e = self.family.point(b)?;
        let mut v = self.clone();
        v.beta = b;
        let (x, y) = (-self.sigma * e.lo, -self.sigma * e.hi);
        v.delta_lo = x.min(y);
        v.delta_hi = x.max(y);
        v.delta_conf = e.confidence;
        Ok(v)
    }

    /// `-V(t)`.
    pub fn negate(&self) -> PathView {
        let mut v = self.clone();
        v.sigma = -v.sigma;
        let (lo, hi) = (-v.delta_hi, -v.delta_lo);
        v.delta_lo = lo;
        v.delta_hi = hi;
        v
    }

    /// `V(t) + c`.
    pub fn offset(&self, c: f64) -> PathView {
        let mut v = self.clone();
        v.delta_lo += c;
        v.delta_hi += c;
        v
    }

    /// Maps an enclosure of `B` at some time to one of `V`.
    pub(crate) fn lift(&self, e: Enclosure) -> Enclosure {
        let (x, y) = (self.sigma * e.lo, self.sigma * e.hi);
        Enclosure::new(
            x.min(y) + self.delta_lo,
            x.max(y) + self.delta_hi,
            e.level,
            e.confidence - (1.0 - self.delta_conf),
        )
    }

    /// Enclosure of `V(t)` from coefficients through `level`.
    pub fn eval(&self, t: f64, level: u32) -> Result<Enclosure> {
        if !(t >= 0.0) {
            return Err(invalid(format!("view time {t} must be non-negative")));
        }
        Ok(self.lift(self.family.eval(self.time(t), level)?))
    }

    /// Enclosure of `V(t)` at the refinement cap.
    pub fn point(&self, t: f64) -> Result<Enclosure> {
        if !(t >= 0.0) {
            return Err(invalid(format!("view time {t} must be non-negative")));
        }
        Ok(self.lift(self.family.point(self.time(t))?))
    }
}
