//! Paths on [0, inf) glued from independent unit segments.
//!
//! `B(t) = B_k(t - k) + sum_{i<k} B_i(1)` with `k = floor(t)`.

use std::sync::Mutex;

use crate::error::{invalid, Error, Result};
use crate::path::{dyadic_depth, Enclosure, PathCoefficients, PathConfig};

/// What the family uses past its explicit segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Continuation {
    /// Segment `k` is the sampled stream `(family << 32) | k`.
    Sampled { seed: u64, family: u32 },
    /// Constant at the last explicit endpoint.
    Frozen,
}

#[derive(Debug)]
pub struct PathFamily {
    prefix: Vec<PathCoefficients>,
    continuation: Continuation,
    config: PathConfig,
    // offsets[k] = B(k)
    offsets: Mutex<Vec<f64>>,
}

/// Stream id of segment `k` in sampled family `family`.
pub fn segment_stream(family: u32, k: u64) -> u64 {
    ((family as u64) << 32) | (k & 0xFFFF_FFFF)
}

impl PathFamily {
    pub fn sampled(seed: u64, family: u32) -> Self {
        Self::sampled_with(seed, family, PathConfig::default())
    }

    pub fn sampled_with(seed: u64, family: u32, config: PathConfig) -> Self {
        Self {
            prefix: Vec::new(),
            continuation: Continuation::Sampled { seed, family },
            config,
            offsets: Mutex::new(vec![0.0]),
        }
    }

    pub fn from_paths(paths: Vec<PathCoefficients>, continuation: Continuation) -> Self {
        let config = paths.first().map(|p| p.config).unwrap_or_default();
        Self {
            prefix: paths,
            continuation,
            config,
            offsets: Mutex::new(vec![0.0]),
        }
    }

    /// One path on [0, 1], constant afterwards.
    pub fn single(path: PathCoefficients) -> Self {
        Self::from_paths(vec![path], Continuation::Frozen)
    }

    pub fn config(&self) -> PathConfig {
        self.config
    }

    pub fn continuation(&self) -> Continuation {
        self.continuation
    }

    /// Segment `k` as a unit path, or `None` for a frozen tail.
    pub fn segment(&self, k: u64) -> Option<PathCoefficients> {
        if let Some(p) = self.prefix.get(k as usize) {
            return Some(p.clone());
        }
        match self.continuation {
            Continuation::Sampled { seed, family } => Some(PathCoefficients::sampled(
                seed,
                segment_stream(family, k),
                -1,
                self.config,
            )),
            Continuation::Frozen => None,
        }
    }

    pub(crate) fn unit(&self, k: u64) -> Unit<'_> {
        if let Some(p) = self.prefix.get(k as usize) {
            return Unit::Table(p);
        }
        match self.continuation {
            Continuation::Sampled { seed, family } => Unit::Stream(PathCoefficients::sampled(
                seed,
                segment_stream(family, k),
                -1,
                self.config,
            )),
            Continuation::Frozen => Unit::Flat,
        }
    }

    /// `B(k)` for integer `k`.
    pub fn offset(&self, k: u64) -> f64 {
        let mut offs = self.offsets.lock().expect("offset cache poisoned");
        while offs.len() as u64 <= k {
            let i = offs.len() as u64 - 1;
            let next = offs[i as usize] + self.unit(i).xi0();
            offs.push(next);
        }
        offs[k as usize]
    }

    /// Enclosure of `B(u)` for `u >= 0` from coefficients through `level`.
    pub fn eval(&self, u: f64, level: u32) -> Result<Enclosure> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(invalid(format!("time {u} must be finite and non-negative")));
        }
        if level > self.config.level_cap {
            return Err(Error::CapExceeded {
                requested: level,
                cap: self.config.level_cap,
            });
        }
        let k = u.floor();
        let x = u - k;
        let k = k as u64;
        let base = self.offset(k);
        let e = match self.unit(k) {
            Unit::Table(p) => p.eval(x, level)?,
            Unit::Stream(p) => p.eval(x, level)?,
            Unit::Flat => Enclosure::exact(0.0, level),
        };
        Ok(Enclosure::new(base + e.lo, base + e.hi, level, e.confidence))
    }

    /// Enclosure at the cap, exact whenever `u` is a knot the cap resolves.
    pub fn point(&self, u: f64) -> Result<Enclosure> {
        let cap = self.config.level_cap;
        if dyadic_depth(u).is_some_and(|m| m >= 1 && m <= cap + 1) {
            return self.eval(u, dyadic_depth(u).unwrap() - 1);
        }
        self.eval(u, cap)
    }
}

/// Borrowed or generated unit segment.
pub(crate) enum Unit<'a> {
    Table(&'a PathCoefficients),
    Stream(PathCoefficients),
    Flat,
}

impl Unit<'_> {
    /// True for sampled units whose pads follow `config`.
    #[inline]
    pub fn is_sampled_with(&self, config: &PathConfig) -> bool {
        match self {
            Unit::Table(p) => p.kind == crate::path::Kind::Sampled && p.config == *config,
            Unit::Stream(_) => true,
            Unit::Flat => false,
        }
    }

    #[inline]
    pub fn xi0(&self) -> f64 {
        match self {
            Unit::Table(p) => p.xi0(),
            Unit::Stream(p) => p.xi0(),
            Unit::Flat => 0.0,
        }
    }

    #[inline]
    pub fn coeff(&self, level: u32, j: u64) -> f64 {
        match self {
            Unit::Table(p) => p.coeff(level, j),
            Unit::Stream(p) => p.coeff(level, j),
            Unit::Flat => 0.0,
        }
    }

    #[inline]
    pub fn pad(&self, depth: u32) -> (f64, f64) {
        match self {
            Unit::Table(p) => p.pad(depth),
            Unit::Stream(p) => p.pad(depth),
            Unit::Flat => (0.0, 0.0),
        }
    }
}

/// `B(t)` on [0, inf) for a family of unit paths.
pub fn eval_extended(family: &PathFamily, t: f64, target_level: u32) -> Result<Enclosure> {
    family.eval(t, target_level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_zero() {
        let f = PathFamily::sampled(1, 0);
        let e = f.eval(0.0, 3).unwrap();
        assert_eq!((e.lo, e.hi), (0.0, 0.0));
    }

    #[test]
    fn integer_times_of_zero_paths() {
        let f = PathFamily::from_paths(vec![PathCoefficients::zero(); 3], Continuation::Frozen);
        for k in 0..5 {
            assert_eq!(f.eval(k as f64, 2).unwrap().center(), 0.0);
        }
    }

    #[test]
    fn identity_then_zero() {
        let f = PathFamily::from_paths(
            vec![PathCoefficients::identity(), PathCoefficients::zero()],
            Continuation::Frozen,
        );
        assert_eq!(f.eval(1.5, 4).unwrap().center(), 1.0);
    }

    #[test]
    fn segments_are_glued_continuously() {
        let f = PathFamily::sampled(77, 3);
        for k in 1..6u64 {
            let left = f.segment(k - 1).unwrap().partial_sum(1.0, 3) + f.offset(k - 1);
            assert_eq!(left, f.offset(k));
            assert_eq!(f.eval(k as f64, 0).unwrap().center(), f.offset(k));
        }
    }

    #[test]
    fn segment_streams_are_distinct() {
        assert_ne!(segment_stream(0, 1), segment_stream(1, 0));
        assert_eq!(segment_stream(2, 3), (2u64 << 32) | 3);
    }
}
