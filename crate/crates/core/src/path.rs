//! One unit-interval path sample and its coefficient table.

use serde::{Deserialize, Serialize};

use crate::basis;
use crate::error::{invalid, Error, Result};
use crate::rng::{coefficient_counter, NormalStream};

/// Modulus constant and the hard refinement cap shared by all evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub c_mod: f64,
    pub level_cap: u32,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            c_mod: 2.0,
            level_cap: 40,
        }
    }
}

impl PathConfig {
    /// Sampled pad and its failure probability for depths `0..=level_cap + 2`.
    pub fn pad_table(&self) -> Vec<(f64, f64)> {
        (0..=self.level_cap + 2)
            .map(|d| {
                let h = basis::pow2_neg(d);
                let pad = self.c_mod * modulus(h);
                (pad, bridge_tail(pad, h))
            })
            .collect()
    }
}

/// `sqrt(h ln(1/h))`, held at its maximum for `h >= 1/e` so it never decreases in `h`.
pub fn modulus(h: f64) -> f64 {
    let h = h.min(std::f64::consts::E.recip());
    (h * (1.0 / h).ln()).sqrt()
}

/// Smallest `h` with `scale * modulus(h) >= target`, or `1/e` if the target is out of reach.
pub fn step_for_modulus(target: f64, scale: f64) -> f64 {
    let top = std::f64::consts::E.recip();
    if scale * modulus(top) <= target {
        return top;
    }
    let (mut lo, mut hi) = (0.0f64, top);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if scale * modulus(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= hi * 1e-12 {
            break;
        }
    }
    lo
}

/// Failure probability of a pad on a bridge of duration `h` (two-sided sup tail).
pub fn bridge_tail(pad: f64, h: f64) -> f64 {
    if pad <= 0.0 {
        return 1.0;
    }
    (2.0 * (-2.0 * pad * pad / h).exp()).min(1.0)
}

/// Half-width used for a point evaluated with coefficients through `level`:
/// the modulus bound at the mesh `2^-(level+1)` those coefficients resolve.
pub fn tail_bound(c_mod: f64, level: u32) -> f64 {
    c_mod * modulus((-(level as f64) - 1.0).exp2())
}

/// A certified interval for a path-derived value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
    pub level: u32,
    pub confidence: f64,
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64, level: u32, confidence: f64) -> Self {
        debug_assert!(lo <= hi, "{lo} > {hi}");
        Self {
            lo,
            hi,
            level,
            confidence: confidence.clamp(f64::MIN_POSITIVE, 1.0),
        }
    }

    pub fn exact(v: f64, level: u32) -> Self {
        Self::new(v, v, level, 1.0)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_exact_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0 && self.confidence == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    /// Coefficients come from the counter-based stream at every level.
    Sampled,
    /// Coefficients are given explicitly; every deeper level is zero.
    Explicit,
}

/// Coefficient table of one path on [0, 1].
///
/// Level `i >= 0` holds `2^i` tent coefficients; the slope coefficient is kept
/// separately. Sampled paths regenerate any level past the materialized ones
/// on demand, so reads never depend on how far the table was refined.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCoefficients {
    pub seed: u64,
    pub stream_id: u64,
    pub kind: Kind,
    pub config: PathConfig,
    xi0: f64,
    levels: Vec<Vec<f64>>,
    // explicit only: det_pad[d] bounds every tent of level >= d
    det_pad: Vec<f64>,
}

/// Wire form: `levels[0] = [slope]`, `levels[i + 1]` = tent level `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDump {
    pub seed: u64,
    pub stream_id: u64,
    pub max_level: i64,
    pub levels: Vec<Vec<f64>>,
}

/// Draws a path and materializes tent levels `0..=level`.
pub fn sample_path(seed: u64, stream_id: u64, level: u32) -> PathCoefficients {
    PathCoefficients::sampled(seed, stream_id, level as i64, PathConfig::default())
}

impl PathCoefficients {
    /// A sampled path with levels through `max_level` materialized (`-1` keeps only the slope).
    pub fn sampled(seed: u64, stream_id: u64, max_level: i64, config: PathConfig) -> Self {
        let stream = NormalStream::new(seed, stream_id);
        let mut p = Self {
            seed,
            stream_id,
            kind: Kind::Sampled,
            config,
            xi0: stream.normal(0),
            levels: Vec::new(),
            det_pad: Vec::new(),
        };
        if max_level >= 0 {
            p.refine(max_level as u32);
        }
        p
    }

    /// A truncated path from explicit coefficients; level `i` must have `2^i` entries.
    pub fn explicit(xi0: f64, levels: Vec<Vec<f64>>) -> Result<Self> {
        for (i, l) in levels.iter().enumerate() {
            if l.len() as u64 != basis::width(i as u32) {
                return Err(invalid(format!(
                    "level {i} has {} coefficients, expected {}",
                    l.len(),
                    basis::width(i as u32)
                )));
            }
            if l.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("level {i} has a non-finite coefficient")));
            }
        }
        if !xi0.is_finite() {
            return Err(invalid("non-finite slope coefficient"));
        }
        let mut det_pad = vec![0.0; levels.len() + 1];
        for i in (0..levels.len()).rev() {
            let m = levels[i].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            det_pad[i] = det_pad[i + 1] + m * basis::peak(i as u32);
        }
        Ok(Self {
            seed: 0,
            stream_id: 0,
            kind: Kind::Explicit,
            config: PathConfig::default(),
            xi0,
            levels,
            det_pad,
        })
    }

    /// Slope and first tent only.
    pub fn two_coefficient(xi0: f64, xi1: f64) -> Self {
        Self::explicit(xi0, vec![vec![xi1]]).expect("finite input")
    }

    /// `B(t) = t`.
    pub fn identity() -> Self {
        Self::explicit(1.0, Vec::new()).expect("finite input")
    }

    /// `B(t) = 0`.
    pub fn zero() -> Self {
        Self::explicit(0.0, Vec::new()).expect("finite input")
    }

    /// A sampled path cut to its levels through `level` and frozen there.
    pub fn truncated(&self, level: u32) -> Self {
        let levels = (0..=level).map(|i| self.level(i)).collect();
        let mut p = Self::explicit(self.xi0, levels).expect("finite coefficients");
        p.seed = self.seed;
        p.stream_id = self.stream_id;
        p.config = self.config;
        p
    }

    pub fn with_config(mut self, config: PathConfig) -> Self {
        self.config = config;
        self
    }

    /// Deepest materialized level; `-1` when only the slope is stored.
    pub fn max_level(&self) -> i64 {
        self.levels.len() as i64 - 1
    }

    pub fn xi0(&self) -> f64 {
        self.xi0
    }

    fn stream(&self) -> NormalStream {
        NormalStream::new(self.seed, self.stream_id)
    }

    /// Coefficient `(level, j)`, generated on demand past the table for sampled paths.
    #[inline]
    pub fn coeff(&self, level: u32, j: u64) -> f64 {
        match self.levels.get(level as usize) {
            Some(l) => l[j as usize],
            None => match self.kind {
                Kind::Sampled => self.stream().normal(coefficient_counter(level, j)),
                Kind::Explicit => 0.0,
            },
        }
    }

    /// Whole level as a vector.
    pub fn level(&self, level: u32) -> Vec<f64> {
        if let Some(l) = self.levels.get(level as usize) {
            return l.clone();
        }
        let mut out = vec![0.0; basis::width(level) as usize];
        if self.kind == Kind::Sampled {
            self.stream().fill(coefficient_counter(level, 0), &mut out);
        }
        out
    }

    /// Materializes levels through `level`; never shrinks the table.
    pub fn refine(&mut self, level: u32) {
        while self.levels.len() <= level as usize {
            let next = self.level(self.levels.len() as u32);
            self.levels.push(next);
        }
        if self.kind == Kind::Explicit {
            self.det_pad.resize(self.levels.len() + 1, 0.0);
        }
    }

    /// Bound on the sum of all tents of level `>= depth` and its failure probability.
    #[inline]
    pub fn pad(&self, depth: u32) -> (f64, f64) {
        match self.kind {
            Kind::Explicit => {
                let d = (depth as usize).min(self.det_pad.len() - 1);
                (self.det_pad[d], 0.0)
            }
            Kind::Sampled => {
                let h = basis::pow2_neg(depth);
                let pad = self.config.c_mod * modulus(h);
                (pad, bridge_tail(pad, h))
            }
        }
    }

    /// Depth past which the table adds nothing, for explicit paths.
    pub fn exact_depth(&self) -> Option<u32> {
        match self.kind {
            Kind::Explicit => Some(self.levels.len() as u32),
            Kind::Sampled => None,
        }
    }

    /// Knot values of the partial sum through `level`: `2^(level+1) + 1` values on a uniform mesh.
    pub fn knots(&self, level: i64) -> Vec<f64> {
        let mut vals = vec![0.0, self.xi0];
        for i in 0..=level.max(-1) {
            if i < 0 {
                break;
            }
            let i = i as u32;
            let coeffs = self.level(i);
            let pk = basis::peak(i);
            let mut next = Vec::with_capacity(2 * vals.len() - 1);
            for j in 0..vals.len() - 1 {
                next.push(vals[j]);
                next.push(0.5 * (vals[j] + vals[j + 1]) + coeffs[j] * pk);
            }
            next.push(*vals.last().unwrap());
            vals = next;
        }
        vals
    }

    /// Partial sum through `level` at `t`, by midpoint descent.
    pub fn partial_sum(&self, t: f64, level: u32) -> f64 {
        descend(self, t, level + 1)
    }

    /// Enclosure of `B(t)` from coefficients through `target_level`.
    pub fn eval(&self, t: f64, target_level: u32) -> Result<Enclosure> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid(format!("t = {t} outside [0, 1]")));
        }
        if target_level > self.config.level_cap {
            return Err(Error::CapExceeded {
                requested: target_level,
                cap: self.config.level_cap,
            });
        }
        let c = self.partial_sum(t, target_level);
        let depth = target_level + 1;
        if dyadic_depth(t).is_some_and(|m| m <= depth) {
            return Ok(Enclosure::exact(c, target_level));
        }
        let (pad, fail) = self.pad(depth);
        Ok(Enclosure::new(c - pad, c + pad, target_level, 1.0 - fail))
    }

    pub fn dump(&self) -> PathDump {
        let mut levels = vec![vec![self.xi0]];
        levels.extend(self.levels.iter().cloned());
        PathDump {
            seed: self.seed,
            stream_id: self.stream_id,
            max_level: self.max_level(),
            levels,
        }
    }

    /// Restores a dump as a truncated path: levels past `max_level` read as zero.
    pub fn from_dump(d: &PathDump) -> Result<Self> {
        let Some((first, rest)) = d.levels.split_first() else {
            return Err(invalid("dump has no slope level"));
        };
        if first.len() != 1 {
            return Err(invalid("slope level must hold one value"));
        }
        if rest.len() as i64 - 1 != d.max_level {
            return Err(invalid("max_level disagrees with the level count"));
        }
        let mut p = Self::explicit(first[0], rest.to_vec())?;
        p.seed = d.seed;
        p.stream_id = d.stream_id;
        Ok(p)
    }
}

/// Number of binary digits after the point, if `t` is a dyadic rational within 64 digits.
pub fn dyadic_depth(t: f64) -> Option<u32> {
    if !t.is_finite() {
        return None;
    }
    let frac = t - t.floor();
    if frac == 0.0 {
        return Some(0);
    }
    let mut x = frac;
    for m in 1..=64u32 {
        x *= 2.0;
        x -= x.floor();
        if x == 0.0 {
            return Some(m);
        }
    }
    None
}

/// Midpoint descent to `depth`, then linear interpolation inside the final cell.
fn descend(p: &PathCoefficients, t: f64, depth: u32) -> f64 {
    let depth = match p.exact_depth() {
        Some(d) => depth.min(d),
        None => depth,
    };
    let (mut l, mut r) = (0.0, p.xi0);
    let mut idx: u64 = 0;
    let mut x = t;
    for d in 0..depth {
        let mid = 0.5 * (l + r) + p.coeff(d, idx) * basis::peak(d);
        x *= 2.0;
        if x < 1.0 {
            r = mid;
            idx *= 2;
        } else {
            l = mid;
            x -= 1.0;
            idx = 2 * idx + 1;
        }
        if x == 0.0 {
            return l;
        }
    }
    if x == 0.0 {
        l
    } else if x >= 1.0 {
        r
    } else {
        l + (r - l) * x
    }
}
