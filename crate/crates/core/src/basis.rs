//! Tent functions of the series construction.
//!
//! Tent `(level, j)` is supported on `[j 2^-level, (j + 1) 2^-level]` and peaks
//! at `2^(-level/2 - 1)` in the middle. Level 0 is the single tent through
//! `(1/2, 1/2)`; level `i` holds `2^i` tents.

/// Linear ramp through (0, 0) and (1, 1).
pub fn slope(t: f64) -> f64 {
    t
}

/// `2^-k`, exact, for `k < 1022`.
#[inline]
pub fn pow2_neg(k: u32) -> f64 {
    debug_assert!(k < 1022);
    f64::from_bits((1023 - k as u64) << 52)
}

/// Peak height of a level's tents.
#[inline]
pub fn peak(level: u32) -> f64 {
    let p = pow2_neg(level / 2 + 1);
    if level % 2 == 0 {
        p
    } else {
        p * std::f64::consts::FRAC_1_SQRT_2
    }
}

/// Tent `(level, j)` at `t`.
pub fn tent(level: u32, j: u64, t: f64) -> f64 {
    let x = t / pow2_neg(level) - j as f64;
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    peak(level) * (1.0 - (2.0 * x - 1.0).abs())
}

/// Number of tents at `level`.
pub fn width(level: u32) -> u64 {
    1u64 << level
}
