//! Counter-based normal draws.
//!
//! Every coefficient is one Philox4x64-10 output word pushed through the
//! inverse normal CDF, so any coefficient can be regenerated in isolation.
//!
//! Mapping, fixed for reproducibility:
//! - key = `[seed, 0]`
//! - coefficient counter `c` lives in block `c >> 2`, lane `c & 3`
//! - block counter = `[c >> 2, stream_id, 0, 0]`
//! - word `x` becomes `u = ((x >> 12) + 0.5) * 2^-52`, strictly inside (0, 1)
//! - normal draw = `-sqrt(2) * erfc_inv(2u)`

use statrs::function::erf::erfc_inv;

const M0: u64 = 0xD2E7_470E_E14C_6C93;
const M1: u64 = 0xCA5A_8263_9512_1157;
const W0: u64 = 0x9E37_79B9_7F4A_7C15;
const W1: u64 = 0xBB67_AE85_84CA_A73B;

#[inline]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = (a as u128) * (b as u128);
    ((p >> 64) as u64, p as u64)
}

/// The Philox4x64 bijection with 10 rounds.
#[inline]
pub fn philox4x64(ctr: [u64; 4], key: [u64; 2]) -> [u64; 4] {
    let mut c = ctr;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(W0);
            k[1] = k[1].wrapping_add(W1);
        }
        let (hi0, lo0) = mulhilo(M0, c[0]);
        let (hi1, lo1) = mulhilo(M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Maps a 64-bit word to the open unit interval using its top 52 bits.
#[inline]
pub fn unit_open(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Standard normal quantile. `u` must lie in (0, 1).
#[inline]
pub fn normal_quantile(u: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * u)
}

/// Independent standard normal draws addressed by `(seed, stream_id, counter)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl NormalStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    #[inline]
    fn block(&self, block: u64) -> [u64; 4] {
        philox4x64([block, self.stream_id, 0, 0], [self.seed, 0])
    }

    /// The draw at `counter`.
    #[inline]
    pub fn normal(&self, counter: u64) -> f64 {
        let w = self.block(counter >> 2)[(counter & 3) as usize];
        normal_quantile(unit_open(w))
    }

    /// Fills `out` with the draws at `start, start + 1, ...`.
    pub fn fill(&self, start: u64, out: &mut [f64]) {
        let mut c = start;
        let mut i = 0;
        while i < out.len() {
            let words = self.block(c >> 2);
            let mut lane = (c & 3) as usize;
            while lane < 4 && i < out.len() {
                out[i] = normal_quantile(unit_open(words[lane]));
                lane += 1;
                i += 1;
                c += 1;
            }
        }
    }
}

/// Counter of tent coefficient `(level, j)`; the slope coefficient uses 0.
#[inline]
pub fn coefficient_counter(level: u32, j: u64) -> u64 {
    (1u64 << level) + j
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference words from numpy's Philox (4x64, 10 rounds).
    #[test]
    fn philox_known_answers() {
        let cases: [([u64; 4], [u64; 2], [u64; 4]); 4] = [
            (
                [0, 0, 0, 0],
                [7, 0],
                [0xe6982ec3b25eef92, 0xc707d44a20eea5fa, 0xf6eaaabfc203e3fb, 0x19ef929394632d51],
            ),
            (
                [1, 0, 0, 0],
                [7, 0],
                [0xdf4034b829e9fba4, 0x4b9d10cdf8e64087, 0x6b8b857e506aac98, 0x67c7c945b1ba6e52],
            ),
            (
                [41, 3, 0, 0],
                [0xdeadbeef12345678, 0],
                [0xc50b7a147c89cc6f, 0x9007b4cb7a84b7d7, 0x843e18067acdf37a, 0x4c989121d402cb72],
            ),
            (
                [(1 << 33) + 5, (7 << 32) | 2, 0, 0],
                [2024, 0],
                [0xb2e195f511fc6b9d, 0x6f57ee1dddf268c7, 0x854b2c94f7b7b3cc, 0x09e36cfab2cd2ad3],
            ),
        ];
        for (ctr, key, want) in cases {
            assert_eq!(philox4x64(ctr, key), want, "ctr {ctr:?} key {key:?}");
        }
    }

    // Quantiles computed with 40-digit arithmetic.
    #[test]
    fn quantile_matches_high_precision_values() {
        let table = [
            (1e-20, -9.262340089798407573717386),
            (1e-10, -6.361340902404056204695376),
            (0.001, -3.0902323061678135415404),
            (0.02425, -1.972961051311884850269799),
            (0.1, -1.281551565544600466965103),
            (0.3, -0.5244005127080407840382893),
            (0.5, 0.0),
            (0.7, 0.5244005127080407840382893),
            (0.975, 1.959963984540054235524594),
            (0.999999, 4.753424308822898948193988),
        ];
        for (u, z) in table {
            let got = normal_quantile(u);
            assert!((got - z).abs() <= 1e-9, "u={u}: {got} vs {z}");
        }
    }

    #[test]
    fn unit_map_stays_open() {
        assert!(unit_open(0) > 0.0);
        assert!(unit_open(u64::MAX) < 1.0);
        assert!(normal_quantile(unit_open(0)).is_finite());
        assert!(normal_quantile(unit_open(u64::MAX)).is_finite());
    }

    #[test]
    fn fill_matches_single_draws() {
        let s = NormalStream::new(99, 5);
        let mut buf = vec![0.0; 23];
        s.fill(6, &mut buf);
        for (i, v) in buf.iter().enumerate() {
            assert_eq!(v.to_bits(), s.normal(6 + i as u64).to_bits());
        }
    }

    #[test]
    fn counters_are_unique_per_coefficient() {
        assert_eq!(coefficient_counter(0, 0), 1);
        assert_eq!(coefficient_counter(1, 0), 2);
        assert_eq!(coefficient_counter(1, 1), 3);
        assert_eq!(coefficient_counter(3, 5), 13);
    }
}
