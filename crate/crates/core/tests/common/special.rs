//! Series and quadrature forms of special functions, coded independently of the library.

#![allow(dead_code)]

pub const GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn i0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0, 1.0);
    for k in 1..300 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-18 {
            break;
        }
    }
    sum
}

pub fn k0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut harm, mut sum) = (1.0, 0.0, 0.0);
    for k in 1..300 {
        term *= q / (k * k) as f64;
        harm += 1.0 / k as f64;
        sum += term * harm;
    }
    -((x / 2.0).ln() + GAMMA) * i0_series(x) + sum
}

// K0(x) = ∫_0^∞ e^{-x cosh t} dt by composite Simpson on a fine grid.
pub fn k0_cosh(x: f64) -> f64 {
    let top = (1.0 + 60.0 / x).acosh() + 1.0;
    let n = 200_000;
    let h = top / n as f64;
    let f = |t: f64| (-x * t.cosh()).exp();
    let mut s = f(0.0) + f(top);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

pub fn e1_series(z: f64) -> f64 {
    let (mut term, mut sum) = (1.0, 0.0);
    for k in 1..200 {
        term *= -z / k as f64;
        sum += term / k as f64;
    }
    -GAMMA - z.ln() - sum
}

/// `n` log-spaced points on `[0.1, 10]`.
pub fn log_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| 0.1 * 100f64.powf(i as f64 / (n - 1) as f64))
}

