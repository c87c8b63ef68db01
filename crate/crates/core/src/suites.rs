//! Statistical validation suites.
//!
//! Every suite draws its paths from `(seed, index)` streams, evaluates them in
//! parallel, and reduces the results in index order, so a report depends only
//! on its configuration. Pass rules: `|z| <= 3` for counts and means, KS
//! `p > 1e-3`, and an exact zero for violation counts.

use std::collections::BTreeMap;
use std::sync::Arc;

use libm::erfc;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{bessel_first_passage, max_cdf, spitzer_limit, zero_hit_prob, QuadratureSpec};
use crate::error::{invalid, Error, Result};
use crate::extrema::{has_zero, path_max, Verdict};
use crate::family::PathFamily;
use crate::path::{modulus, PathCoefficients, PathConfig};
use crate::planar::{first_hit_boundary, PlanarPath, SegmentSet};
use crate::stats::{binomial_z, ks_one_sample, KsResult, Welford};
use crate::view::PathView;

pub const SUITES: [&str; 7] = [
    "arctan",
    "max-cdf",
    "modulus",
    "increments-variance",
    "exit-symmetry",
    "spitzer",
    "scale",
];

pub const Z_LIMIT: f64 = 3.0;
pub const KS_P_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Paths (or walkers) per test.
    pub samples: u32,
    /// Refinement budget for zero decisions; mesh level `2^-level` for the modulus scan.
    pub level: u32,
    /// Modulus constant under test.
    pub c: f64,
    /// Tolerance for maxima and planar hits.
    pub eps: f64,
}

impl SuiteConfig {
    /// Defaults sized to finish in seconds.
    pub fn for_suite(name: &str) -> Result<Self> {
        let base = Self {
            seed: 42,
            samples: 20_000,
            level: 40,
            c: 2.0,
            eps: 1e-3,
        };
        Ok(match canonical(name)? {
            "modulus" => Self {
                samples: 200,
                level: 20,
                ..base
            },
            "exit-symmetry" => Self {
                samples: 4_000,
                ..base
            },
            "spitzer" => Self { samples: 0, ..base },
            _ => base,
        })
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.samples < 2 && name != "spitzer" {
            return Err(invalid("need at least two samples"));
        }
        if !(self.eps > 0.0) || !(self.c > 0.0) || !self.c.is_finite() {
            return Err(invalid("eps and c must be positive"));
        }
        if name == "modulus" && !(11..=24).contains(&self.level) {
            return Err(invalid("modulus scan level must lie in 11..=24"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    /// How `statistic` is compared with `threshold`.
    pub rule: String,
    pub passed: bool,
    pub samples: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub config: SuiteConfig,
    pub tests: Vec<TestOutcome>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn test(&self, name: &str) -> Option<&TestOutcome> {
        self.tests.iter().find(|t| t.name == name)
    }
}

fn canonical(name: &str) -> Result<&'static str> {
    let n = match name {
        "arctan-law" => "arctan",
        "max" => "max-cdf",
        "modulus-of-continuity" => "modulus",
        "increments" => "increments-variance",
        other => other,
    };
    SUITES
        .iter()
        .copied()
        .find(|s| *s == n)
        .ok_or_else(|| invalid(format!("unknown suite '{name}'; known: {}", SUITES.join(", "))))
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let suite = canonical(name)?;
    cfg.validate(suite)?;
    let tests = match suite {
        "arctan" => arctan(cfg)?,
        "max-cdf" => max_law(cfg)?,
        "modulus" => modulus_scan(cfg),
        "increments-variance" => increments(cfg)?,
        "exit-symmetry" => exit_symmetry(cfg)?,
        "spitzer" => spitzer(cfg)?,
        "scale" => scaling(cfg)?,
        _ => unreachable!("canonical names only"),
    };
    let passed = tests.iter().all(|t| t.passed);
    Ok(SuiteReport {
        suite: suite.to_string(),
        config: *cfg,
        tests,
        passed,
    })
}

fn view(seed: u64, i: u32) -> PathView {
    PathView::new(Arc::new(PathFamily::sampled(seed, i)))
}

fn z_test(name: String, z: f64, n: u64, cfg: &SuiteConfig) -> TestOutcome {
    TestOutcome {
        name,
        statistic: z,
        threshold: Z_LIMIT,
        rule: "|statistic| <= threshold".into(),
        passed: z.abs() <= Z_LIMIT,
        samples: n,
        seed: cfg.seed,
        extra: BTreeMap::new(),
    }
}

fn ks_test(name: String, ks: KsResult, cfg: &SuiteConfig) -> TestOutcome {
    let mut extra = BTreeMap::new();
    extra.insert("ks_statistic".into(), ks.statistic);
    TestOutcome {
        name,
        statistic: ks.p_value,
        threshold: KS_P_MIN,
        rule: "statistic > threshold".into(),
        passed: ks.p_value > KS_P_MIN,
        samples: ks.n as u64,
        seed: cfg.seed,
        extra,
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Window pairs `(a, eps)` for the zero-hitting law.
pub const ARCTAN_WINDOWS: [(f64, f64); 3] = [(0.25, 0.25), (0.5, 0.1), (0.1, 0.3)];

fn arctan(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    let mut out = Vec::new();
    for (a, e) in ARCTAN_WINDOWS {
        let verdicts = (0..cfg.samples)
            .into_par_iter()
            .map(|i| Ok(has_zero(&view(cfg.seed, i), a, a + e, cfg.level)?.verdict))
            .collect::<Result<Vec<_>>>()?;
        let hits = verdicts.iter().filter(|v| **v == Verdict::HasZero).count() as u64;
        let undecided = verdicts.iter().filter(|v| **v == Verdict::Undecided).count();
        let n = cfg.samples as u64;
        let p = zero_hit_prob(a, e)?;
        let mut t = z_test(format!("zero in [{a}, {}]", a + e), binomial_z(hits, n, p), n, cfg);
        t.extra.insert("fraction".into(), hits as f64 / n as f64);
        t.extra.insert("expected".into(), p);
        t.extra.insert("undecided".into(), undecided as f64);
        out.push(t);
    }
    Ok(out)
}

fn max_law(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    let maxima = (0..cfg.samples)
        .into_par_iter()
        .map(|i| Ok(path_max(&view(cfg.seed, i), 0.0, 1.0, cfg.eps)?.center()))
        .collect::<Result<Vec<_>>>()?;
    let ks = ks_one_sample(&maxima, |a| max_cdf(a, 1.0));
    Ok(vec![ks_test("max on [0, 1] vs erf(a/sqrt 2)".into(), ks, cfg)])
}

/// Counts dyadic increments `|B((k+1)2^-n) - B(k 2^-n)| > c sqrt(h ln 1/h)`
/// for `h = 2^-n`, `10 <= n <= level`. Knot values at the finest mesh are exact.
pub fn modulus_violations(path: &PathCoefficients, level: u32, c: f64) -> u64 {
    modulus_counts(path, level, &[c])[0]
}

/// [`modulus_violations`] for several constants over one set of knots.
pub fn modulus_counts(path: &PathCoefficients, level: u32, cs: &[f64]) -> Vec<u64> {
    let v = path.knots(level as i64 - 1);
    let mut counts = vec![0; cs.len()];
    for n in 10..=level {
        let step = 1usize << (level - n);
        let m = modulus((-(n as f64)).exp2());
        for (a, b) in v.iter().step_by(step).zip(v.iter().step_by(step).skip(1)) {
            let d = (b - a).abs();
            for (k, c) in cs.iter().enumerate() {
                if d > c * m {
                    counts[k] += 1;
                }
            }
        }
    }
    counts
}

fn modulus_scan(cfg: &SuiteConfig) -> Vec<TestOutcome> {
    let counts: Vec<u64> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let p = PathCoefficients::sampled(cfg.seed, i as u64, -1, PathConfig::default());
            modulus_violations(&p, cfg.level, cfg.c)
        })
        .collect();
    let total: u64 = counts.iter().sum();
    let with = counts.iter().filter(|&&c| c > 0).count() as u64;
    let n = cfg.samples as u64;
    let mut extra = BTreeMap::new();
    extra.insert("paths_with_violation".into(), with as f64);
    extra.insert("c".into(), cfg.c);
    vec![TestOutcome {
        name: format!("dyadic increments within {} sqrt(h ln 1/h), h <= 2^-10", cfg.c),
        statistic: total as f64,
        threshold: 0.0,
        rule: "statistic == threshold".into(),
        passed: total == 0,
        samples: n,
        seed: cfg.seed,
        extra,
    }]
}

fn variance_z(w: &Welford, sigma2: f64) -> f64 {
    (w.variance() / sigma2 - 1.0) / (2.0 / (w.n as f64 - 1.0)).sqrt()
}

fn increments(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    // spans inside the first unit, across a unit boundary, and past it
    const SPANS: [(f64, f64); 3] = [(0.25, 0.75), (0.75, 1.5), (2.0, 3.5)];
    let rows = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let v = view(cfg.seed, i);
            let mut d = [0.0; 3];
            for (k, (s, t)) in SPANS.iter().enumerate() {
                d[k] = v.point(*t)?.center() - v.point(*s)?.center();
            }
            Ok(d)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = cfg.samples as u64;
    let mut out = Vec::new();
    for (k, (s, t)) in SPANS.iter().enumerate() {
        let w: Welford = rows.iter().map(|d| d[k]).collect();
        let h = t - s;
        out.push(z_test(format!("variance of B({t}) - B({s})"), variance_z(&w, h), n, cfg));
        out.push(z_test(
            format!("mean of B({t}) - B({s})"),
            w.mean / (h / n as f64).sqrt(),
            n,
            cfg,
        ));
    }
    for (j, k) in [(0, 1), (1, 2)] {
        let hj = SPANS[j].1 - SPANS[j].0;
        let hk = SPANS[k].1 - SPANS[k].0;
        let prod: Welford = rows.iter().map(|d| d[j] * d[k] / (hj * hk).sqrt()).collect();
        // product of independent standard normals: mean 0, variance 1
        out.push(z_test(
            format!("correlation of spans {j} and {k}"),
            prod.mean * (n as f64).sqrt(),
            n,
            cfg,
        ));
    }
    Ok(out)
}

fn exit_symmetry(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    let square = SegmentSet::rectangle(-1.0, 1.0, -1.0, 1.0)?;
    let exits = (0..cfg.samples)
        .into_par_iter()
        .map(|w| {
            let path = PlanarPath::sampled(cfg.seed, w, (0.0, 0.0));
            let mut horizon = 16.0;
            for _ in 0..=8 {
                match first_hit_boundary(&path, &square, cfg.eps, horizon) {
                    Ok(Some(hit)) => return Ok(Some((hit.segment, hit.point))),
                    Ok(None) => horizon *= 2.0,
                    Err(Error::EpsUnachievable { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(None)
        })
        .collect::<Result<Vec<_>>>()?;
    let found: Vec<_> = exits.iter().flatten().copied().collect();
    let lost = exits.len() - found.len();
    let n = found.len() as u64;
    let mut out = Vec::new();
    for (side, label) in ["bottom", "right", "top", "left"].iter().enumerate() {
        let k = found.iter().filter(|e| e.0 == side).count() as u64;
        let mut t = z_test(format!("exits through {label} side"), binomial_z(k, n, 0.25), n, cfg);
        t.extra.insert("fraction".into(), k as f64 / n as f64);
        out.push(t);
    }
    for (axis, label) in ["x", "y"].iter().enumerate() {
        let w: Welford = found
            .iter()
            .map(|e| if axis == 0 { e.1 .0 } else { e.1 .1 })
            .collect();
        out.push(z_test(
            format!("mean exit {label}"),
            w.mean / (w.std_dev() / (n as f64).sqrt()),
            n,
            cfg,
        ));
    }
    out.push(TestOutcome {
        name: "lost walkers".into(),
        statistic: lost as f64,
        threshold: 1e-3 * cfg.samples as f64,
        rule: "statistic < threshold".into(),
        passed: (lost as f64) < 1e-3 * cfg.samples as f64,
        samples: cfg.samples as u64,
        seed: cfg.seed,
        extra: BTreeMap::new(),
    });
    Ok(out)
}

/// Radii `eps` at which the disk-hitting probability is compared with its limit.
pub const SPITZER_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];
pub const SPITZER_GAP_MAX: f64 = 0.15;

/// Relative gaps `|log(1/eps) P(1, eps) / limit - 1|` at each of [`SPITZER_EPS`].
pub fn spitzer_gaps(spec: &QuadratureSpec) -> Result<(f64, Vec<f64>)> {
    let limit = spitzer_limit(1.0, spec)?;
    let gaps = SPITZER_EPS
        .iter()
        .map(|&e| Ok(((1.0 / e).ln() * bessel_first_passage(1.0, e, spec)? / limit - 1.0).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok((limit, gaps))
}

fn spitzer(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    let (limit, gaps) = spitzer_gaps(&QuadratureSpec::default())?;
    let worst_ratio = gaps.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let mut extra = BTreeMap::new();
    extra.insert("limit".into(), limit);
    for (e, g) in SPITZER_EPS.iter().zip(&gaps) {
        extra.insert(format!("gap at {e}"), *g);
    }
    let last = *gaps.last().expect("three radii");
    let plain = |name: &str, statistic: f64, threshold: f64, rule: &str, passed: bool| TestOutcome {
        name: name.into(),
        statistic,
        threshold,
        rule: rule.into(),
        passed,
        samples: 0,
        seed: cfg.seed,
        extra: extra.clone(),
    };
    Ok(vec![
        plain(
            "gap shrinks as eps decreases",
            worst_ratio,
            1.0,
            "statistic < threshold",
            worst_ratio < 1.0,
        ),
        plain(
            "gap at smallest eps",
            last,
            SPITZER_GAP_MAX,
            "statistic < threshold",
            last < SPITZER_GAP_MAX,
        ),
    ])
}

fn scaling(cfg: &SuiteConfig) -> Result<Vec<TestOutcome>> {
    let draws = |f: &(dyn Fn(&PathView) -> Result<f64> + Sync)| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| f(&view(cfg.seed, i)))
            .collect::<Result<Vec<_>>>()
    };
    let half = draws(&|v| Ok(v.scale(0.5)?.point(1.0)?.center()))?;
    let double = draws(&|v| Ok(v.scale(2.0)?.point(1.0)?.center()))?;
    let shifted = draws(&|v| Ok(v.shift_at(0.375)?.point(0.5)?.center() / 0.5f64.sqrt()))?;
    Ok(vec![
        ks_test("B(a^2)/a ~ N(0,1), a = 0.5".into(), ks_one_sample(&half, normal_cdf), cfg),
        ks_test("B(a^2)/a ~ N(0,1), a = 2".into(), ks_one_sample(&double, normal_cdf), cfg),
        ks_test(
            "(B(0.875) - B(0.375))/sqrt 0.5 ~ N(0,1)".into(),
            ks_one_sample(&shifted, normal_cdf),
            cfg,
        ),
    ])
}
