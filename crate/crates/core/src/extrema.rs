//! Maximum, minimum, zero decisions and first hitting times of one-dimensional views.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::path::Enclosure;
use crate::search::{MaxSearch, Status};
use crate::view::PathView;

fn check_window(a: f64, b: f64) -> Result<()> {
    if !(a >= 0.0 && b > a && b.is_finite()) {
        return Err(invalid(format!("need 0 <= a < b, got a = {a}, b = {b}")));
    }
    Ok(())
}

/// Enclosure of `max V(t)` over `[a, b]` with width at most `eps`.
pub fn path_max(view: &PathView, a: f64, b: f64, eps: f64) -> Result<Enclosure> {
    path_max_at(view, a, b, eps).map(|(e, _)| e)
}

/// Like [`path_max`], also returning a time whose value certifies the lower end.
pub fn path_max_at(view: &PathView, a: f64, b: f64, eps: f64) -> Result<(Enclosure, f64)> {
    check_window(a, b)?;
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    let mut s = MaxSearch::new(view, a, b)?;
    let cap = view.family().config().level_cap + 1;
    let status = s.run(cap, eps, |_, _| false);
    let (lo, hi) = s.bounds();
    if status == Status::Frozen {
        return Err(Error::EpsUnachievable { eps, width: hi - lo });
    }
    Ok((Enclosure::new(lo, hi.max(lo), s.level(), s.confidence()), s.best_time()))
}

/// Enclosure of `min V(t)` over `[a, b]` with width at most `eps`.
pub fn path_min(view: &PathView, a: f64, b: f64, eps: f64) -> Result<Enclosure> {
    let e = path_max(&view.negate(), a, b, eps)?;
    Ok(Enclosure::new(-e.hi, -e.lo, e.level, e.confidence))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    HasZero,
    NoZero,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Witness {
    /// `V(t_plus) > 0 > V(t_minus)`, both certified.
    SignChange { t_plus: f64, t_minus: f64 },
    /// The maximum is below zero or the minimum above it.
    Separation { bound: Enclosure },
    /// The window starts at a point where the view is exactly zero.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDecision {
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub level: u32,
}

/// Decides whether `V` vanishes on `[a, b]` using coefficients through `budget_level`.
///
/// Each round deepens both the maximum and the minimum search by one level.
pub fn has_zero(view: &PathView, a: f64, b: f64, budget_level: u32) -> Result<ZeroDecision> {
    check_window(a, b)?;
    if a == 0.0 && view.point(0.0)?.is_exact_zero() {
        return Ok(ZeroDecision {
            verdict: Verdict::HasZero,
            witness: Some(Witness::Origin),
            level: 0,
        });
    }
    let budget = budget_level.min(view.family().config().level_cap);
    let neg = view.negate();
    let mut up = MaxSearch::new(view, a, b)?;
    let mut down = MaxSearch::new(&neg, a, b)?;
    let decided = |lo: f64, hi: f64| lo > 0.0 || hi < 0.0;
    for round in 1..=budget + 1 {
        up.run(round, 0.0, decided);
        let (mlo, mhi) = up.bounds();
        if mhi < 0.0 {
            return Ok(separation(mlo, mhi, &up));
        }
        down.run(round, 0.0, decided);
        let (nlo, nhi) = down.bounds();
        if nhi < 0.0 {
            return Ok(separation(-nhi, -nlo, &down));
        }
        if mlo > 0.0 && nlo > 0.0 {
            return Ok(ZeroDecision {
                verdict: Verdict::HasZero,
                witness: Some(Witness::SignChange {
                    t_plus: up.best_time(),
                    t_minus: down.best_time(),
                }),
                level: up.level().max(down.level()),
            });
        }
    }
    Ok(ZeroDecision {
        verdict: Verdict::Undecided,
        witness: None,
        level: budget,
    })
}

fn separation(lo: f64, hi: f64, s: &MaxSearch) -> ZeroDecision {
    ZeroDecision {
        verdict: Verdict::NoZero,
        witness: Some(Witness::Separation {
            bound: Enclosure::new(lo, hi, s.level(), s.confidence()),
        }),
        level: s.level(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HittingRecord {
    pub time: f64,
    pub location: f64,
    pub slack: f64,
    pub level: u32,
}

// Split points tried when a bisection half cannot be decided.
const FALLBACK_SPLITS: [f64; 5] = [0.5, 0.375, 0.625, 0.25, 0.75];

/// First zero of `V` on `[a, b]` to within `eps`, or `None` when `V` is certified nonzero.
///
/// Keeps `[lo, hi]` with no zero on `[a, lo)` and a certified zero in `[lo, hi]`.
pub fn first_zero(view: &PathView, a: f64, b: f64, eps: f64) -> Result<Option<HittingRecord>> {
    check_window(a, b)?;
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    let budget = view.family().config().level_cap;
    if a == 0.0 && view.point(0.0)?.is_exact_zero() {
        return Ok(Some(HittingRecord {
            time: 0.0,
            location: 0.0,
            slack: eps,
            level: 0,
        }));
    }
    let d = has_zero(view, a, b, budget)?;
    let mut level = d.level;
    match d.verdict {
        Verdict::NoZero => return Ok(None),
        Verdict::Undecided => return Err(Error::Undecided { level: d.level }),
        Verdict::HasZero => {}
    }
    let (mut lo, mut hi) = (a, b);
    while hi - lo > 2.0 * eps {
        let w = hi - lo;
        let mut moved = false;
        for f in FALLBACK_SPLITS {
            let m = lo + f * w;
            let d = has_zero(view, lo, m, budget)?;
            level = level.max(d.level);
            match d.verdict {
                Verdict::HasZero => {
                    hi = m;
                    moved = true;
                }
                Verdict::NoZero => {
                    lo = m;
                    moved = true;
                }
                Verdict::Undecided => continue,
            }
            break;
        }
        if !moved {
            return Err(Error::Undecided { level: budget });
        }
    }
    Ok(Some(HittingRecord {
        time: 0.5 * (lo + hi),
        location: 0.0,
        slack: (0.5 * (hi - lo)).max(f64::MIN_POSITIVE),
        level,
    }))
}

/// First `t >= q` with `V(t) = alpha`, scanning unit windows up to `horizon`.
pub fn first_hit_level(
    view: &PathView,
    alpha: f64,
    q: f64,
    eps: f64,
    horizon: f64,
) -> Result<HittingRecord> {
    if !(q >= 0.0) || !(horizon >= q) {
        return Err(invalid(format!("need 0 <= q <= horizon, got q = {q}, horizon = {horizon}")));
    }
    let w = view.offset(-alpha);
    if w.point(q)?.is_exact_zero() {
        return Ok(HittingRecord {
            time: q,
            location: alpha,
            slack: eps,
            level: 0,
        });
    }
    let mut lo = q;
    while lo < horizon {
        let hi = (lo.floor() + 1.0).min(horizon);
        if let Some(mut r) = first_zero(&w, lo, hi, eps)? {
            r.location = alpha;
            return Ok(r);
        }
        lo = hi;
    }
    Err(Error::NotFound { horizon })
}
