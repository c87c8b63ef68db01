//! Planar paths as two independent linear paths, and first hits of axis-aligned segments.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::extrema::{first_hit_level, path_max, path_min};
use crate::family::PathFamily;
use crate::path::step_for_modulus;
use crate::search::{Node, Segments};
use crate::view::PathView;

/// `start + (X(t), Y(t))`.
#[derive(Debug, Clone)]
pub struct PlanarPath {
    pub x: PathView,
    pub y: PathView,
    pub start: (f64, f64),
}

impl PlanarPath {
    pub fn new(x: PathView, y: PathView, start: (f64, f64)) -> Self {
        Self { x, y, start }
    }

    /// Walker `w` of `seed`: X uses family `2w`, Y uses family `2w + 1`.
    pub fn sampled(seed: u64, walker: u32, start: (f64, f64)) -> Self {
        let fx = PathFamily::sampled(seed, 2 * walker);
        let fy = PathFamily::sampled(seed, 2 * walker + 1);
        Self::new(
            PathView::new(Arc::new(fx)),
            PathView::new(Arc::new(fy)),
            start,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Axis-aligned closed segment. A vertical segment sits at `x = axis` over `y` in `span`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub orientation: Orientation,
    pub axis: f64,
    pub span: (f64, f64),
}

impl Segment {
    pub fn new(orientation: Orientation, axis: f64, span: (f64, f64)) -> Result<Self> {
        if !(span.0 < span.1) || !axis.is_finite() || !span.1.is_finite() || !span.0.is_finite()
        {
            return Err(invalid(format!("segment span {span:?} must satisfy lo < hi")));
        }
        Ok(Self {
            orientation,
            axis,
            span,
        })
    }

    pub fn vertical(x: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(Orientation::Vertical, x, (y0, y1))
    }

    pub fn horizontal(y: f64, x0: f64, x1: f64) -> Result<Self> {
        Self::new(Orientation::Horizontal, y, (x0, x1))
    }

    /// Point in (along-axis, across-span) order turned into plane coordinates.
    fn plane(&self, along: f64) -> (f64, f64) {
        match self.orientation {
            Orientation::Vertical => (self.axis, along),
            Orientation::Horizontal => (along, self.axis),
        }
    }

    /// `(coordinate across the line, coordinate along it)` of a plane point.
    fn local(&self, p: (f64, f64)) -> (f64, f64) {
        match self.orientation {
            Orientation::Vertical => (p.0, p.1),
            Orientation::Horizontal => (p.1, p.0),
        }
    }

    pub fn endpoints(&self) -> ((f64, f64), (f64, f64)) {
        (self.plane(self.span.0), self.plane(self.span.1))
    }

    pub fn touches(&self, b: &Aabb) -> bool {
        let (clo, chi, alo, ahi) = match self.orientation {
            Orientation::Vertical => (b.xlo, b.xhi, b.ylo, b.yhi),
            Orientation::Horizontal => (b.ylo, b.yhi, b.xlo, b.xhi),
        };
        clo <= self.axis && self.axis <= chi && alo <= self.span.1 && self.span.0 <= ahi
    }

    pub fn distance(&self, p: (f64, f64)) -> f64 {
        let (c, a) = self.local(p);
        let da = if a < self.span.0 {
            self.span.0 - a
        } else if a > self.span.1 {
            a - self.span.1
        } else {
            0.0
        };
        (c - self.axis).hypot(da)
    }

    /// Position along the span of the closest point, clamped into it.
    pub fn project(&self, p: (f64, f64)) -> (f64, f64) {
        let (_, a) = self.local(p);
        self.plane(a.clamp(self.span.0, self.span.1))
    }

    /// Distance from the projection of `p` to the nearer endpoint.
    fn interior_depth(&self, p: (f64, f64)) -> f64 {
        let (_, a) = self.local(p);
        let a = a.clamp(self.span.0, self.span.1);
        (a - self.span.0).min(self.span.1 - a)
    }

    /// Parameter in [0, 1] where the chord `p0 -> p1` first meets the segment.
    pub fn chord_crossing(&self, p0: (f64, f64), p1: (f64, f64)) -> Option<f64> {
        let (c0, a0) = self.local(p0);
        let (c1, a1) = self.local(p1);
        let dc = c1 - c0;
        if dc == 0.0 {
            if c0 != self.axis {
                return None;
            }
            // chord runs along the line
            let (lo, hi) = (a0.min(a1), a0.max(a1));
            if hi < self.span.0 || lo > self.span.1 {
                return None;
            }
            if (self.span.0..=self.span.1).contains(&a0) {
                return Some(0.0);
            }
            let target = if a0 < self.span.0 { self.span.0 } else { self.span.1 };
            return Some(((target - a0) / (a1 - a0)).clamp(0.0, 1.0));
        }
        let s = (self.axis - c0) / dc;
        if !(0.0..=1.0).contains(&s) {
            return None;
        }
        let a = a0 + s * (a1 - a0);
        (self.span.0 <= a && a <= self.span.1).then_some(s)
    }
}

/// Closed axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub xlo: f64,
    pub xhi: f64,
    pub ylo: f64,
    pub yhi: f64,
}

impl Aabb {
    pub fn point(p: (f64, f64)) -> Self {
        Self {
            xlo: p.0,
            xhi: p.0,
            ylo: p.1,
            yhi: p.1,
        }
    }

    pub fn diameter(&self) -> f64 {
        (self.xhi - self.xlo).max(self.yhi - self.ylo)
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.xlo + self.xhi), 0.5 * (self.ylo + self.yhi))
    }
}

/// A region's boundary, as seen by the joint hitting search.
pub trait Boundary: Sync {
    /// True when the closed box lies in the open region.
    fn box_inside(&self, b: &Aabb) -> bool;
    /// Indices of segments meeting the closed box.
    fn touching(&self, b: &Aabb, out: &mut Vec<usize>);
    fn segment(&self, i: usize) -> Segment;

    fn contains(&self, p: (f64, f64)) -> bool {
        self.box_inside(&Aabb::point(p))
    }
}

/// A closed rectilinear polygon given as a plain list of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSet {
    pub segments: Vec<Segment>,
}

impl SegmentSet {
    pub fn new(segments: Vec<Segment>) -> Self {
        Self { segments }
    }

    /// The four sides of `[x0, x1] x [y0, y1]`: bottom, right, top, left.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Ok(Self::new(vec![
            Segment::horizontal(y0, x0, x1)?,
            Segment::vertical(x1, y0, y1)?,
            Segment::horizontal(y1, x0, x1)?,
            Segment::vertical(x0, y0, y1)?,
        ]))
    }

    // even-odd rule with a ray towards +x
    fn parity_inside(&self, p: (f64, f64)) -> bool {
        let mut inside = false;
        for s in &self.segments {
            if s.orientation == Orientation::Vertical
                && s.axis > p.0
                && s.span.0 <= p.1
                && p.1 < s.span.1
            {
                inside = !inside;
            }
        }
        inside
    }
}

impl Boundary for SegmentSet {
    fn box_inside(&self, b: &Aabb) -> bool {
        !self.segments.iter().any(|s| s.touches(b)) && self.parity_inside(b.center())
    }

    fn touching(&self, b: &Aabb, out: &mut Vec<usize>) {
        out.extend(
            self.segments
                .iter()
                .enumerate()
                .filter(|(_, s)| s.touches(b))
                .map(|(i, _)| i),
        );
    }

    fn segment(&self, i: usize) -> Segment {
        self.segments[i]
    }
}

/// First hit of a planar path with a boundary or segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanarHit {
    pub time: f64,
    pub point: (f64, f64),
    pub slack: f64,
    pub level: u32,
    pub segment: usize,
    pub confidence: f64,
    /// Cells left unresolved at the refinement cap before the hit.
    pub grazing: u32,
}

const STRADDLE_REFINEMENTS: u32 = 10;

/// First time the path meets `seg` before `horizon`, one line crossing at a time.
///
/// After a crossing outside the span, the path restarts at `t + 3h/4`, where
/// the modulus bound keeps the other coordinate within half the clearance
/// over a step `h`; that step is then confirmed by an enclosure search.
pub fn first_hit_segment(
    path: &PlanarPath,
    seg: &Segment,
    eps: f64,
    horizon: f64,
) -> Result<Option<PlanarHit>> {
    if !(eps > 0.0) || !(horizon > 0.0) {
        return Err(invalid("eps and horizon must be positive"));
    }
    let (line, line0, cross, cross0) = match seg.orientation {
        Orientation::Vertical => (&path.x, path.start.0, &path.y, path.start.1),
        Orientation::Horizontal => (&path.y, path.start.1, &path.x, path.start.0),
    };
    let p0 = (
        path.start.0 + path.x.point(0.0)?.center(),
        path.start.1 + path.y.point(0.0)?.center(),
    );
    if seg.distance(p0) == 0.0 {
        return Err(invalid("path starts on the segment"));
    }
    let target = seg.axis - line0;
    let (lo_s, hi_s) = seg.span;
    let c_mod = cross.family().config().c_mod;
    let cross_range = |a: f64, b: f64, e: f64| -> Result<(f64, f64)> {
        let a = a.max(0.0);
        let lo = path_min(cross, a, b, e)?.lo + cross0;
        let hi = path_max(cross, a, b, e)?.hi + cross0;
        Ok((lo, hi))
    };
    let mut r = 0.0;
    while r < horizon {
        let mut eps_t = eps;
        let mut found = None;
        let mut clearance = None;
        for _ in 0..=STRADDLE_REFINEMENTS {
            let hit = match first_hit_level(line, target, r, eps_t, horizon) {
                Ok(h) => h,
                Err(Error::NotFound { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let (ylo, yhi) = cross_range(hit.time - hit.slack, hit.time + hit.slack, eps_t)?;
            if ylo > lo_s && yhi < hi_s {
                found = Some((hit, 0.5 * (ylo + yhi)));
                break;
            }
            if yhi < lo_s || ylo > hi_s {
                let gap = if yhi < lo_s { lo_s - yhi } else { ylo - hi_s };
                clearance = Some((hit, gap));
                break;
            }
            eps_t /= 16.0;
        }
        if let Some((hit, along)) = found {
            return Ok(Some(PlanarHit {
                time: hit.time,
                point: seg.plane(along),
                slack: hit.slack,
                level: hit.level,
                segment: 0,
                confidence: 1.0,
                grazing: 0,
            }));
        }
        let Some((hit, gap)) = clearance else {
            return Err(Error::Undecided {
                level: line.family().config().level_cap,
            });
        };
        let scale = cross.sigma().abs() * c_mod;
        let mut h = step_for_modulus(0.5 * gap, scale) / cross.alpha();
        let from = hit.time - hit.slack;
        let mut confirmed = false;
        for _ in 0..60 {
            let (ylo, yhi) = cross_range(from, hit.time + h, 0.25 * gap)?;
            if yhi < lo_s || ylo > hi_s {
                confirmed = true;
                break;
            }
            h *= 0.5;
        }
        if !confirmed {
            return Err(Error::Undecided {
                level: cross.family().config().level_cap,
            });
        }
        r = hit.time + 0.75 * h;
    }
    Ok(None)
}

/// First hit of `segments` (a closed rectilinear polygon around the start).
pub fn first_hit_segments(
    path: &PlanarPath,
    segments: &[Segment],
    eps: f64,
    horizon: f64,
) -> Result<Option<PlanarHit>> {
    first_hit_boundary(path, &SegmentSet::new(segments.to_vec()), eps, horizon)
}

/// First exit through `boundary` before `horizon`.
///
/// Walks the dyadic time tree of both coordinates in time order. A cell whose
/// bounding box stays inside the region is certified hit-free and skipped, so
/// the scan advances by the largest safe step the enclosures allow. The first
/// cell no wider than `eps` in time and space whose right end lies outside
/// holds the hit; the chord through it locates the crossing. Cells still
/// touching the boundary at the refinement cap with their right end inside are
/// passed over: an exit there would have to return within `2^-cap` time units.
pub fn first_hit_boundary<B: Boundary + ?Sized>(
    path: &PlanarPath,
    boundary: &B,
    eps: f64,
    horizon: f64,
) -> Result<Option<PlanarHit>> {
    if !(eps > 0.0) || !(horizon > 0.0) {
        return Err(invalid("eps and horizon must be positive"));
    }
    let (x, y) = (&path.x, &path.y);
    if !x.same_clock(y) {
        return Err(invalid("both coordinates must share one time map"));
    }
    if x.delta_lo != x.delta_hi || y.delta_lo != y.delta_hi {
        return Err(invalid("coordinates must have exact offsets"));
    }
    let start = (
        path.start.0 + x.point(0.0)?.center(),
        path.start.1 + y.point(0.0)?.center(),
    );
    if !boundary.box_inside(&Aabb::point(start)) {
        return Err(invalid("start is not strictly inside the boundary"));
    }
    let ua = x.time(0.0);
    let ub = x.time(horizon);
    let sx = Segments::covering(x.family(), ua, ub);
    let sy = Segments::covering(y.family(), ua, ub);
    let cap = x.family().config().level_cap.min(y.family().config().level_cap) + 1;
    let eps_u = eps * x.alpha();
    let px = |v: f64| path.start.0 + x.sigma * v + x.delta_lo;
    let py = |v: f64| path.start.1 + y.sigma * v + y.delta_lo;
    let mut stack: Vec<(Node, Node)> = sx.roots().zip(sy.roots()).collect();
    stack.reverse();
    let mut fail = 0.0;
    let mut grazing = 0u32;
    let mut near = Vec::new();
    while let Some((nx, ny)) = stack.pop() {
        let (t0, t1) = nx.span();
        if t1 <= ua || t0 >= ub {
            continue;
        }
        let (padx, fx) = sx.pad(&nx);
        let (pady, fy) = sy.pad(&ny);
        let bx = (px(nx.l), px(nx.r));
        let by = (py(ny.l), py(ny.r));
        let wx = padx * x.sigma.abs();
        let wy = pady * y.sigma.abs();
        let bb = Aabb {
            xlo: bx.0.min(bx.1) - wx,
            xhi: bx.0.max(bx.1) + wx,
            ylo: by.0.min(by.1) - wy,
            yhi: by.0.max(by.1) + wy,
        };
        if boundary.box_inside(&bb) {
            fail += fx + fy;
            continue;
        }
        let right = (bx.1, by.1);
        let inside_window = t0 >= ua && t1 <= ub;
        let small = bb.diameter() <= eps && t1 - t0 <= eps_u;
        let right_out = !boundary.contains(right);
        if right_out && small && inside_window {
            let left = (bx.0, by.0);
            let (seg, point) = locate(boundary, &bb, left, right, eps, &mut near);
            return Ok(Some(PlanarHit {
                time: x.view_time(0.5 * (t0 + t1)),
                point,
                slack: 0.5 * (t1 - t0) / x.alpha(),
                level: nx.depth.saturating_sub(1),
                segment: seg,
                confidence: (1.0 - fail).max(0.0),
                grazing,
            }));
        }
        if nx.depth >= cap {
            if right_out {
                return Err(Error::EpsUnachievable {
                    eps,
                    width: bb.diameter(),
                });
            }
            // Grazing cell at the cap: no knot outside, so no exit is certified here.
            grazing += 1;
            continue;
        }
        let (xa, xb, _) = sx.split(&nx);
        let (ya, yb, _) = sy.split(&ny);
        stack.push((xb, yb));
        stack.push((xa, ya));
    }
    Ok(None)
}

/// Crossing point of the chord `left -> right` with the boundary inside `bb`.
fn locate<B: Boundary + ?Sized>(
    boundary: &B,
    bb: &Aabb,
    left: (f64, f64),
    right: (f64, f64),
    eps: f64,
    near: &mut Vec<usize>,
) -> (usize, (f64, f64)) {
    near.clear();
    boundary.touching(bb, near);
    let mut best: Option<(f64, usize)> = None;
    for &i in near.iter() {
        if let Some(s) = boundary.segment(i).chord_crossing(left, right) {
            if best.is_none_or(|(bs, bi)| s < bs || (s == bs && i < bi)) {
                best = Some((s, i));
            }
        }
    }
    let (idx, p) = match best {
        Some((s, i)) => (
            i,
            (left.0 + s * (right.0 - left.0), left.1 + s * (right.1 - left.1)),
        ),
        None => {
            // rounding left the chord just short of every segment
            let c = bb.center();
            let i = near
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    boundary
                        .segment(a)
                        .distance(c)
                        .total_cmp(&boundary.segment(b).distance(c))
                        .then(a.cmp(&b))
                })
                .expect("an unsafe cell meets the boundary");
            (i, boundary.segment(i).project(c))
        }
    };
    let seg = boundary.segment(idx);
    let (e0, e1) = seg.endpoints();
    let at_end = dist(p, e0) <= eps || dist(p, e1) <= eps;
    let idx = if at_end {
        // corner: prefer the segment whose interior is deepest around the point
        near.iter()
            .copied()
            .filter(|&i| boundary.segment(i).distance(p) <= eps)
            .max_by(|&a, &b| {
                let da = boundary.segment(a).interior_depth(p);
                let db = boundary.segment(b).interior_depth(p);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap_or(idx)
    } else {
        idx
    };
    (idx, boundary.segment(idx).project(p))
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}
