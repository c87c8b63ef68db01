//! Exact answers for truncated paths, which are plain polylines on a uniform mesh.

#![allow(dead_code)]

use brownian_core::{PathCoefficients, Segment, Orientation};

pub struct Polyline {
    pub values: Vec<f64>,
}

impl Polyline {
    /// Knots of a truncated path; the mesh is fine enough to be exact.
    pub fn of(p: &PathCoefficients) -> Self {
        let depth = p.exact_depth().expect("explicit path") as i64;
        Self { values: p.knots(depth - 1) }
    }

    pub fn mesh(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn at(&self, t: f64) -> f64 {
        let m = (self.values.len() - 1) as f64;
        let s = (t * m).clamp(0.0, m);
        let i = (s.floor() as usize).min(self.values.len() - 2);
        let f = s - i as f64;
        self.values[i] + f * (self.values[i + 1] - self.values[i])
    }

    /// Knot times strictly inside `(a, b)`.
    fn inner(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        let m = (self.values.len() - 1) as f64;
        let lo = (a * m).floor() as usize + 1;
        let hi = ((b * m).ceil() as usize).min(self.values.len() - 1);
        (lo..hi).map(move |i| i as f64 / m).filter(move |&t| t > a && t < b)
    }

    fn breaks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut ts = vec![a];
        ts.extend(self.inner(a, b));
        ts.push(b);
        ts
    }

    pub fn max_on(&self, a: f64, b: f64) -> f64 {
        self.breaks(a, b).into_iter().map(|t| self.at(t)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_slope(&self) -> f64 {
        let m = (self.values.len() - 1) as f64;
        self.values.windows(2).map(|w| (w[1] - w[0]).abs() * m).fold(0.0, f64::max)
    }

    /// First `t` in `[a, b]` with value `level`.
    pub fn first_level(&self, level: f64, a: f64, b: f64) -> Option<f64> {
        let ts = self.breaks(a, b);
        for w in ts.windows(2) {
            let (v0, v1) = (self.at(w[0]) - level, self.at(w[1]) - level);
            if v0 == 0.0 {
                return Some(w[0]);
            }
            if v0 * v1 <= 0.0 {
                return Some(w[0] + v0 / (v0 - v1) * (w[1] - w[0]));
            }
        }
        None
    }
}

/// First time `start + (x, y)` meets `seg` on `[0, 1]`, with the meeting point.
pub fn first_hit(x: &Polyline, y: &Polyline, start: (f64, f64), seg: &Segment) -> Option<(f64, (f64, f64))> {
    let (line, cross, l0, c0) = match seg.orientation {
        Orientation::Vertical => (x, y, start.0, start.1),
        Orientation::Horizontal => (y, x, start.1, start.0),
    };
    let ts = line.breaks(0.0, 1.0);
    for w in ts.windows(2) {
        let (v0, v1) = (l0 + line.at(w[0]) - seg.axis, l0 + line.at(w[1]) - seg.axis);
        if v0 * v1 > 0.0 || (v0 == 0.0 && v1 == 0.0) {
            continue;
        }
        let t = if v0 == v1 { w[0] } else { w[0] + v0 / (v0 - v1) * (w[1] - w[0]) };
        let along = c0 + cross.at(t);
        if seg.span.0 <= along && along <= seg.span.1 {
            let p = match seg.orientation {
                Orientation::Vertical => (seg.axis, along),
                Orientation::Horizontal => (along, seg.axis),
            };
            return Some((t, p));
        }
    }
    None
}

use brownian_core::rng::{philox4x64, unit_open};
use brownian_core::{first_hit_segment, first_zero, path_max, sample_path, PathView, PlanarPath};

/// One randomized comparison between the certified searches and the polyline answers.
#[derive(Debug, Clone, Copy)]
pub struct Case {
    pub seed: u64,
    /// Highest tent level kept; the mesh is `2^-(level + 1)`.
    pub level: u32,
    pub a: f64,
    pub b: f64,
    pub eps: f64,
    pub vertical: bool,
    pub axis: f64,
    pub span: (f64, f64),
}

impl Case {
    /// Case `i` of a fixed pseudo-random sequence.
    pub fn from_index(i: u64) -> Self {
        let w = philox4x64([i, 0, 0, 0], [0x5eed, 8]);
        let v = philox4x64([i, 1, 0, 0], [0x5eed, 8]);
        let u = |x: u64| unit_open(x);
        let (a, b) = {
            let (p, q) = (u(w[1]), u(w[2]));
            (p.min(q), p.max(q).max(p.min(q) + 1e-3))
        };
        let c = 2.0 * u(v[1]) - 1.0;
        let half = 0.1 + 0.9 * u(v[2]);
        Self {
            seed: w[0],
            level: (w[3] % 12) as u32,
            a,
            b: b.min(1.0),
            eps: 10f64.powf(-3.0 - 3.0 * u(v[0])),
            vertical: v[3] & 1 == 0,
            axis: (0.1 + 0.9 * u(v[3] >> 1)) * if v[3] & 2 == 0 { 1.0 } else { -1.0 },
            span: (c - half, c + half),
        }
    }

    pub fn check(&self) -> Result<(), String> {
        let px = sample_path(self.seed, 0, self.level).truncated(self.level);
        let py = sample_path(self.seed, 1, self.level).truncated(self.level);
        let (ox, oy) = (Polyline::of(&px), Polyline::of(&py));
        let vx = PathView::of_path(px);
        let tol = 1e-9;

        let m = ox.max_on(self.a, self.b);
        let e = path_max(&vx, self.a, self.b, self.eps).map_err(|e| format!("max: {e}"))?;
        if !(e.lo - tol <= m && m <= e.hi + tol) || e.width() > self.eps {
            return Err(format!("max {m} vs enclosure {e:?}"));
        }

        let z = ox.first_level(0.0, self.a, self.b);
        let r = first_zero(&vx, self.a, self.b, self.eps).map_err(|e| format!("zero: {e}"))?;
        match (z, r) {
            (None, None) => {}
            (Some(t), Some(r)) if (r.time - t).abs() <= r.slack + tol && r.slack <= self.eps => {}
            _ => return Err(format!("first zero {z:?} vs {r:?}")),
        }

        let seg = if self.vertical {
            Segment::vertical(self.axis, self.span.0, self.span.1)
        } else {
            Segment::horizontal(self.axis, self.span.0, self.span.1)
        }
        .map_err(|e| e.to_string())?;
        let planar = PlanarPath::new(vx, PathView::of_path(py), (0.0, 0.0));
        let want = first_hit(&ox, &oy, (0.0, 0.0), &seg);
        let got = first_hit_segment(&planar, &seg, self.eps, 1.0).map_err(|e| format!("hit: {e}"))?;
        let cross_slope = if self.vertical { oy.max_slope() } else { ox.max_slope() };
        match (want, got) {
            (None, None) => {}
            (Some((t, p)), Some(h))
                if (h.time - t).abs() <= h.slack + tol
                    && h.slack <= self.eps
                    && (h.point.0 - p.0).abs().max((h.point.1 - p.1).abs())
                        <= 2.0 * h.slack * cross_slope + tol => {}
            _ => return Err(format!("segment hit {want:?} vs {got:?}")),
        }
        Ok(())
    }
}

impl Case {
    /// Whether the polyline answers are a zero and a segment hit, so a batch can be checked for coverage.
    pub fn expects(&self) -> (bool, bool) {
        let px = sample_path(self.seed, 0, self.level).truncated(self.level);
        let py = sample_path(self.seed, 1, self.level).truncated(self.level);
        let (ox, oy) = (Polyline::of(&px), Polyline::of(&py));
        let seg = if self.vertical {
            Segment::vertical(self.axis, self.span.0, self.span.1)
        } else {
            Segment::horizontal(self.axis, self.span.0, self.span.1)
        }
        .expect("valid span");
        (
            ox.first_level(0.0, self.a, self.b).is_some(),
            first_hit(&ox, &oy, (0.0, 0.0), &seg).is_some(),
        )
    }
}
