//! The interior square set reached from a point, and its boundary edges.

use std::collections::{BTreeMap, HashMap, VecDeque};

use super::domain::{GridBox, Square, SquaredDomain, NEIGHBORS};
use crate::basis::pow2_neg;
use crate::error::{Error, Result};
use crate::planar::{Aabb, Boundary, Orientation, Segment};

// Above this many edge slots a touching query scans the segment list instead.
const DENSE_QUERY_LIMIT: i64 = 4096;

/// Maximal 4-connected set of non-boundary squares around a point, with the
/// unit edges that separate it from the boundary squares.
#[derive(Debug, Clone)]
pub struct InteriorRegion {
    resolution: u32,
    h: f64,
    grid: GridBox,
    width: usize,
    // (width + 1) x (rows + 1) inclusive prefix counts of interior squares
    prefix: Vec<u32>,
    inside: Vec<bool>,
    squares: Vec<Square>,
    segments: Vec<Segment>,
    owners: Vec<Square>,
    inner: Vec<Square>,
    partners: Vec<[Option<usize>; 2]>,
    vertical: HashMap<(i64, i64), usize>,
    horizontal: HashMap<(i64, i64), usize>,
}

impl InteriorRegion {
    /// Flood fill from the square holding `x`, stopping at boundary squares.
    pub fn flood_fill(domain: &SquaredDomain, x: (f64, f64)) -> Result<Self> {
        if !(x.0.is_finite() && x.1.is_finite()) {
            return Err(Error::Domain("start point must be finite".into()));
        }
        let start = domain.square_of(x);
        if domain.contains(start) {
            return Err(Error::Domain(format!(
                "point ({}, {}) lies in boundary square {start:?}",
                x.0, x.1
            )));
        }
        let bb = domain.bbox();
        let enclosed = |s: Square| bb.contains(s);
        if !enclosed(start) {
            return Err(Error::Domain(format!(
                "point ({}, {}) is not enclosed by the boundary squares",
                x.0, x.1
            )));
        }
        let grid = bb;
        let width = (grid.imax - grid.imin + 1) as usize;
        let rows = (grid.jmax - grid.jmin + 1) as usize;
        let idx = |s: Square| (s.1 - grid.jmin) as usize * width + (s.0 - grid.imin) as usize;
        let mut inside = vec![false; width * rows];
        inside[idx(start)] = true;
        let mut queue = VecDeque::from([start]);
        while let Some((i, j)) = queue.pop_front() {
            for (di, dj) in NEIGHBORS {
                let s = (i + di, j + dj);
                if domain.contains(s) {
                    continue;
                }
                if !enclosed(s) {
                    return Err(Error::Domain(format!(
                        "point ({}, {}) is not enclosed by the boundary squares",
                        x.0, x.1
                    )));
                }
                let k = idx(s);
                if !inside[k] {
                    inside[k] = true;
                    queue.push_back(s);
                }
            }
        }

        let mut prefix = vec![0u32; (width + 1) * (rows + 1)];
        for r in 0..rows {
            for c in 0..width {
                let v = inside[r * width + c] as u32;
                prefix[(r + 1) * (width + 1) + c + 1] =
                    v + prefix[r * (width + 1) + c + 1] + prefix[(r + 1) * (width + 1) + c]
                        - prefix[r * (width + 1) + c];
            }
        }

        let mut squares = Vec::new();
        for r in 0..rows {
            for c in 0..width {
                if inside[r * width + c] {
                    squares.push((grid.imin + c as i64, grid.jmin + r as i64));
                }
            }
        }

        let h = domain.side();
        let mut region = Self {
            resolution: domain.resolution(),
            h,
            grid,
            width,
            prefix,
            inside,
            squares,
            segments: Vec::new(),
            owners: Vec::new(),
            inner: Vec::new(),
            partners: Vec::new(),
            vertical: HashMap::new(),
            horizontal: HashMap::new(),
        };
        region.build_edges()?;
        Ok(region)
    }

    fn build_edges(&mut self) -> Result<()> {
        let h = self.h;
        let squares = self.squares.clone();
        for &(i, j) in &squares {
            // bottom, right, top, left
            let sides = [
                ((i, j - 1), Orientation::Horizontal, (i, j)),
                ((i + 1, j), Orientation::Vertical, (i + 1, j)),
                ((i, j + 1), Orientation::Horizontal, (i, j + 1)),
                ((i - 1, j), Orientation::Vertical, (i, j)),
            ];
            for (nb, orient, key) in sides {
                if self.is_inside(nb) {
                    continue;
                }
                let seg = match orient {
                    Orientation::Horizontal => {
                        Segment::horizontal(key.1 as f64 * h, key.0 as f64 * h, (key.0 + 1) as f64 * h)?
                    }
                    Orientation::Vertical => {
                        Segment::vertical(key.0 as f64 * h, key.1 as f64 * h, (key.1 + 1) as f64 * h)?
                    }
                };
                let id = self.segments.len();
                self.segments.push(seg);
                self.owners.push(nb);
                self.inner.push((i, j));
                match orient {
                    Orientation::Horizontal => self.horizontal.insert(key, id),
                    Orientation::Vertical => self.vertical.insert(key, id),
                };
            }
        }
        // grid vertex -> segments ending there, in index order
        let mut at: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
        for id in 0..self.segments.len() {
            for v in self.vertices(id) {
                at.entry(v).or_default().push(id);
            }
        }
        self.partners = (0..self.segments.len())
            .map(|id| {
                let vs = self.vertices(id);
                [0, 1].map(|e| {
                    let others: Vec<usize> = at[&vs[e]].iter().copied().filter(|&o| o != id).collect();
                    others
                        .iter()
                        .copied()
                        .find(|&o| self.inner[o] == self.inner[id])
                        .or_else(|| {
                            others
                                .iter()
                                .copied()
                                .find(|&o| self.segments[o].orientation == self.segments[id].orientation)
                        })
                        .or_else(|| others.first().copied())
                })
            })
            .collect();
        Ok(())
    }

    /// Grid vertices at the low and high ends of a segment.
    fn vertices(&self, id: usize) -> [(i64, i64); 2] {
        let s = &self.segments[id];
        let a = (s.axis / self.h).round() as i64;
        let lo = (s.span.0 / self.h).round() as i64;
        match s.orientation {
            Orientation::Vertical => [(a, lo), (a, lo + 1)],
            Orientation::Horizontal => [(lo, a), (lo + 1, a)],
        }
    }

    fn is_inside(&self, s: Square) -> bool {
        if !self.grid.contains(s) {
            return false;
        }
        let c = (s.0 - self.grid.imin) as usize;
        let r = (s.1 - self.grid.jmin) as usize;
        self.inside[r * self.width + c]
    }

    fn count(&self, i0: i64, i1: i64, j0: i64, j1: i64) -> u32 {
        let c0 = (i0 - self.grid.imin) as usize;
        let c1 = (i1 - self.grid.imin) as usize + 1;
        let r0 = (j0 - self.grid.jmin) as usize;
        let r1 = (j1 - self.grid.jmin) as usize + 1;
        let w = self.width + 1;
        self.prefix[r1 * w + c1] + self.prefix[r0 * w + c0] - self.prefix[r0 * w + c1] - self.prefix[r1 * w + c0]
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn side(&self) -> f64 {
        self.h
    }

    /// Interior squares, row by row from the bottom.
    pub fn squares(&self) -> &[Square] {
        &self.squares
    }

    pub fn contains_square(&self, s: Square) -> bool {
        self.is_inside(s)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Boundary square on the far side of each segment.
    pub fn owners(&self) -> &[Square] {
        &self.owners
    }

    /// Interior square on the near side of each segment.
    pub fn inner_squares(&self) -> &[Square] {
        &self.inner
    }

    /// Segments sharing the low and high endpoint of each segment, used for corner smoothing.
    pub fn partners(&self) -> &[[Option<usize>; 2]] {
        &self.partners
    }

    /// Width of the smoothing zone around segment endpoints, `2^{-n-3}`.
    pub fn corner_zone(&self) -> f64 {
        pow2_neg(self.resolution + 3)
    }

    /// Boundary value at `p` on segment `seg`: the segment's own value, or the
    /// average with its partner inside a corner zone.
    pub fn value_at(&self, values: &[f64], seg: usize, p: (f64, f64)) -> f64 {
        let s = &self.segments[seg];
        let along = match s.orientation {
            Orientation::Vertical => p.1,
            Orientation::Horizontal => p.0,
        };
        let zone = self.corner_zone();
        let end = if along - s.span.0 <= zone {
            Some(0)
        } else if s.span.1 - along <= zone {
            Some(1)
        } else {
            None
        };
        match end.and_then(|e| self.partners[seg][e]) {
            Some(o) => 0.5 * (values[seg] + values[o]),
            None => values[seg],
        }
    }

    /// Diagonal of the interior's bounding box.
    pub fn diameter(&self) -> f64 {
        let (mut i0, mut i1, mut j0, mut j1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for &(i, j) in &self.squares {
            i0 = i0.min(i);
            i1 = i1.max(i);
            j0 = j0.min(j);
            j1 = j1.max(j);
        }
        ((i1 - i0 + 1) as f64 * self.h).hypot((j1 - j0 + 1) as f64 * self.h)
    }

    fn index_range(&self, lo: f64, hi: f64) -> (i64, i64) {
        (ceil(lo / self.h) - 1, floor(hi / self.h))
    }
}

// Integer floor and ceil without a libm call; inputs are far below 2^63.
#[inline]
fn floor(v: f64) -> i64 {
    let t = v as i64;
    if (t as f64) > v {
        t - 1
    } else {
        t
    }
}

#[inline]
fn ceil(v: f64) -> i64 {
    let t = v as i64;
    if (t as f64) < v {
        t + 1
    } else {
        t
    }
}

impl Boundary for InteriorRegion {
    fn box_inside(&self, b: &Aabb) -> bool {
        if !(b.xlo.is_finite() && b.xhi.is_finite() && b.ylo.is_finite() && b.yhi.is_finite()) {
            return false;
        }
        let (i0, i1) = self.index_range(b.xlo, b.xhi);
        let (j0, j1) = self.index_range(b.ylo, b.yhi);
        if i0 < self.grid.imin || i1 > self.grid.imax || j0 < self.grid.jmin || j1 > self.grid.jmax {
            return false;
        }
        let area = ((i1 - i0 + 1) * (j1 - j0 + 1)) as u32;
        self.count(i0, i1, j0, j1) == area
    }

    fn touching(&self, b: &Aabb, out: &mut Vec<usize>) {
        let start = out.len();
        let (ci0, ci1) = (ceil(b.xlo / self.h), floor(b.xhi / self.h));
        let (cj0, cj1) = (ceil(b.ylo / self.h), floor(b.yhi / self.h));
        let (i0, i1) = self.index_range(b.xlo, b.xhi);
        let (j0, j1) = self.index_range(b.ylo, b.yhi);
        let slots = (ci1 - ci0 + 1).max(0) * (j1 - j0 + 1) + (i1 - i0 + 1) * (cj1 - cj0 + 1).max(0);
        if slots > DENSE_QUERY_LIMIT {
            out.extend((0..self.segments.len()).filter(|&k| self.segments[k].touches(b)));
            return;
        }
        for a in ci0..=ci1 {
            for j in j0..=j1 {
                if let Some(&k) = self.vertical.get(&(a, j)) {
                    out.push(k);
                }
            }
        }
        for a in cj0..=cj1 {
            for i in i0..=i1 {
                if let Some(&k) = self.horizontal.get(&(i, a)) {
                    out.push(k);
                }
            }
        }
        out[start..].sort_unstable();
        out.retain({
            let mut seen = std::collections::HashSet::new();
            move |k| seen.insert(*k)
        });
    }

    fn segment(&self, i: usize) -> Segment {
        self.segments[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: i64) -> SquaredDomain {
        let mut sq = Vec::new();
        for k in 0..n {
            sq.extend([(k, 0), (k, n - 1), (0, k), (n - 1, k)]);
        }
        SquaredDomain::new(2, sq).unwrap()
    }

    #[test]
    fn ring_of_four_leaves_two_by_two() {
        let d = ring(4);
        let h = d.side();
        let r = InteriorRegion::flood_fill(&d, (2.0 * h, 2.0 * h)).unwrap();
        assert_eq!(r.squares(), &[(1, 1), (2, 1), (1, 2), (2, 2)]);
        assert_eq!(r.segments().len(), 8);
        for o in r.owners() {
            assert!(d.contains(*o));
        }
    }

    #[test]
    fn three_ring_has_one_square() {
        let d = ring(3);
        let h = d.side();
        let r = InteriorRegion::flood_fill(&d, (1.5 * h, 1.5 * h)).unwrap();
        assert_eq!(r.squares(), &[(1, 1)]);
        assert_eq!(r.segments().len(), 4);
        // every corner pairs the two sides of the one square
        for (k, p) in r.partners().iter().enumerate() {
            for q in p.iter().flatten() {
                assert_ne!(*q, k);
                assert_eq!(r.segments()[*q].orientation == r.segments()[k].orientation, false);
            }
        }
    }

    #[test]
    fn start_in_boundary_or_outside_is_rejected() {
        let d = ring(4);
        let h = d.side();
        assert!(matches!(InteriorRegion::flood_fill(&d, (0.5 * h, 0.5 * h)), Err(Error::Domain(_))));
        assert!(matches!(InteriorRegion::flood_fill(&d, (9.0, 9.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn leaking_ring_is_rejected() {
        // a gap in the ring lets the fill escape the bounding box
        let mut sq: Vec<Square> = Vec::new();
        for k in 0..5 {
            sq.extend([(k, 0), (k, 4), (0, k)]);
        }
        sq.extend([(4, 1), (4, 3)]);
        // (4, 2) missing, but (4,1) and (4,3) connect through the rest
        let d = SquaredDomain::new(2, sq).unwrap();
        let h = d.side();
        assert!(InteriorRegion::flood_fill(&d, (2.5 * h, 2.5 * h)).is_err());
    }

    #[test]
    fn box_queries() {
        let d = ring(4);
        let h = d.side();
        let r = InteriorRegion::flood_fill(&d, (2.0 * h, 2.0 * h)).unwrap();
        let inner = Aabb {
            xlo: 1.2 * h,
            xhi: 2.8 * h,
            ylo: 1.5 * h,
            yhi: 2.5 * h,
        };
        assert!(r.box_inside(&inner));
        // touching the boundary line x = h is not inside
        let edge = Aabb { xlo: h, ..inner };
        assert!(!r.box_inside(&edge));
        let mut out = Vec::new();
        r.touching(&edge, &mut out);
        assert!(!out.is_empty());
        for &k in &out {
            assert_eq!(r.segments()[k].axis, h);
        }
        assert!(r.contains((2.0 * h, 2.0 * h)));
        assert!(!r.contains((h, 2.0 * h)));
    }

    #[test]
    fn corner_values_average() {
        let d = ring(3);
        let h = d.side();
        let r = InteriorRegion::flood_fill(&d, (1.5 * h, 1.5 * h)).unwrap();
        let values: Vec<f64> = (0..4).map(|k| k as f64).collect();
        // bottom edge (index 0) at its left end meets the left edge (index 3)
        assert_eq!(r.value_at(&values, 0, (h, h)), 1.5);
        assert_eq!(r.value_at(&values, 0, (1.5 * h, h)), 0.0);
    }
}
