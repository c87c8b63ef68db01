//! Boundary squares on the grid `2^-n Z × 2^-n Z`.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::basis::pow2_neg;
use crate::error::{Error, Result};

/// Grid square `(i, j)` covers `[i h, (i+1) h] × [j h, (j+1) h]` with `h = 2^-n`.
pub type Square = (i64, i64);

pub(crate) const NEIGHBORS: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// Inclusive square-index bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridBox {
    pub imin: i64,
    pub imax: i64,
    pub jmin: i64,
    pub jmax: i64,
}

impl GridBox {
    pub fn contains(&self, s: Square) -> bool {
        (self.imin..=self.imax).contains(&s.0) && (self.jmin..=self.jmax).contains(&s.1)
    }
}

/// The squares covering a domain's boundary, edge-connected and non-empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDomain {
    resolution: u32,
    squares: BTreeSet<Square>,
    bbox: GridBox,
}

impl SquaredDomain {
    pub fn new(resolution: u32, squares: impl IntoIterator<Item = Square>) -> Result<Self> {
        if resolution > 30 {
            return Err(Error::Domain(format!("resolution {resolution} exceeds 30")));
        }
        let squares: BTreeSet<Square> = squares.into_iter().collect();
        let Some(&first) = squares.iter().next() else {
            return Err(Error::Domain("no boundary squares".into()));
        };
        let mut bbox = GridBox {
            imin: first.0,
            imax: first.0,
            jmin: first.1,
            jmax: first.1,
        };
        for &(i, j) in &squares {
            bbox.imin = bbox.imin.min(i);
            bbox.imax = bbox.imax.max(i);
            bbox.jmin = bbox.jmin.min(j);
            bbox.jmax = bbox.jmax.max(j);
        }
        let d = Self {
            resolution,
            squares,
            bbox,
        };
        d.check_connected()?;
        Ok(d)
    }

    fn check_connected(&self) -> Result<()> {
        let start = *self.squares.iter().next().expect("non-empty");
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((i, j)) = queue.pop_front() {
            for (di, dj) in NEIGHBORS {
                let s = (i + di, j + dj);
                if self.squares.contains(&s) && seen.insert(s) {
                    queue.push_back(s);
                }
            }
        }
        if seen.len() != self.squares.len() {
            return Err(Error::Domain(format!(
                "boundary squares are not edge-connected ({} of {} reachable)",
                seen.len(),
                self.squares.len()
            )));
        }
        Ok(())
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Side length `2^-n`.
    pub fn side(&self) -> f64 {
        pow2_neg(self.resolution)
    }

    pub fn squares(&self) -> &BTreeSet<Square> {
        &self.squares
    }

    pub fn contains(&self, s: Square) -> bool {
        self.squares.contains(&s)
    }

    pub fn bbox(&self) -> GridBox {
        self.bbox
    }

    pub fn center(&self, s: Square) -> (f64, f64) {
        let h = self.side();
        ((s.0 as f64 + 0.5) * h, (s.1 as f64 + 0.5) * h)
    }

    /// Square holding `p`; points on grid lines go to the square above and to the right.
    pub fn square_of(&self, p: (f64, f64)) -> Square {
        let h = self.side();
        ((p.0 / h).floor() as i64, (p.1 / h).floor() as i64)
    }

    /// Squares met by the zero set of a signed distance function over `region`.
    ///
    /// A square is kept when `|sdf(center)|` is at most its half-diagonal, so
    /// every square the boundary passes through is kept and every kept square
    /// lies within `2^{-n+2}` of the boundary. Squares touching only at a
    /// corner are joined through the shared neighbor closer to the boundary.
    pub fn from_sdf(
        resolution: u32,
        sdf: impl Fn((f64, f64)) -> f64,
        region: ((f64, f64), (f64, f64)),
    ) -> Result<Self> {
        let h = pow2_neg(resolution);
        let reach = std::f64::consts::FRAC_1_SQRT_2 * h * (1.0 + 1e-12);
        let ((x0, y0), (x1, y1)) = region;
        let (i0, i1) = ((x0 / h).floor() as i64 - 1, (x1 / h).ceil() as i64);
        let (j0, j1) = ((y0 / h).floor() as i64 - 1, (y1 / h).ceil() as i64);
        let mut dist = BTreeMap::new();
        let mut kept = BTreeSet::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                let c = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let d = sdf(c).abs();
                dist.insert((i, j), d);
                if d <= reach {
                    kept.insert((i, j));
                }
            }
        }
        let mut bridges = Vec::new();
        for &(i, j) in &kept {
            for di in [-1, 1] {
                let diag = (i + di, j + 1);
                if !kept.contains(&diag) {
                    continue;
                }
                let a = (i + di, j);
                let b = (i, j + 1);
                if kept.contains(&a) || kept.contains(&b) {
                    continue;
                }
                let da = dist.get(&a).copied().unwrap_or(f64::INFINITY);
                let db = dist.get(&b).copied().unwrap_or(f64::INFINITY);
                bridges.push(if da <= db { a } else { b });
            }
        }
        kept.extend(bridges);
        Self::new(resolution, kept)
    }
}

/// Built-in shapes with exact signed distance (negative inside).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum Shape {
    Rect { x0: f64, x1: f64, y0: f64, y1: f64 },
    Disk { cx: f64, cy: f64, r: f64 },
}

impl Shape {
    pub fn sdf(&self, p: (f64, f64)) -> f64 {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => {
                let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
                let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
                let qx = (p.0 - cx).abs() - hx;
                let qy = (p.1 - cy).abs() - hy;
                qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
            }
            Shape::Disk { cx, cy, r } => (p.0 - cx).hypot(p.1 - cy) - r,
        }
    }

    /// Bounding rectangle.
    pub fn extent(&self) -> ((f64, f64), (f64, f64)) {
        match *self {
            Shape::Rect { x0, x1, y0, y1 } => ((x0, y0), (x1, y1)),
            Shape::Disk { cx, cy, r } => ((cx - r, cy - r), (cx + r, cy + r)),
        }
    }

    pub fn squared(&self, resolution: u32) -> Result<SquaredDomain> {
        SquaredDomain::from_sdf(resolution, |p| self.sdf(p), self.extent())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_disconnected_and_empty() {
        assert!(SquaredDomain::new(2, []).is_err());
        assert!(SquaredDomain::new(2, [(0, 0), (2, 0)]).is_err());
        assert!(SquaredDomain::new(2, [(0, 0), (1, 1)]).is_err());
        assert!(SquaredDomain::new(2, [(0, 0), (1, 0), (1, 1)]).is_ok());
    }

    #[test]
    fn disk_squares_meet_the_circle() {
        let disk = Shape::Disk { cx: 0.0, cy: 0.0, r: 1.0 };
        for n in 2..=6 {
            let d = disk.squared(n).unwrap();
            let h = d.side();
            for &s in d.squares() {
                let c = d.center(s);
                assert!(disk.sdf(c).abs() <= 4.0 * h, "square {s:?} too far at n={n}");
            }
            // every square crossed by the circle is kept
            for k in 0..720 {
                let a = k as f64 * std::f64::consts::PI / 360.0;
                let p = (a.cos() * 0.999_999, a.sin() * 0.999_999);
                assert!(d.contains(d.square_of(p)), "n={n} angle {a}");
            }
        }
    }

    #[test]
    fn unit_square_on_grid_lines_keeps_both_rings() {
        let sq = Shape::Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
        let d = sq.squared(2).unwrap();
        assert!(d.contains((0, 1)) && d.contains((-1, 1)));
        assert!(!d.contains((1, 1)));
    }
}
