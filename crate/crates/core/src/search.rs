//! Best-first branch and bound over dyadic time nodes.
//!
//! A node is a dyadic cell of one unit segment with exact values at both ends.
//! Between the ends the path equals the chord plus tents of level >= depth,
//! which the segment's pad bounds. Splitting a node costs one coefficient.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::basis;
use crate::family::{PathFamily, Unit};
use crate::view::PathView;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Node {
    pub seg: u64,
    pub depth: u32,
    pub idx: u64,
    pub l: f64,
    pub r: f64,
}

impl Node {
    #[inline]
    pub fn span(&self) -> (f64, f64) {
        let h = basis::pow2_neg(self.depth);
        let t0 = self.seg as f64 + self.idx as f64 * h;
        (t0, t0 + h)
    }

    /// Chord value at `u` inside the node.
    #[inline]
    pub fn chord(&self, u: f64) -> f64 {
        let (t0, t1) = self.span();
        if u <= t0 {
            self.l
        } else if u >= t1 {
            self.r
        } else {
            self.l + (self.r - self.l) * ((u - t0) / (t1 - t0))
        }
    }
}

/// Unit segments `first..first + units.len()` with their left endpoint values.
pub(crate) struct Segments<'a> {
    first: u64,
    units: Vec<Unit<'a>>,
    offsets: Vec<f64>,
    // sampled pads by depth for the family's configuration
    pads: Vec<(f64, f64)>,
    config: crate::path::PathConfig,
}

impl<'a> Segments<'a> {
    pub fn covering(fam: &'a PathFamily, ua: f64, ub: f64) -> Self {
        let first = ua.floor() as u64;
        let last = if ub > ua { (ub.ceil() as u64).max(first + 1) - 1 } else { first };
        let units: Vec<Unit<'a>> = (first..=last).map(|k| fam.unit(k)).collect();
        let offsets = (first..=last + 1).map(|k| fam.offset(k)).collect();
        let config = fam.config();
        Self {
            first,
            units,
            offsets,
            pads: config.pad_table(),
            config,
        }
    }

    pub fn roots(&self) -> impl Iterator<Item = Node> + '_ {
        (0..self.units.len()).map(move |i| Node {
            seg: self.first + i as u64,
            depth: 0,
            idx: 0,
            l: self.offsets[i],
            r: self.offsets[i + 1],
        })
    }

    #[inline]
    pub fn unit(&self, seg: u64) -> &Unit<'a> {
        &self.units[(seg - self.first) as usize]
    }

    #[inline]
    pub fn pad(&self, n: &Node) -> (f64, f64) {
        let u = self.unit(n.seg);
        match self.pads.get(n.depth as usize) {
            Some(&p) if u.is_sampled_with(&self.config) => p,
            _ => u.pad(n.depth),
        }
    }

    /// Children of `n` and the value at its midpoint.
    #[inline]
    pub fn split(&self, n: &Node) -> (Node, Node, f64) {
        let xi = self.unit(n.seg).coeff(n.depth, n.idx);
        let mid = 0.5 * (n.l + n.r) + xi * basis::peak(n.depth);
        let a = Node {
            seg: n.seg,
            depth: n.depth + 1,
            idx: 2 * n.idx,
            l: n.l,
            r: mid,
        };
        let b = Node {
            seg: n.seg,
            depth: n.depth + 1,
            idx: 2 * n.idx + 1,
            l: mid,
            r: n.r,
        };
        (a, b, mid)
    }
}

struct Queued {
    upper: f64,
    node: Node,
}

impl PartialEq for Queued {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Queued {}
impl PartialOrd for Queued {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Queued {
    fn cmp(&self, o: &Self) -> Ordering {
        self.upper
            .total_cmp(&o.upper)
            .then_with(|| o.node.seg.cmp(&self.node.seg))
            .then_with(|| o.node.depth.cmp(&self.node.depth))
            .then_with(|| o.node.idx.cmp(&self.node.idx))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    /// The gap closed or the stop rule fired.
    Done,
    /// Only nodes at the depth cap remain.
    Frozen,
}

/// Maximum of a view over `[a, b]` in view time.
pub(crate) struct MaxSearch<'a> {
    segs: Segments<'a>,
    sign: f64,
    scale: f64,
    d_lo: f64,
    d_hi: f64,
    d_fail: f64,
    ua: f64,
    ub: f64,
    alpha: f64,
    beta: f64,
    heap: BinaryHeap<Queued>,
    frozen: Vec<Node>,
    frozen_upper: f64,
    best: f64,
    best_u: f64,
    best_fail: f64,
    pruned_fail: f64,
    cap: u32,
    deepest: u32,
    pub expanded: usize,
}

impl<'a> MaxSearch<'a> {
    pub fn new(view: &'a PathView, a: f64, b: f64) -> crate::Result<Self> {
        let fam = view.family();
        let ua = view.time(a);
        let ub = view.time(b);
        let sign = view.sigma.signum();
        let mut s = Self {
            segs: Segments::covering(fam, ua, ub),
            sign,
            scale: view.sigma.abs(),
            d_lo: view.delta_lo,
            d_hi: view.delta_hi,
            d_fail: 1.0 - view.delta_conf,
            ua,
            ub,
            alpha: view.alpha,
            beta: view.beta,
            heap: BinaryHeap::new(),
            frozen: Vec::new(),
            frozen_upper: f64::NEG_INFINITY,
            best: f64::NEG_INFINITY,
            best_u: ua,
            best_fail: 0.0,
            pruned_fail: 0.0,
            cap: 0,
            deepest: 0,
            expanded: 0,
        };
        for u in [ua, ub] {
            let e = fam.point(u)?;
            let lo = if sign > 0.0 { e.lo } else { -e.hi };
            s.offer(lo, u, 1.0 - e.confidence);
        }
        let roots: Vec<Node> = s.segs.roots().collect();
        for n in roots {
            s.admit(n);
        }
        Ok(s)
    }

    #[inline]
    fn offer(&mut self, v: f64, u: f64, fail: f64) {
        if v > self.best {
            self.best = v;
            self.best_u = u;
            self.best_fail = fail;
        }
    }

    /// Scores a node against the window; resolves it at once when its pad is zero.
    fn admit(&mut self, n: Node) {
        let (t0, t1) = n.span();
        let x0 = t0.max(self.ua);
        let x1 = t1.min(self.ub);
        if !(x1 > x0) {
            return;
        }
        let (v0, v1) = (self.sign * n.chord(x0), self.sign * n.chord(x1));
        let (cm, cu) = if v0 >= v1 { (v0, x0) } else { (v1, x1) };
        let (pad, fail) = self.segs.pad(&n);
        if pad == 0.0 {
            self.offer(cm, cu, 0.0);
            return;
        }
        let upper = cm + pad;
        if upper <= self.best {
            self.pruned_fail += fail;
            return;
        }
        self.heap.push(Queued { upper, node: n });
    }

    fn raw_upper(&self) -> f64 {
        let top = self.heap.peek().map_or(f64::NEG_INFINITY, |q| q.upper);
        self.best.max(top).max(self.frozen_upper)
    }

    /// Current enclosure of the maximum, in view units.
    pub fn bounds(&self) -> (f64, f64) {
        (
            self.scale * self.best + self.d_lo,
            self.scale * self.raw_upper() + self.d_hi,
        )
    }

    /// View time of the best certified lower bound.
    pub fn best_time(&self) -> f64 {
        (self.best_u - self.beta) / self.alpha
    }

    pub fn level(&self) -> u32 {
        self.deepest.saturating_sub(1)
    }

    pub fn confidence(&self) -> f64 {
        let live: f64 = self
            .heap
            .iter()
            .map(|q| self.segs.pad(&q.node).1)
            .chain(self.frozen.iter().map(|n| self.segs.pad(n).1))
            .sum();
        (1.0 - live - self.pruned_fail - self.best_fail - self.d_fail).max(0.0)
    }

    fn set_cap(&mut self, cap: u32) {
        if cap <= self.cap {
            self.cap = cap;
            return;
        }
        self.cap = cap;
        let frozen = std::mem::take(&mut self.frozen);
        self.frozen_upper = f64::NEG_INFINITY;
        for n in frozen {
            if n.depth >= cap {
                self.frozen_upper = self.frozen_upper.max(self.upper_of(&n));
                self.frozen.push(n);
            } else {
                let upper = self.upper_of(&n);
                self.heap.push(Queued { upper, node: n });
            }
        }
    }

    fn upper_of(&self, n: &Node) -> f64 {
        let (t0, t1) = n.span();
        let x0 = t0.max(self.ua);
        let x1 = t1.min(self.ub);
        let cm = (self.sign * n.chord(x0)).max(self.sign * n.chord(x1));
        cm + self.segs.pad(n).0
    }

    /// Expands nodes down to depth `cap` until the view-unit gap is at most
    /// `eps` or `stop(lo, hi)` holds.
    pub fn run(&mut self, cap: u32, eps: f64, stop: impl Fn(f64, f64) -> bool) -> Status {
        self.set_cap(cap);
        loop {
            let (lo, hi) = self.bounds();
            if hi - lo <= eps || stop(lo, hi) {
                return Status::Done;
            }
            let Some(q) = self.heap.pop() else {
                return Status::Frozen;
            };
            if q.upper <= self.best {
                self.pruned_fail += self.segs.pad(&q.node).1;
                continue;
            }
            if q.node.depth >= self.cap {
                self.frozen_upper = self.frozen_upper.max(q.upper);
                self.frozen.push(q.node);
                continue;
            }
            self.expanded += 1;
            let (a, b, mid) = self.segs.split(&q.node);
            self.deepest = self.deepest.max(q.node.depth + 1);
            let (_, tm) = a.span();
            if tm >= self.ua && tm <= self.ub {
                self.offer(self.sign * mid, tm, 0.0);
            }
            self.admit(a);
            self.admit(b);
        }
    }
}
