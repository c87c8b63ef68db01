//! Walk-based evaluation of the harmonic extension of boundary values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::condition::{transfer_condition, BoundaryCondition};
use super::domain::{Shape, SquaredDomain};
use super::region::InteriorRegion;
use crate::basis::pow2_neg;
use crate::error::{invalid, Error, Result};
use crate::planar::{first_hit_boundary, Boundary, PlanarPath};
use crate::stats::{z_value, Welford};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub n_walkers: u32,
    pub seed: u64,
    /// Hit resolution; `2^-(n+4)` when absent.
    pub eps_hit: Option<f64>,
    pub confidence: f64,
    /// First horizon; `8 diam²` of the region when absent.
    pub horizon: Option<f64>,
    /// Horizon doublings before a walker counts as lost.
    pub max_doublings: u32,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            n_walkers: 10_000,
            seed: 0,
            eps_hit: None,
            confidence: 0.99,
            horizon: None,
            max_doublings: 8,
        }
    }
}

impl WalkConfig {
    fn validate(&self) -> Result<()> {
        if self.n_walkers == 0 {
            return Err(invalid("need at least one walker"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(invalid("confidence must lie in (0, 1)"));
        }
        if self.eps_hit.is_some_and(|e| !(e > 0.0)) || self.horizon.is_some_and(|h| !(h > 0.0)) {
            return Err(invalid("eps_hit and horizon must be positive"));
        }
        Ok(())
    }
}

/// Sample mean with a normal-theory interval `z(confidence) s / sqrt(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub half_width: f64,
    pub n_samples: u64,
    pub confidence: f64,
    pub seed: u64,
    pub lost_walkers: u64,
    /// Near-boundary cells skipped at the refinement cap, summed over walkers.
    pub grazing: u64,
}

/// Where one walker left the region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exit {
    pub segment: usize,
    pub point: (f64, f64),
    pub grazing: u32,
}

/// Exit of every walker, in walker order; `None` for lost walkers.
pub fn walk_exits(region: &InteriorRegion, x: (f64, f64), cfg: &WalkConfig) -> Result<Vec<Option<Exit>>> {
    cfg.validate()?;
    if !region.contains(x) {
        return Err(Error::Domain(format!(
            "start ({}, {}) is not strictly inside the region",
            x.0, x.1
        )));
    }
    let eps = cfg.eps_hit.unwrap_or_else(|| pow2_neg(region.resolution() + 4));
    let horizon = cfg.horizon.unwrap_or_else(|| 8.0 * region.diameter().powi(2));
    (0..cfg.n_walkers)
        .into_par_iter()
        .map(|w| {
            let path = PlanarPath::sampled(cfg.seed, w, x);
            let mut t = horizon;
            for _ in 0..=cfg.max_doublings {
                match first_hit_boundary(&path, region, eps, t) {
                    Ok(Some(hit)) => {
                        return Ok(Some(Exit {
                            segment: hit.segment,
                            point: hit.point,
                            grazing: hit.grazing,
                        }))
                    }
                    Ok(None) => t *= 2.0,
                    Err(Error::EpsUnachievable { .. }) => return Ok(None),
                    Err(e) => return Err(e),
                }
            }
            Ok(None)
        })
        .collect()
}

fn estimate(exits: &[Option<Exit>], region: &InteriorRegion, psi: &[f64], cfg: &WalkConfig) -> MonteCarloEstimate {
    // sequential in walker order, so the result does not depend on scheduling
    let mut w = Welford::new();
    let mut lost = 0;
    let mut grazing = 0u64;
    for e in exits {
        match e {
            Some(e) => {
                w.push(region.value_at(psi, e.segment, e.point));
                grazing += e.grazing as u64;
            }
            None => lost += 1,
        }
    }
    MonteCarloEstimate {
        mean: w.mean,
        half_width: w.half_width(z_value(cfg.confidence)),
        n_samples: w.n,
        confidence: cfg.confidence,
        seed: cfg.seed,
        lost_walkers: lost,
        grazing,
    }
}

/// Mean boundary value at the walkers' exit points.
pub fn solve_at(region: &InteriorRegion, psi: &[f64], x: (f64, f64), cfg: &WalkConfig) -> Result<MonteCarloEstimate> {
    Ok(solve_many(region, &[psi], x, cfg)?.remove(0))
}

/// Several boundary value sets against one set of walkers.
pub fn solve_many(
    region: &InteriorRegion,
    psis: &[&[f64]],
    x: (f64, f64),
    cfg: &WalkConfig,
) -> Result<Vec<MonteCarloEstimate>> {
    for psi in psis {
        if psi.len() != region.segments().len() {
            return Err(invalid(format!(
                "{} boundary values for {} segments",
                psi.len(),
                region.segments().len()
            )));
        }
    }
    let exits = walk_exits(region, x, cfg)?;
    Ok(psis.iter().map(|psi| estimate(&exits, region, psi, cfg)).collect())
}

/// Boundary squares and values at each resolution.
pub trait DomainFamily: Sync {
    fn at(&self, n: u32) -> Result<(SquaredDomain, BoundaryCondition)>;
}

impl<F> DomainFamily for F
where
    F: Fn(u32) -> Result<(SquaredDomain, BoundaryCondition)> + Sync,
{
    fn at(&self, n: u32) -> Result<(SquaredDomain, BoundaryCondition)> {
        self(n)
    }
}

/// A built-in shape with a Lipschitz boundary function sampled at square centers.
pub struct ShapeProblem<F> {
    pub shape: Shape,
    pub phi: F,
    pub lipschitz: f64,
}

impl<F: Fn((f64, f64)) -> f64 + Sync> DomainFamily for ShapeProblem<F> {
    fn at(&self, n: u32) -> Result<(SquaredDomain, BoundaryCondition)> {
        let d = self.shape.squared(n)?;
        let bc = BoundaryCondition::sample(&d, &self.phi, self.lipschitz);
        Ok((d, bc))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineConfig {
    pub n0: u32,
    pub n_max: u32,
    pub target_err: f64,
    pub walk: WalkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub n: u32,
    pub v_n: f64,
    pub half_width: f64,
    /// `ε(n) + 2^-n`.
    pub err_budget: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub estimate: MonteCarloEstimate,
    pub resolution: u32,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// One resolution: flood fill, transfer, walk.
pub fn solve_level(
    domain: &SquaredDomain,
    bc: &BoundaryCondition,
    x: (f64, f64),
    cfg: &WalkConfig,
) -> Result<(MonteCarloEstimate, TraceEntry)> {
    let eps = bc.validate(domain)?;
    let region = InteriorRegion::flood_fill(domain, x)?;
    let psi = transfer_condition(&region, bc)?;
    let est = solve_at(&region, &psi, x, cfg)?;
    let n = domain.resolution();
    let entry = TraceEntry {
        n,
        v_n: est.mean,
        half_width: est.half_width,
        err_budget: eps + pow2_neg(n),
    };
    Ok((est, entry))
}

/// Raises the resolution until `ε(n) + 2^-n` plus the interval half-width
/// meets the target. Every level reuses the same walkers.
pub fn solve_refining(family: &dyn DomainFamily, x: (f64, f64), cfg: &RefineConfig) -> Result<Refinement> {
    if cfg.n0 > cfg.n_max {
        return Err(invalid("n0 exceeds n_max"));
    }
    if !(cfg.target_err > 0.0) {
        return Err(invalid("target error must be positive"));
    }
    let mut trace = Vec::new();
    let mut last = None;
    for n in cfg.n0..=cfg.n_max {
        let (domain, bc) = family.at(n)?;
        if domain.resolution() != n {
            return Err(Error::Domain(format!(
                "family returned resolution {} for level {n}",
                domain.resolution()
            )));
        }
        let (est, entry) = solve_level(&domain, &bc, x, &cfg.walk)?;
        trace.push(entry);
        let done = entry.err_budget + entry.half_width <= cfg.target_err;
        last = Some(est);
        if done {
            return Ok(Refinement {
                estimate: est,
                resolution: n,
                converged: true,
                trace,
            });
        }
    }
    Ok(Refinement {
        estimate: last.expect("at least one level"),
        resolution: cfg.n_max,
        converged: false,
        trace,
    })
}
