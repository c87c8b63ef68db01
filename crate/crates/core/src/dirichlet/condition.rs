//! Per-square boundary values and their continuity modulus.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::domain::{Square, SquaredDomain};
use super::region::InteriorRegion;
use crate::basis::pow2_neg;
use crate::error::{Error, Result};

/// Bound `ε(n)` on the jump between values of adjacent squares at resolution `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Epsilon {
    /// Explicit per-resolution table.
    Table(BTreeMap<u32, f64>),
    /// `L (1 + √2) 2^-n` for an `L`-Lipschitz boundary function.
    Lipschitz(f64),
}

impl Epsilon {
    pub fn at(&self, n: u32) -> Option<f64> {
        match self {
            Epsilon::Table(t) => t.get(&n).copied(),
            Epsilon::Lipschitz(l) => Some(l * (1.0 + std::f64::consts::SQRT_2) * pow2_neg(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCondition {
    values: BTreeMap<Square, f64>,
    epsilon: Epsilon,
}

impl BoundaryCondition {
    pub fn new(values: BTreeMap<Square, f64>, epsilon: Epsilon) -> Self {
        Self { values, epsilon }
    }

    /// `phi` sampled at the center of every boundary square.
    pub fn sample(domain: &SquaredDomain, phi: impl Fn((f64, f64)) -> f64, lipschitz: f64) -> Self {
        let values = domain.squares().iter().map(|&s| (s, phi(domain.center(s)))).collect();
        Self::new(values, Epsilon::Lipschitz(lipschitz))
    }

    pub fn value(&self, s: Square) -> Option<f64> {
        self.values.get(&s).copied()
    }

    pub fn values(&self) -> &BTreeMap<Square, f64> {
        &self.values
    }

    pub fn epsilon(&self) -> &Epsilon {
        &self.epsilon
    }

    /// Checks that edge-adjacent boundary squares differ by at most `ε(n)`.
    ///
    /// Only continuity can be checked; closeness to an underlying boundary
    /// function is taken on trust.
    pub fn validate(&self, domain: &SquaredDomain) -> Result<f64> {
        let n = domain.resolution();
        let eps = self
            .epsilon
            .at(n)
            .ok_or_else(|| Error::Domain(format!("no epsilon given for resolution {n}")))?;
        for &(i, j) in domain.squares() {
            let Some(v) = self.value((i, j)) else { continue };
            for s in [(i + 1, j), (i, j + 1)] {
                if let Some(w) = self.value(s) {
                    if (v - w).abs() > eps * (1.0 + 1e-12) {
                        return Err(Error::Domain(format!(
                            "squares {:?} and {s:?} differ by {} > epsilon {eps}",
                            (i, j),
                            (v - w).abs()
                        )));
                    }
                }
            }
        }
        Ok(eps)
    }
}

/// Value on each boundary segment: that of the boundary square it belongs to.
pub fn transfer_condition(region: &InteriorRegion, bc: &BoundaryCondition) -> Result<Vec<f64>> {
    region
        .owners()
        .iter()
        .map(|&(i, j)| bc.value((i, j)).ok_or(Error::MissingBoundaryValue(i, j)))
        .collect()
}
