//! JSON domain files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::condition::{BoundaryCondition, Epsilon};
use super::domain::SquaredDomain;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainFile {
    pub resolution: u32,
    pub boundary_squares: Vec<[i64; 2]>,
    pub bc: BcFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcFile {
    /// `[i, j, value]` per boundary square.
    pub values: Vec<(i64, i64, f64)>,
    /// `[n, epsilon]` per resolution.
    pub epsilon: Vec<(u32, f64)>,
}

impl DomainFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Domain(format!("malformed domain file: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn build(&self) -> Result<(SquaredDomain, BoundaryCondition)> {
        let domain = SquaredDomain::new(self.resolution, self.boundary_squares.iter().map(|s| (s[0], s[1])))?;
        let mut values = BTreeMap::new();
        for &(i, j, v) in &self.bc.values {
            if !v.is_finite() {
                return Err(Error::Domain(format!("value at ({i}, {j}) is not finite")));
            }
            if values.insert((i, j), v).is_some() {
                return Err(Error::Domain(format!("square ({i}, {j}) has two values")));
            }
        }
        let mut eps = BTreeMap::new();
        for &(n, e) in &self.bc.epsilon {
            if !(e >= 0.0) {
                return Err(Error::Domain(format!("epsilon for n={n} must be non-negative")));
            }
            eps.insert(n, e);
        }
        Ok((domain, BoundaryCondition::new(values, Epsilon::Table(eps))))
    }

    /// File form of a domain and condition, with `ε` tabulated at the domain's resolution.
    pub fn from_parts(domain: &SquaredDomain, bc: &BoundaryCondition) -> Result<Self> {
        let n = domain.resolution();
        let eps = bc
            .epsilon()
            .at(n)
            .ok_or_else(|| Error::Domain(format!("no epsilon given for resolution {n}")))?;
        Ok(Self {
            resolution: n,
            boundary_squares: domain.squares().iter().map(|&(i, j)| [i, j]).collect(),
            bc: BcFile {
                values: bc.values().iter().map(|(&(i, j), &v)| (i, j, v)).collect(),
                epsilon: vec![(n, eps)],
            },
        })
    }
}
