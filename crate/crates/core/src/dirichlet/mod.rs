//! Dirichlet problems on regions bounded by grid squares.
//!
//! A region is the flood fill of the squares not covering the boundary; its
//! boundary edges carry the value of the boundary square beyond them. The
//! solution at a point is the mean boundary value where planar paths from
//! that point first leave the region.

mod condition;
mod domain;
mod io;
mod region;
mod solver;

pub use condition::{transfer_condition, BoundaryCondition, Epsilon};
pub use domain::{GridBox, Shape, Square, SquaredDomain};
pub use io::{BcFile, DomainFile};
pub use region::InteriorRegion;
pub use solver::{
    solve_at, solve_level, solve_many, solve_refining, walk_exits, DomainFamily, Exit,
    MonteCarloEstimate, RefineConfig, Refinement, ShapeProblem, TraceEntry, WalkConfig,
};
