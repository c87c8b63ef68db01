//! Refinable Brownian paths with certified enclosures.
//!
//! Paths are built from the tent-function series with counter-based normal
//! coefficients, so every query can refine a path lazily without changing
//! anything already computed.

pub mod analytics;
pub mod basis;
pub mod dirichlet;
pub mod error;
pub mod extrema;
pub mod family;
pub mod path;
pub mod planar;
pub mod rng;
mod search;
pub mod stats;
pub mod suites;
pub mod view;

pub use error::{Error, Result};
pub use extrema::{
    first_hit_level, first_zero, has_zero, path_max, path_min, HittingRecord, Verdict, Witness,
    ZeroDecision,
};
pub use family::{eval_extended, Continuation, PathFamily};
pub use path::{sample_path, Enclosure, PathCoefficients, PathConfig, PathDump};
pub use view::PathView;
pub use planar::{
    first_hit_boundary, first_hit_segment, first_hit_segments, Boundary, Orientation, PlanarHit,
    PlanarPath, Segment, SegmentSet,
};
