//! Planar motion under Kepler attraction inside a closed domain and a harmonic potential
//! outside it, with the two regions joined by a refraction law at the boundary.
//!
//! The crate computes arcs in both regions, the first return map on boundary data, orbits,
//! free-fall and brake orbits, closed-form stability of homothetic fixed points and
//! parameter scans.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod error;
pub mod inner;
pub mod oracle;
pub mod outer;
pub mod params;
pub mod refraction;
pub mod return_map;
pub mod roots;
pub mod scan;
pub mod selftest;
pub mod stability;

pub use boundary::{BoundaryCurve, BoundaryFrame, EllipseBoundary, PolarCurve};
pub use error::{Error, Result};
pub use params::{PhysParams, Region};
pub use refraction::IncidenceAngle;
