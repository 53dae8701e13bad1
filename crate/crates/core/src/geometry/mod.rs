//! Piecewise smooth convex planar boundaries.
//!
//! Boundaries are closed chains of [`BoundaryArc`]s traversed counterclockwise, with the
//! outward normal `nu = rotate(tau, -pi/2)` and signed curvature `kappa = tau' . nu`,
//! so that a convex boundary has `kappa <= 0` everywhere.

mod arc;
mod boundary;
mod point;

pub use arc::{ArcKind, BoundaryArc, UnitFrame};
pub use boundary::{
    BoundarySample, ClosureDefect, CornerIssue, CurvatureViolation, DomainBoundary, ValidationReport, CLOSURE_TOL, DEFAULT_SAMPLES_PER_ARC,
    DEFAULT_TOL_CURV,
};
pub use point::{Point2, RigidMotion};

pub(crate) use arc::poly;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("arclength {s} outside [0, {length}]")]
    ParameterRange { s: f64, length: f64 },
    #[error("invalid arc: {0}")]
    InvalidArc(String),
    #[error("corner index {index} out of range ({count} corners)")]
    CornerIndex { index: usize, count: usize },
    #[error("sample spacing must be positive, got {0}")]
    NonPositiveSpacing(f64),
    #[error("boundary has no arcs")]
    EmptyBoundary,
    #[error("boundary rejected: {0}")]
    Rejected(String),
}

/// Frame at arclength `s` on `arc`.
pub fn frame_at(arc: &BoundaryArc, s: f64) -> Result<UnitFrame, GeometryError> {
    arc.frame_at(s)
}

/// Signed curvature at arclength `s` on `arc`.
pub fn curvature_at(arc: &BoundaryArc, s: f64) -> Result<f64, GeometryError> {
    arc.curvature_at(s)
}
