//! Numerical verification of eigenvalue inequalities for the Laplacian with mixed
//! Dirichlet-Neumann boundary conditions on convex planar domains.
//!
//! * [`geometry`]: piecewise smooth convex boundaries with exact frames and curvature
//! * [`hypotheses`]: angle and monotonicity conditions for comparing two Dirichlet parts
//! * [`mesh`]: boundary-tagged Delaunay triangulations with grading and red refinement
//! * [`fem`]: P1 assembly, inverse power iteration and eigenvalue extrapolation
//! * [`identity`]: quadrature check of the second-derivative boundary curvature identity
//! * [`scenario`]: config-driven comparisons, sweeps and report output

// negated comparisons are used deliberately so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exec;
pub mod fem;
pub mod geometry;
pub mod hypotheses;
pub mod identity;
pub mod mesh;
pub mod quadrature;
pub mod scenario;

pub use exec::Execution;
