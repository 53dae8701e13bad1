//! Curvature integral identity for functions with a pure Dirichlet or pure Neumann condition on
//! every smooth arc:
//!
//! `int (d11 u)(d22 u) = int (d12 u)^2 - 1/2 int_boundary kappa |grad u|^2`.
//!
//! Domain integrals use a mesh whose cells adjacent to curved arcs are integrated over the exact
//! curved region (fans from an apex over the arc piece); boundary integrals use Gauss-Legendre
//! panels on the exact arc parameterizations.

mod function;

pub use function::{Factor, Jet, ManufacturedFunction, Term};

use crate::exec::Execution;
use crate::geometry::{BoundaryArc, DomainBoundary, Point2};
use crate::mesh::{self, Mesh, MeshError};
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const MEMBERSHIP_SAMPLES: usize = 64;
pub const MEMBERSHIP_TOL: f64 = 1e-10;
pub const DEFAULT_BOUNDARY_H: f64 = 0.01;
pub const MIN_QUAD_ORDER: usize = 2;
pub const MAX_QUAD_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdentityError {
    #[error("quadrature order {0} unsupported (use 2..=12)")]
    UnsupportedOrder(usize),
    #[error("need one label per arc: {arcs} arcs, {labels} labels")]
    LabelCount { arcs: usize, labels: usize },
    #[error("boundary panel length must be positive, got {0}")]
    BadPanel(f64),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ArcLabel {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcMembership {
    pub arc: usize,
    pub label: ArcLabel,
    /// largest `|u|` (Dirichlet) or `|nu . grad u|` (Neumann) over the samples
    pub max_violation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub arcs: Vec<ArcMembership>,
    pub pass: bool,
}

/// Samples the boundary condition of each arc at 64 equally spaced points, ends included.
pub fn check_membership(
    boundary: &DomainBoundary,
    labels: &[ArcLabel],
    f: &ManufacturedFunction,
) -> Result<MembershipReport, IdentityError> {
    if labels.len() != boundary.arc_count() {
        return Err(IdentityError::LabelCount { arcs: boundary.arc_count(), labels: labels.len() });
    }
    let arcs: Vec<ArcMembership> = boundary
        .arcs()
        .iter()
        .zip(labels)
        .enumerate()
        .map(|(id, (arc, &label))| {
            let max_violation = (0..MEMBERSHIP_SAMPLES)
                .map(|k| {
                    let s = arc.length() * k as f64 / (MEMBERSHIP_SAMPLES - 1) as f64;
                    let jet = f.jet(arc.point(s));
                    match label {
                        ArcLabel::Dirichlet => jet.u.abs(),
                        ArcLabel::Neumann => arc.frame(s).nu.dot(jet.grad()).abs(),
                    }
                })
                .fold(0.0, f64::max);
            ArcMembership { arc: id, label, max_violation, pass: max_violation <= MEMBERSHIP_TOL }
        })
        .collect();
    let pass = arcs.iter().all(|a| a.pass);
    Ok(MembershipReport { arcs, pass })
}

/// How mesh cells next to curved arcs are integrated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellGeometry {
    /// exact curved cells
    #[default]
    Exact,
    /// straight triangles (inscribed polygon)
    Polygonal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityOptions {
    pub quad_order: usize,
    /// mesh size for the domain integrals; `None` picks `min(0.1, diameter / 4)`
    #[serde(default)]
    pub mesh_h: Option<f64>,
    /// longest boundary panel
    pub boundary_h: f64,
    #[serde(default)]
    pub geometry: CellGeometry,
    #[serde(default)]
    pub execution: Execution,
}

impl IdentityOptions {
    pub fn new(quad_order: usize) -> Self {
        IdentityOptions {
            quad_order,
            mesh_h: None,
            boundary_h: DEFAULT_BOUNDARY_H,
            geometry: CellGeometry::Exact,
            execution: Execution::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityBreakdown {
    /// `int (d11 u)(d22 u)`
    pub term_mixed: f64,
    /// `int (d12 u)^2`
    pub term_cross: f64,
    /// `int_boundary kappa |grad u|^2`
    pub term_curv: f64,
    /// `term_mixed - term_cross + term_curv / 2`
    pub residual: f64,
    pub quad_order: usize,
    pub cells: usize,
    pub geometry: CellGeometry,
}

/// Identity terms with default options at the given quadrature order.
pub fn identity_residual(
    boundary: &DomainBoundary,
    f: &ManufacturedFunction,
    quad_order: usize,
) -> Result<IdentityBreakdown, IdentityError> {
    identity_residual_with(boundary, f, &IdentityOptions::new(quad_order))
}

pub fn identity_residual_with(
    boundary: &DomainBoundary,
    f: &ManufacturedFunction,
    opts: &IdentityOptions,
) -> Result<IdentityBreakdown, IdentityError> {
    if !(MIN_QUAD_ORDER..=MAX_QUAD_ORDER).contains(&opts.quad_order) {
        return Err(IdentityError::UnsupportedOrder(opts.quad_order));
    }
    let h = opts.mesh_h.unwrap_or_else(|| (boundary.diameter() / 4.0).min(0.1));
    let mesh = mesh::generate(boundary, h, None)?;
    identity_on_mesh(boundary, &mesh, f, opts)
}

/// Identity terms with domain integrals over the cells of `mesh`.
pub fn identity_on_mesh(
    boundary: &DomainBoundary,
    mesh: &Mesh,
    f: &ManufacturedFunction,
    opts: &IdentityOptions,
) -> Result<IdentityBreakdown, IdentityError> {
    if !(MIN_QUAD_ORDER..=MAX_QUAD_ORDER).contains(&opts.quad_order) {
        return Err(IdentityError::UnsupportedOrder(opts.quad_order));
    }
    if !(opts.boundary_h > 0.0) {
        return Err(IdentityError::BadPanel(opts.boundary_h));
    }
    // collapsed rule: the fan Jacobian adds one degree in the radial direction
    let rule = GaussLegendre::new((opts.quad_order + 2).div_ceil(2));
    let curved: HashMap<(usize, usize), (usize, f64, f64)> = match opts.geometry {
        CellGeometry::Polygonal => HashMap::new(),
        CellGeometry::Exact => {
            mesh.boundary_edges.iter().filter(|e| !boundary.arc(e.arc).is_segment()).map(|e| ((e.a, e.b), (e.arc, e.s_a, e.s_b))).collect()
        }
    };
    let per_cell = opts.execution.map_range(mesh.triangles.len(), |t| {
        let v = mesh.triangles[t];
        let pts = mesh.triangle_points(t);
        let pieces: Vec<Piece> = (0..3)
            .map(|i| match curved.get(&(v[i], v[(i + 1) % 3])) {
                Some(&(arc, s0, s1)) => Piece::Arc { arc: boundary.arc(arc), s0, s1 },
                None => Piece::Line { a: pts[i], b: pts[(i + 1) % 3] },
            })
            .collect();
        let n_curved = pieces.iter().filter(|p| matches!(p, Piece::Arc { .. })).count();
        let mut acc = [0.0; 2];
        let mut add = |apex: Point2, piece: &Piece| {
            let r = fan_integral(apex, piece, &rule, f);
            acc[0] += r[0];
            acc[1] += r[1];
        };
        match n_curved {
            0 => add(pts[0], &pieces[1]),
            1 => {
                let i = pieces.iter().position(|p| matches!(p, Piece::Arc { .. })).unwrap();
                add(pts[(i + 2) % 3], &pieces[i]);
            }
            _ => {
                let c = (pts[0] + pts[1] + pts[2]) * (1.0 / 3.0);
                for p in &pieces {
                    add(c, p);
                }
            }
        }
        acc
    });
    let (term_mixed, term_cross) = per_cell.iter().fold((0.0, 0.0), |(m, c), r| (m + r[0], c + r[1]));
    let term_curv = boundary_curvature_term(boundary, f, opts.quad_order, opts.boundary_h);
    Ok(IdentityBreakdown {
        term_mixed,
        term_cross,
        term_curv,
        residual: term_mixed - term_cross + 0.5 * term_curv,
        quad_order: opts.quad_order,
        cells: mesh.triangles.len(),
        geometry: opts.geometry,
    })
}

enum Piece<'a> {
    Line { a: Point2, b: Point2 },
    Arc { arc: &'a BoundaryArc, s0: f64, s1: f64 },
}

/// `[int d11u d22u, int d12u^2]` over the fan `{apex + r (gamma(sigma) - apex)}`.
fn fan_integral(apex: Point2, piece: &Piece, rule: &GaussLegendre, f: &ManufacturedFunction) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (&v, &wv) in rule.nodes.iter().zip(&rule.weights) {
        let (g, dg) = match piece {
            Piece::Line { a, b } => (*a + (*b - *a) * v, *b - *a),
            Piece::Arc { arc, s0, s1 } => {
                let s = s0 + v * (s1 - s0);
                (arc.point(s), arc.tangent(s) * (s1 - s0))
            }
        };
        let spoke = g - apex;
        let jac = spoke.cross(dg);
        for (&u, &wu) in rule.nodes.iter().zip(&rule.weights) {
            let j = f.jet(apex + spoke * u);
            let w = wv * wu * u * jac;
            out[0] += w * j.uxx * j.uyy;
            out[1] += w * j.uxy * j.uxy;
        }
    }
    out
}

/// `int_boundary kappa |grad u|^2` with Gauss-Legendre panels no longer than `panel`.
fn boundary_curvature_term(boundary: &DomainBoundary, f: &ManufacturedFunction, quad_order: usize, panel: f64) -> f64 {
    let rule = GaussLegendre::new(quad_order.max(2));
    let mut total = 0.0;
    for arc in boundary.arcs().iter().filter(|a| !a.is_segment()) {
        let n = (arc.length() / panel).ceil().max(1.0) as usize;
        let ds = arc.length() / n as f64;
        for k in 0..n {
            total += rule.integrate(k as f64 * ds, (k + 1) as f64 * ds, |s| {
                let g = f.gradient(arc.point(s));
                arc.curvature(s) * g.dot(g)
            });
        }
    }
    total
}
