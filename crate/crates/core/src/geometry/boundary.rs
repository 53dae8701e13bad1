use super::arc::{ArcKind, BoundaryArc};
use super::point::{Point2, RigidMotion};
use super::GeometryError;
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute tolerance for consecutive arc endpoints to count as one corner.
pub const CLOSURE_TOL: f64 = 1e-12;
/// Default curvature tolerance of the convexity test.
pub const DEFAULT_TOL_CURV: f64 = 1e-10;
/// Default number of curvature samples per arc in [`DomainBoundary::validate`].
pub const DEFAULT_SAMPLES_PER_ARC: usize = 256;

/// Closed chain of arcs. Corner `i` is the start point of arc `i`, shared with the end of arc `i - 1`.
#[derive(Clone, Debug)]
pub struct DomainBoundary {
    arcs: Vec<BoundaryArc>,
    corners: Vec<Point2>,
    interior_angles: Vec<f64>,
    offsets: Vec<f64>,
}

/// One boundary sample: location, source arc and arclength on that arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySample {
    pub point: Point2,
    pub arc: usize,
    pub s: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClosureDefect {
    pub corner: usize,
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CurvatureViolation {
    pub arc: usize,
    pub s: f64,
    pub kappa: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CornerIssue {
    pub corner: usize,
    pub point: Point2,
    pub angle: f64,
}

/// Outcome of [`DomainBoundary::validate`].
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ValidationReport {
    pub accepted: bool,
    pub corner_count: usize,
    pub signed_area: f64,
    pub positively_oriented: bool,
    pub closure_defects: Vec<ClosureDefect>,
    /// worst sampled curvature per offending arc
    pub curvature_violations: Vec<CurvatureViolation>,
    pub reflex_corners: Vec<CornerIssue>,
    pub cusp_corners: Vec<CornerIssue>,
    pub samples_per_arc: usize,
    pub tol_curv: f64,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        let mut parts = Vec::new();
        if !self.closure_defects.is_empty() {
            parts.push(format!("{} closure defect(s)", self.closure_defects.len()));
        }
        if !self.positively_oriented {
            parts.push(format!("not counterclockwise (signed area {:.3e})", self.signed_area));
        }
        for v in &self.curvature_violations {
            parts.push(format!("arc {} has kappa = {:.3e} > 0 at s = {:.4}", v.arc, v.kappa, v.s));
        }
        for c in &self.reflex_corners {
            parts.push(format!("reflex corner {} at ({}, {}) with angle {:.6}", c.corner, c.point.x, c.point.y, c.angle));
        }
        for c in &self.cusp_corners {
            parts.push(format!("cusp at corner {}", c.corner));
        }
        if parts.is_empty() {
            "accepted".into()
        } else {
            parts.join("; ")
        }
    }
}

impl DomainBoundary {
    /// Builds the chain and its corner data. Closure and convexity are checked by [`Self::validate`].
    pub fn new(arcs: Vec<BoundaryArc>) -> Result<Self, GeometryError> {
        if arcs.is_empty() {
            return Err(GeometryError::EmptyBoundary);
        }
        let n = arcs.len();
        let corners: Vec<Point2> = arcs.iter().map(|a| a.start()).collect();
        let interior_angles = (0..n)
            .map(|i| {
                let incoming = arcs[(i + n - 1) % n].tangent(f64::INFINITY);
                let outgoing = arcs[i].tangent(0.0);
                let turn = incoming.cross(outgoing).atan2(incoming.dot(outgoing));
                PI - turn
            })
            .collect();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        offsets.push(0.0);
        for a in &arcs {
            acc += a.length();
            offsets.push(acc);
        }
        Ok(DomainBoundary { arcs, corners, interior_angles, offsets })
    }

    /// Closed polygon through `vertices`, listed counterclockwise.
    pub fn polygon(vertices: &[Point2]) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidArc("polygon needs at least three vertices".into()));
        }
        let arcs = (0..n).map(|i| BoundaryArc::segment(vertices[i], vertices[(i + 1) % n])).collect::<Result<Vec<_>, _>>()?;
        Self::new(arcs)
    }

    pub fn arcs(&self) -> &[BoundaryArc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &BoundaryArc {
        &self.arcs[id]
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn corners(&self) -> &[Point2] {
        &self.corners
    }

    pub fn interior_angles(&self) -> &[f64] {
        &self.interior_angles
    }

    pub fn perimeter(&self) -> f64 {
        *self.offsets.last().unwrap()
    }

    /// Arclength position of the start of each arc along the whole boundary.
    pub fn arc_offsets(&self) -> &[f64] {
        &self.offsets[..self.arcs.len()]
    }

    /// Interior angle at corner `corner_index`, in `(0, pi]` for a convex boundary.
    pub fn interior_angle(&self, corner_index: usize) -> Result<f64, GeometryError> {
        self.interior_angles.get(corner_index).copied().ok_or(GeometryError::CornerIndex { index: corner_index, count: self.corners.len() })
    }

    /// Smallest interior angle over all corners that are genuine (angle below pi).
    pub fn min_corner_angle(&self) -> f64 {
        self.interior_angles.iter().copied().fold(PI, f64::min)
    }

    /// Signed enclosed area from the exact arc parameterizations.
    pub fn signed_area(&self) -> f64 {
        let rule = GaussLegendre::new(12);
        let mut area = 0.0;
        for arc in &self.arcs {
            let panels = match arc.kind() {
                ArcKind::Segment { .. } => 1,
                _ => 32,
            };
            let len = arc.length();
            for k in 0..panels {
                let a = len * k as f64 / panels as f64;
                let b = len * (k + 1) as f64 / panels as f64;
                area += rule.integrate(a, b, |s| {
                    let p = arc.point(s);
                    let t = arc.tangent(s);
                    p.cross(t)
                });
            }
        }
        0.5 * area
    }

    /// Largest distance between boundary points (estimated from a fine sampling).
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Point2> = self.arcs.iter().flat_map(|a| (0..64).map(move |k| a.point(a.length() * k as f64 / 64.0))).collect();
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                d = d.max(pts[i].distance(pts[j]));
            }
        }
        d
    }

    pub fn validate(&self) -> ValidationReport {
        self.validate_with(DEFAULT_SAMPLES_PER_ARC, DEFAULT_TOL_CURV)
    }

    pub fn validate_with(&self, samples_per_arc: usize, tol_curv: f64) -> ValidationReport {
        let n = self.arcs.len();
        let mut closure_defects = Vec::new();
        for i in 0..n {
            let gap = self.arcs[(i + n - 1) % n].end().distance(self.arcs[i].start());
            if !(gap <= CLOSURE_TOL) {
                closure_defects.push(ClosureDefect { corner: i, gap });
            }
        }
        let signed_area = self.signed_area();
        let positively_oriented = signed_area > 0.0;

        let mut curvature_violations = Vec::new();
        let m = samples_per_arc.max(2);
        for (id, arc) in self.arcs.iter().enumerate() {
            if arc.is_segment() {
                continue;
            }
            let mut worst: Option<CurvatureViolation> = None;
            for k in 0..m {
                let s = arc.length() * k as f64 / (m - 1) as f64;
                let kappa = arc.curvature(s);
                if kappa > tol_curv && worst.as_ref().is_none_or(|w| kappa > w.kappa) {
                    worst = Some(CurvatureViolation { arc: id, s, kappa });
                }
            }
            curvature_violations.extend(worst);
        }

        let mut reflex_corners = Vec::new();
        let mut cusp_corners = Vec::new();
        for (i, &angle) in self.interior_angles.iter().enumerate() {
            let issue = CornerIssue { corner: i, point: self.corners[i], angle };
            if angle > PI + 1e-12 {
                reflex_corners.push(issue);
            } else if angle <= 1e-12 {
                cusp_corners.push(issue);
            }
        }
        let accepted = closure_defects.is_empty()
            && positively_oriented
            && curvature_violations.is_empty()
            && reflex_corners.is_empty()
            && cusp_corners.is_empty();
        ValidationReport {
            accepted,
            corner_count: n,
            signed_area,
            positively_oriented,
            closure_defects,
            curvature_violations,
            reflex_corners,
            cusp_corners,
            samples_per_arc: m,
            tol_curv,
        }
    }

    /// Error unless [`Self::validate`] accepts the boundary.
    pub fn ensure_valid(&self) -> Result<(), GeometryError> {
        let report = self.validate();
        if report.accepted {
            Ok(())
        } else {
            Err(GeometryError::Rejected(report.summary()))
        }
    }

    /// Samples in positive orientation with spacing at most `h`; each corner appears exactly once.
    pub fn boundary_samples(&self, h: f64) -> Result<Vec<BoundarySample>, GeometryError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(GeometryError::NonPositiveSpacing(h));
        }
        let mut out = Vec::new();
        for (id, arc) in self.arcs.iter().enumerate() {
            let len = arc.length();
            let n = ((len / h) - 1e-9).ceil().max(1.0) as usize;
            for k in 0..n {
                let s = len * k as f64 / n as f64;
                out.push(BoundarySample { point: arc.point(s), arc: id, s });
            }
        }
        Ok(out)
    }

    /// Samples whose spacing follows the local target `size` (never above `h_max`).
    pub fn graded_samples<F: Fn(Point2) -> f64>(&self, h_max: f64, size: F) -> Result<Vec<BoundarySample>, GeometryError> {
        if !(h_max > 0.0) || !h_max.is_finite() {
            return Err(GeometryError::NonPositiveSpacing(h_max));
        }
        let mut out = Vec::new();
        for (id, arc) in self.arcs.iter().enumerate() {
            let len = arc.length();
            // cumulative element count N(s) = int ds / size on a fine grid
            let mut grid = vec![0.0];
            let mut counts = vec![0.0];
            let mut s = 0.0;
            while s < len {
                let local = size(arc.point(s)).min(h_max);
                let ds = (local / 8.0).min(len - s).max(len * 1e-9);
                let mid = size(arc.point(s + 0.5 * ds)).min(h_max);
                s = (s + ds).min(len);
                grid.push(s);
                counts.push(counts.last().unwrap() + ds / mid);
            }
            let total = *counts.last().unwrap();
            let n = (total - 1e-9).ceil().max(((len / h_max) - 1e-9).ceil()).max(1.0) as usize;
            let mut j = 0;
            for k in 0..n {
                let target = total * k as f64 / n as f64;
                while j + 1 < counts.len() && counts[j + 1] < target {
                    j += 1;
                }
                let s = if k == 0 {
                    0.0
                } else {
                    let (c0, c1) = (counts[j], counts[j + 1]);
                    let w = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.0 };
                    grid[j] + w * (grid[j + 1] - grid[j])
                };
                out.push(BoundarySample { point: arc.point(s), arc: id, s });
            }
        }
        Ok(out)
    }

    /// Image of the boundary under a rigid motion.
    pub fn transformed(&self, motion: &RigidMotion) -> Result<Self, GeometryError> {
        let arcs = self.arcs.iter().map(|a| transform_arc(a, motion, 1.0)).collect::<Result<Vec<_>, _>>()?;
        Self::new(arcs)
    }

    /// Image of the boundary under `x -> c x`.
    pub fn scaled(&self, c: f64) -> Result<Self, GeometryError> {
        let arcs = self.arcs.iter().map(|a| transform_arc(a, &RigidMotion::IDENTITY, c)).collect::<Result<Vec<_>, _>>()?;
        Self::new(arcs)
    }
}

/// `x -> motion(c x)` applied to one arc.
fn transform_arc(arc: &BoundaryArc, motion: &RigidMotion, c: f64) -> Result<BoundaryArc, GeometryError> {
    let kind = match arc.kind().clone() {
        ArcKind::Segment { start, end } => ArcKind::Segment { start: motion.apply(start * c), end: motion.apply(end * c) },
        ArcKind::CircularArc { center, radius, angle_start, angle_end } => ArcKind::CircularArc {
            center: motion.apply(center * c),
            radius: radius * c,
            angle_start: angle_start + motion.angle,
            angle_end: angle_end + motion.angle,
        },
        ArcKind::GraphArc { coefficients, t_lo, t_hi, placement, reversed } => {
            // c * (t, phi(t)) = (t', c phi(t'/c)) with t' = c t
            let coefficients = coefficients.iter().enumerate().map(|(k, a)| a * c.powi(1 - k as i32)).collect();
            let scaled = RigidMotion::new(placement.angle, placement.translation * c);
            ArcKind::GraphArc { coefficients, t_lo: t_lo * c, t_hi: t_hi * c, placement: motion.compose(&scaled), reversed }
        }
    };
    BoundaryArc::new(kind)
}
