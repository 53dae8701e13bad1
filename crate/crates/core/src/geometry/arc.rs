use super::point::{Point2, RigidMotion};
use super::GeometryError;
use crate::quadrature::GaussLegendre;
use serde::{Deserialize, Serialize};

/// Unit tangent (positive orientation) and outward unit normal at a boundary point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitFrame {
    pub tau: Point2,
    pub nu: Point2,
}

impl UnitFrame {
    /// Frame with `nu = rotate(tau, -pi/2)`.
    pub fn from_tangent(tau: Point2) -> Self {
        UnitFrame { tau, nu: tau.rotate_cw() }
    }
}

/// Geometric description of one smooth boundary piece.
///
/// Every variant is traversed in the stored direction; a valid counterclockwise
/// boundary keeps the domain on the left, so `nu = rotate(tau, -pi/2)` points out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ArcKind {
    Segment {
        start: Point2,
        end: Point2,
    },
    /// Traversed from `angle_start` to `angle_end`; counterclockwise when `angle_end > angle_start`.
    CircularArc {
        center: Point2,
        radius: f64,
        angle_start: f64,
        angle_end: f64,
    },
    /// Graph `t -> (t, phi(t))` with `phi(t) = sum_k coefficients[k] t^k` on `[t_lo, t_hi]`,
    /// moved by `placement`. Traversed with increasing `t` unless `reversed`.
    GraphArc {
        coefficients: Vec<f64>,
        t_lo: f64,
        t_hi: f64,
        #[serde(default)]
        placement: RigidMotion,
        #[serde(default)]
        reversed: bool,
    },
}

const ARCLENGTH_PANELS: usize = 64;
const ARCLENGTH_POINTS: usize = 16;

/// Cumulative arclength of a graph arc at uniformly spaced `t` breakpoints.
#[derive(Clone, Debug)]
struct ArclengthTable {
    breaks: Vec<f64>,
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

/// One smooth arc of a piecewise smooth boundary, with an arclength parameterization.
#[derive(Clone, Debug)]
pub struct BoundaryArc {
    kind: ArcKind,
    length: f64,
    table: Option<ArclengthTable>,
    /// segment direction, cached so the frame is bit-for-bit constant
    seg_tau: Point2,
}

impl Serialize for BoundaryArc {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.kind.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BoundaryArc {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let kind = ArcKind::deserialize(d)?;
        BoundaryArc::new(kind).map_err(serde::de::Error::custom)
    }
}

impl BoundaryArc {
    pub fn new(kind: ArcKind) -> Result<Self, GeometryError> {
        let mut arc = BoundaryArc { kind, length: 0.0, table: None, seg_tau: Point2::default() };
        match &arc.kind {
            ArcKind::Segment { start, end } => {
                if !start.is_finite() || !end.is_finite() {
                    return Err(GeometryError::InvalidArc("non-finite segment endpoint".into()));
                }
                arc.length = start.distance(*end);
                if arc.length > 0.0 {
                    arc.seg_tau = (*end - *start) * (1.0 / arc.length);
                }
            }
            ArcKind::CircularArc { center, radius, angle_start, angle_end } => {
                if !center.is_finite() || !(radius.is_finite() && *radius > 0.0) {
                    return Err(GeometryError::InvalidArc(format!("circular arc radius {radius} must be positive")));
                }
                if !angle_start.is_finite() || !angle_end.is_finite() {
                    return Err(GeometryError::InvalidArc("non-finite arc angle".into()));
                }
                arc.length = radius * (angle_end - angle_start).abs();
            }
            ArcKind::GraphArc { coefficients, t_lo, t_hi, placement, .. } => {
                if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(GeometryError::InvalidArc("graph arc needs finite coefficients".into()));
                }
                if !(t_lo.is_finite() && t_hi.is_finite() && t_hi > t_lo) {
                    return Err(GeometryError::InvalidArc(format!("graph arc interval [{t_lo}, {t_hi}] is empty")));
                }
                if !placement.angle.is_finite() || !placement.translation.is_finite() {
                    return Err(GeometryError::InvalidArc("non-finite placement".into()));
                }
                let table = build_table(coefficients, *t_lo, *t_hi);
                arc.length = *table.cumulative.last().unwrap();
                arc.table = Some(table);
            }
        }
        if !(arc.length > 0.0) {
            return Err(GeometryError::InvalidArc("arc has zero length".into()));
        }
        Ok(arc)
    }

    pub fn segment(start: Point2, end: Point2) -> Result<Self, GeometryError> {
        Self::new(ArcKind::Segment { start, end })
    }

    pub fn circular(center: Point2, radius: f64, angle_start: f64, angle_end: f64) -> Result<Self, GeometryError> {
        Self::new(ArcKind::CircularArc { center, radius, angle_start, angle_end })
    }

    pub fn graph(coefficients: Vec<f64>, t_lo: f64, t_hi: f64, placement: RigidMotion, reversed: bool) -> Result<Self, GeometryError> {
        Self::new(ArcKind::GraphArc { coefficients, t_lo, t_hi, placement, reversed })
    }

    pub fn kind(&self) -> &ArcKind {
        &self.kind
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_segment(&self) -> bool {
        matches!(self.kind, ArcKind::Segment { .. })
    }

    pub fn start(&self) -> Point2 {
        self.point(0.0)
    }

    pub fn end(&self) -> Point2 {
        self.point(self.length)
    }

    fn check_range(&self, s: f64) -> Result<f64, GeometryError> {
        let slack = 1e-12 * self.length.max(1.0);
        if !(s >= -slack && s <= self.length + slack) {
            return Err(GeometryError::ParameterRange { s, length: self.length });
        }
        Ok(s.clamp(0.0, self.length))
    }

    pub fn point_at(&self, s: f64) -> Result<Point2, GeometryError> {
        self.check_range(s).map(|s| self.point(s))
    }

    pub fn frame_at(&self, s: f64) -> Result<UnitFrame, GeometryError> {
        self.check_range(s).map(|s| self.frame(s))
    }

    /// Signed curvature `kappa = tau' . nu`; non-positive on a convex boundary.
    pub fn curvature_at(&self, s: f64) -> Result<f64, GeometryError> {
        self.check_range(s).map(|s| self.curvature(s))
    }

    /// Point at arclength `s`, clamped to the arc.
    pub fn point(&self, s: f64) -> Point2 {
        let s = s.clamp(0.0, self.length);
        match &self.kind {
            ArcKind::Segment { start, end } => {
                let t = s / self.length;
                Point2::new((1.0 - t) * start.x + t * end.x, (1.0 - t) * start.y + t * end.y)
            }
            ArcKind::CircularArc { center, radius, .. } => {
                let th = self.circle_angle(s);
                *center + Point2::new(th.cos(), th.sin()) * *radius
            }
            ArcKind::GraphArc { coefficients, placement, .. } => {
                let t = self.graph_param(s);
                placement.apply(Point2::new(t, poly(coefficients, t).0))
            }
        }
    }

    /// Unit tangent at arclength `s`, clamped to the arc (one-sided at the ends).
    pub fn tangent(&self, s: f64) -> Point2 {
        let s = s.clamp(0.0, self.length);
        match &self.kind {
            ArcKind::Segment { .. } => self.seg_tau,
            ArcKind::CircularArc { angle_start, angle_end, .. } => {
                let th = self.circle_angle(s);
                let dir = (angle_end - angle_start).signum();
                Point2::new(-th.sin(), th.cos()) * dir
            }
            ArcKind::GraphArc { coefficients, placement, reversed, .. } => {
                let t = self.graph_param(s);
                let (_, d1, _) = poly(coefficients, t);
                let v = Point2::new(1.0, d1) * (1.0 / (1.0 + d1 * d1).sqrt());
                let v = placement.apply_vector(v);
                if *reversed {
                    -v
                } else {
                    v
                }
            }
        }
    }

    pub fn frame(&self, s: f64) -> UnitFrame {
        UnitFrame::from_tangent(self.tangent(s))
    }

    pub fn curvature(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, self.length);
        match &self.kind {
            ArcKind::Segment { .. } => 0.0,
            ArcKind::CircularArc { radius, angle_start, angle_end, .. } => -(angle_end - angle_start).signum() / radius,
            ArcKind::GraphArc { coefficients, reversed, .. } => {
                let t = self.graph_param(s);
                let (_, d1, d2) = poly(coefficients, t);
                // left-normal curvature of the graph, negated for the outward normal
                let k = -d2 / (1.0 + d1 * d1).powf(1.5);
                if *reversed {
                    -k
                } else {
                    k
                }
            }
        }
    }

    /// Integral of the curvature over the whole arc (total signed turning).
    pub fn total_turning(&self) -> f64 {
        match &self.kind {
            ArcKind::Segment { .. } => 0.0,
            ArcKind::CircularArc { .. } => self.curvature(0.0) * self.length,
            ArcKind::GraphArc { .. } => {
                let a0 = self.tangent(0.0);
                let a1 = self.tangent(self.length);
                // d(angle)/ds = -kappa for nu = rotate(tau, -pi/2)
                -a0.cross(a1).atan2(a0.dot(a1))
            }
        }
    }

    fn circle_angle(&self, s: f64) -> f64 {
        match &self.kind {
            ArcKind::CircularArc { radius, angle_start, angle_end, .. } => {
                if s >= self.length {
                    *angle_end
                } else {
                    angle_start + (angle_end - angle_start).signum() * s / radius
                }
            }
            _ => unreachable!(),
        }
    }

    /// Graph parameter `t` at traversal arclength `s`.
    fn graph_param(&self, s: f64) -> f64 {
        let ArcKind::GraphArc { coefficients, t_lo, t_hi, reversed, .. } = &self.kind else { unreachable!() };
        let table = self.table.as_ref().unwrap();
        let forward = if *reversed { self.length - s } else { s };
        if forward <= 0.0 {
            return *t_lo;
        }
        if forward >= self.length {
            return *t_hi;
        }
        let k = match table.cumulative.binary_search_by(|c| c.total_cmp(&forward)) {
            Ok(k) => return table.breaks[k],
            Err(k) => k - 1,
        };
        let (a, b) = (table.breaks[k], table.breaks[k + 1]);
        let target = forward - table.cumulative[k];
        let speed = |t: f64| {
            let d = poly(coefficients, t).1;
            (1.0 + d * d).sqrt()
        };
        let mut t = a + (b - a) * target / (table.cumulative[k + 1] - table.cumulative[k]);
        let (mut lo, mut hi) = (a, b);
        for _ in 0..60 {
            let f = table.rule.integrate(a, t, speed) - target;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let step = f / speed(t);
            let mut next = t - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
                return next;
            }
            t = next;
        }
        t
    }
}

fn build_table(coefficients: &[f64], t_lo: f64, t_hi: f64) -> ArclengthTable {
    let rule = GaussLegendre::new(ARCLENGTH_POINTS);
    let breaks: Vec<f64> = (0..=ARCLENGTH_PANELS)
        .map(|k| if k == ARCLENGTH_PANELS { t_hi } else { t_lo + (t_hi - t_lo) * k as f64 / ARCLENGTH_PANELS as f64 })
        .collect();
    let mut cumulative = Vec::with_capacity(breaks.len());
    cumulative.push(0.0);
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        acc += rule.integrate(w[0], w[1], |t| {
            let d = poly(coefficients, t).1;
            (1.0 + d * d).sqrt()
        });
        cumulative.push(acc);
    }
    ArclengthTable { breaks, cumulative, rule }
}

/// Value, first and second derivative of a polynomial (Horner).
pub(crate) fn poly(c: &[f64], t: f64) -> (f64, f64, f64) {
    let mut p = 0.0;
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &a in c.iter().rev() {
        d2 = d2 * t + 2.0 * d1;
        d1 = d1 * t + p;
        p = p * t + a;
    }
    (p, d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn horner_derivatives() {
        // 1 + 2t + 3t^2 + 4t^3 at t = 0.5
        let (p, d1, d2) = poly(&[1.0, 2.0, 3.0, 4.0], 0.5);
        assert!((p - (1.0 + 1.0 + 0.75 + 0.5)).abs() < 1e-15);
        assert!((d1 - (2.0 + 3.0 + 3.0)).abs() < 1e-15);
        assert!((d2 - (6.0 + 12.0)).abs() < 1e-15);
    }

    #[test]
    fn segment_frame_is_constant() {
        let a = BoundaryArc::segment(Point2::new(0.0, 1.0), Point2::new(0.0, 0.0)).unwrap();
        let f0 = a.frame_at(0.0).unwrap();
        let f1 = a.frame_at(0.7).unwrap();
        assert_eq!(f0, f1);
        assert_eq!(f0.tau, Point2::new(0.0, -1.0));
        assert_eq!(f0.nu, Point2::new(-1.0, 0.0));
        assert_eq!(a.curvature_at(0.3).unwrap(), 0.0);
        assert_eq!(a.end(), Point2::new(0.0, 0.0));
    }

    #[test]
    fn unit_circle_frame_and_curvature() {
        let a = BoundaryArc::circular(Point2::new(0.0, 0.0), 1.0, 0.0, PI).unwrap();
        for &t in &[0.0, 0.4, 1.3, PI] {
            let f = a.frame_at(t).unwrap();
            assert!((f.tau - Point2::new(-t.sin(), t.cos())).norm() < 1e-15);
            assert!((f.nu - Point2::new(t.cos(), t.sin())).norm() < 1e-15);
            assert_eq!(a.curvature_at(t).unwrap(), -1.0);
        }
    }

    #[test]
    fn parameter_range_error() {
        let a = BoundaryArc::segment(Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)).unwrap();
        assert!(matches!(a.frame_at(1.1), Err(GeometryError::ParameterRange { .. })));
        assert!(matches!(a.curvature_at(-0.1), Err(GeometryError::ParameterRange { .. })));
    }

    #[test]
    fn parabola_frame_curvature_and_length() {
        let a = BoundaryArc::graph(vec![0.0, 0.0, 1.0], 0.0, 1.0, RigidMotion::IDENTITY, false).unwrap();
        // closed-form arclength of t^2 on [0, 1]
        let exact = (5f64.sqrt() / 2.0) + (2.0 + 5f64.sqrt()).ln() / 4.0;
        assert!((a.length() - exact).abs() < 1e-13);
        assert_eq!(a.curvature_at(0.0).unwrap(), -2.0);
        let s = 0.6;
        let p = a.point(s);
        let t = p.x;
        let tau = a.tangent(s);
        let expect = Point2::new(1.0, 2.0 * t) * (1.0 / (1.0 + 4.0 * t * t).sqrt());
        assert!((tau - expect).norm() < 1e-14);
        assert!((p.y - t * t).abs() < 1e-15);
    }

    #[test]
    fn reversed_graph_swaps_ends_and_curvature_sign() {
        let fwd = BoundaryArc::graph(vec![1.0, -2.0, 0.5], 0.0, 1.0, RigidMotion::IDENTITY, false).unwrap();
        let rev = BoundaryArc::graph(vec![1.0, -2.0, 0.5], 0.0, 1.0, RigidMotion::IDENTITY, true).unwrap();
        assert!((fwd.start() - rev.end()).norm() < 1e-15);
        assert!((fwd.end() - rev.start()).norm() < 1e-15);
        let s = 0.3;
        assert!((fwd.curvature(s) + rev.curvature(rev.length() - s)).abs() < 1e-12);
    }

    #[test]
    fn rejects_degenerate_arcs() {
        assert!(BoundaryArc::segment(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0)).is_err());
        assert!(BoundaryArc::circular(Point2::new(0.0, 0.0), -1.0, 0.0, 1.0).is_err());
        assert!(BoundaryArc::graph(vec![0.0], 1.0, 0.0, RigidMotion::IDENTITY, false).is_err());
    }
}
