//! Boundary-tagged triangulations of convex domains.
//!
//! [`generate`] triangulates the boundary samples and refines by Delaunay refinement until every
//! triangle meets the size target and the angle target; [`refine`] splits every triangle into four,
//! snapping new boundary vertices onto the true arcs.

mod delaunay;

use crate::geometry::{DomainBoundary, GeometryError, Point2};
use delaunay::{Kernel, RefineParams};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{self, Write};
use thiserror::Error;

/// Target smallest angle of generated meshes, degrees.
pub const QUALITY_FLOOR_DEG: f64 = 20.0;
pub const DEFAULT_GRADING_FACTOR: f64 = 0.15;
pub const DEFAULT_GRADING_LEVELS: u32 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("mesh size {h} exceeds the domain diameter {diameter}")]
    SizeTooLarge { h: f64, diameter: f64 },
    #[error("grading factor {0} must lie in (0, 1)")]
    BadGradingFactor(f64),
    #[error("grading corner {index} out of range ({count} corners)")]
    BadGradingCorner { index: usize, count: usize },
    #[error("quality floor {floor_deg:.2} deg unmet: worst triangle {triangle} has smallest angle {angle_deg:.3} deg")]
    QualityFloor { floor_deg: f64, triangle: usize, angle_deg: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Geometric grading toward selected corners: spacing shrinks to `factor^levels * h` at the corner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grading {
    pub corners: Vec<usize>,
    pub factor: f64,
    pub levels: u32,
}

impl Grading {
    pub fn new(corners: Vec<usize>) -> Self {
        Grading { corners, factor: DEFAULT_GRADING_FACTOR, levels: DEFAULT_GRADING_LEVELS }
    }

    pub fn min_ratio(&self) -> f64 {
        self.factor.powi(self.levels as i32)
    }
}

/// Local target edge length: `h` away from graded corners, proportional to the distance near them.
#[derive(Clone, Debug)]
pub struct SizeField {
    h: f64,
    min_ratio: f64,
    corners: Vec<Point2>,
}

impl SizeField {
    pub fn new(boundary: &DomainBoundary, h: f64, grading: Option<&Grading>) -> Self {
        match grading {
            None => SizeField { h, min_ratio: 1.0, corners: Vec::new() },
            Some(g) => SizeField { h, min_ratio: g.min_ratio(), corners: g.corners.iter().map(|&c| boundary.corners()[c]).collect() },
        }
    }

    pub fn at(&self, x: Point2) -> f64 {
        if self.corners.is_empty() {
            return self.h;
        }
        let d = self.corners.iter().map(|c| c.distance(x)).fold(f64::INFINITY, f64::min);
        self.h * (d / (2.0 * self.h)).clamp(self.min_ratio, 1.0)
    }
}

/// A directed boundary edge `a -> b` on arc `arc`, with arclength parameters of both ends.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub arc: usize,
    pub s_a: f64,
    pub s_b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    /// degrees
    pub min_angle: f64,
    /// largest circumradius over twice the inradius (1 for equilateral)
    pub max_aspect: f64,
    pub h_min: f64,
    pub h_max: f64,
}

/// Conforming triangulation with boundary edges traced back to their arcs.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    /// counterclockwise vertex triples
    pub triangles: Vec<[usize; 3]>,
    /// closed counterclockwise cycle starting at the first corner
    pub boundary_edges: Vec<BoundaryEdge>,
    /// longest edge
    pub h: f64,
    /// requested size of the coarsest level, halved by every refinement
    pub h_nominal: f64,
    pub level: u32,
    pub grading: Option<Grading>,
    /// for vertices created by the last refinement: end points of the split edge
    pub parent_edges: Vec<[usize; 2]>,
    /// smallest angle the generator guaranteed, degrees
    pub quality_floor: f64,
}

/// Smallest-angle floor for a domain: 20 degrees, relaxed to half the smallest corner angle.
pub fn quality_floor_for(boundary: &DomainBoundary) -> f64 {
    QUALITY_FLOOR_DEG.min(0.5 * boundary.min_corner_angle().to_degrees())
}

pub fn generate(boundary: &DomainBoundary, h: f64, grading: Option<&Grading>) -> Result<Mesh, MeshError> {
    boundary.ensure_valid()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(GeometryError::NonPositiveSpacing(h).into());
    }
    let diameter = boundary.diameter();
    if h > diameter {
        return Err(MeshError::SizeTooLarge { h, diameter });
    }
    if let Some(g) = grading {
        if !(g.factor > 0.0 && g.factor < 1.0) {
            return Err(MeshError::BadGradingFactor(g.factor));
        }
        let count = boundary.corners().len();
        if let Some(&index) = g.corners.iter().find(|&&c| c >= count) {
            return Err(MeshError::BadGradingCorner { index, count });
        }
    }
    let field = SizeField::new(boundary, h, grading);
    let samples = match grading {
        Some(_) => boundary.graded_samples(h, |x| field.at(x))?,
        None => boundary.boundary_samples(h)?,
    };
    let pts: Vec<Point2> = samples.iter().map(|s| s.point).collect();
    let arcs: Vec<usize> = samples.iter().map(|s| s.arc).collect();
    let params: Vec<f64> = samples.iter().map(|s| s.s).collect();
    // sample index of each corner (first sample of each arc)
    let mut corner_vertex = Vec::new();
    for (k, s) in samples.iter().enumerate() {
        if s.s == 0.0 {
            corner_vertex.push(k as u32);
        }
    }
    let angles = boundary.interior_angles();
    let small_corners: Vec<u32> = corner_vertex.iter().zip(angles).filter(|(_, a)| a.to_degrees() < 60.0).map(|(v, _)| *v).collect();
    let floor = quality_floor_for(boundary);
    // aim slightly above the floor so refinement settles before reaching it
    let target = (floor + 0.7).min(20.7).to_radians();
    let area = boundary.signed_area();
    let smallest = h * grading.map_or(1.0, |g| g.min_ratio());
    let estimate = (area / (smallest * smallest)).min(1e7) as usize;
    let size = |x: Point2| field.at(x);
    let params_r = RefineParams {
        size: &size,
        ratio_bound: 1.0 / (2.0 * target.sin()),
        small_corners,
        shell_unit: smallest,
        max_vertices: 50 * (estimate + pts.len()) + 10_000,
    };
    let mut kernel = Kernel::from_boundary(boundary, pts, &arcs, &params);
    kernel.refine(&params_r);
    let mesh = assemble_mesh(&kernel, h, grading.cloned(), floor);
    if let Some((triangle, angle_deg)) = mesh.worst_triangle() {
        if angle_deg < floor - 1e-9 {
            return Err(MeshError::QualityFloor { floor_deg: floor, triangle, angle_deg });
        }
    }
    Ok(mesh)
}

fn assemble_mesh(kernel: &Kernel, h_nominal: f64, grading: Option<Grading>, floor: f64) -> Mesh {
    let vertices = kernel.pts.clone();
    let triangles: Vec<[usize; 3]> = kernel.triangles().iter().map(|t| [t[0] as usize, t[1] as usize, t[2] as usize]).collect();
    let mut next: HashMap<usize, BoundaryEdge> = HashMap::new();
    for (&(a, b), seg) in &kernel.segs {
        let e = BoundaryEdge { a: a as usize, b: b as usize, arc: seg.arc, s_a: seg.s0, s_b: seg.s1 };
        next.insert(a as usize, e);
    }
    let mut boundary_edges = Vec::with_capacity(next.len());
    let mut v = 0;
    while boundary_edges.len() < next.len() {
        let e = next[&v];
        boundary_edges.push(e);
        v = e.b;
    }
    let mut mesh =
        Mesh { vertices, triangles, boundary_edges, h: 0.0, h_nominal, level: 0, grading, parent_edges: Vec::new(), quality_floor: floor };
    mesh.h = mesh.quality().h_max;
    mesh
}

/// Red refinement: every triangle into four; boundary midpoints are placed on the true arcs.
pub fn refine(mesh: &Mesh, boundary: &DomainBoundary) -> Mesh {
    let mut vertices = mesh.vertices.clone();
    let mut parent_edges = Vec::new();
    let mut on_boundary: HashMap<(usize, usize), BoundaryEdge> = HashMap::new();
    for e in &mesh.boundary_edges {
        on_boundary.insert((e.a, e.b), *e);
    }
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = mid.get(&key) {
            return m;
        }
        let p = match on_boundary.get(&(a, b)) {
            Some(e) => boundary.arc(e.arc).point(0.5 * (e.s_a + e.s_b)),
            None => vertices[a].midpoint(vertices[b]),
        };
        vertices.push(p);
        parent_edges.push([key.0, key.1]);
        mid.insert(key, vertices.len() - 1);
        vertices.len() - 1
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices);
        let bc = midpoint(b, c, &mut vertices);
        let ca = midpoint(c, a, &mut vertices);
        triangles.push([a, ab, ca]);
        triangles.push([ab, b, bc]);
        triangles.push([ca, bc, c]);
        triangles.push([ab, bc, ca]);
    }
    let mut boundary_edges = Vec::with_capacity(2 * mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let m = mid[&(e.a.min(e.b), e.a.max(e.b))];
        let s = 0.5 * (e.s_a + e.s_b);
        boundary_edges.push(BoundaryEdge { a: e.a, b: m, arc: e.arc, s_a: e.s_a, s_b: s });
        boundary_edges.push(BoundaryEdge { a: m, b: e.b, arc: e.arc, s_a: s, s_b: e.s_b });
    }
    let mut out = Mesh {
        vertices,
        triangles,
        boundary_edges,
        h: 0.0,
        h_nominal: 0.5 * mesh.h_nominal,
        level: mesh.level + 1,
        grading: mesh.grading.clone(),
        parent_edges,
        quality_floor: mesh.quality_floor,
    };
    out.h = out.quality().h_max;
    out
}

/// Levels `0..levels` starting from a generated mesh.
pub fn hierarchy(boundary: &DomainBoundary, h0: f64, grading: Option<&Grading>, levels: usize) -> Result<Vec<Mesh>, MeshError> {
    let mut out = vec![generate(boundary, h0, grading)?];
    for _ in 1..levels {
        let next = refine(out.last().unwrap(), boundary);
        out.push(next);
    }
    Ok(out)
}

fn corner_angles(p: [Point2; 3]) -> [f64; 3] {
    let ang = |o: Point2, q: Point2, r: Point2| {
        let (u, v) = (q - o, r - o);
        u.cross(v).abs().atan2(u.dot(v))
    };
    [ang(p[0], p[1], p[2]), ang(p[1], p[2], p[0]), ang(p[2], p[0], p[1])]
}

impl Mesh {
    /// Mesh from raw parts; `h` is recomputed.
    pub fn from_parts(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>, boundary_edges: Vec<BoundaryEdge>) -> Self {
        let mut m = Mesh {
            vertices,
            triangles,
            boundary_edges,
            h: 0.0,
            h_nominal: 0.0,
            level: 0,
            grading: None,
            parent_edges: Vec::new(),
            quality_floor: 0.0,
        };
        m.h = m.quality().h_max;
        m.h_nominal = m.h;
        m
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn signed_area_of(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.signed_area_of(t)).sum()
    }

    /// Area of the polygon traced by the boundary edges.
    pub fn boundary_polygon_area(&self) -> f64 {
        0.5 * self.boundary_edges.iter().map(|e| self.vertices[e.a].cross(self.vertices[e.b])).sum::<f64>()
    }

    pub fn quality(&self) -> MeshQuality {
        let mut q = MeshQuality { min_angle: 180.0, max_aspect: 0.0, h_min: f64::INFINITY, h_max: 0.0 };
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            let lens = [p[1].distance(p[2]), p[2].distance(p[0]), p[0].distance(p[1])];
            for l in lens {
                q.h_min = q.h_min.min(l);
                q.h_max = q.h_max.max(l);
            }
            let ang = corner_angles(p);
            q.min_angle = q.min_angle.min(ang.iter().cloned().fold(f64::INFINITY, f64::min).to_degrees());
            let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).abs();
            let perim: f64 = lens.iter().sum();
            let r_out = lens[0] * lens[1] * lens[2] / (4.0 * area);
            let r_in = 2.0 * area / perim;
            q.max_aspect = q.max_aspect.max(r_out / (2.0 * r_in));
        }
        if self.triangles.is_empty() {
            q.h_min = 0.0;
        }
        q
    }

    /// Index and smallest angle (degrees) of the worst-shaped triangle.
    pub fn worst_triangle(&self) -> Option<(usize, f64)> {
        (0..self.triangles.len())
            .map(|t| (t, corner_angles(self.triangle_points(t)).iter().cloned().fold(f64::INFINITY, f64::min).to_degrees()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Vertex ids lying on the closure of any of the given arcs.
    pub fn vertices_on_arcs(&self, arcs: &[usize]) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for e in self.boundary_edges.iter().filter(|e| arcs.contains(&e.arc)) {
            on[e.a] = true;
            on[e.b] = true;
        }
        on
    }

    /// Apply `x -> f(x)` to every vertex (connectivity and labels unchanged).
    pub fn mapped<F: Fn(Point2) -> Point2>(&self, f: F) -> Mesh {
        let mut m = self.clone();
        m.vertices = self.vertices.iter().map(|&p| f(p)).collect();
        m.h = m.quality().h_max;
        m
    }

    /// Plain-text dump; see the README for the layout.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# zaremba mesh v1")?;
        writeln!(w, "vertices {}", self.vertices.len())?;
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(w, "{i} {:.17e} {:.17e}", p.x, p.y)?;
        }
        writeln!(w, "triangles {}", self.triangles.len())?;
        for (i, t) in self.triangles.iter().enumerate() {
            writeln!(w, "{i} {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(w, "boundary_edges {}", self.boundary_edges.len())?;
        for (i, e) in self.boundary_edges.iter().enumerate() {
            writeln!(w, "{i} {} {} {}", e.a, e.b, e.arc)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundaryArc;
    use std::f64::consts::PI;

    fn square() -> DomainBoundary {
        DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]).unwrap()
    }

    fn disk() -> DomainBoundary {
        DomainBoundary::new(vec![
            BoundaryArc::circular(Point2::new(0.0, 0.0), 1.0, 0.0, PI).unwrap(),
            BoundaryArc::circular(Point2::new(0.0, 0.0), 1.0, PI, 2.0 * PI).unwrap(),
        ])
        .unwrap()
    }

    fn check_conforming(m: &Mesh) {
        for t in 0..m.triangles.len() {
            assert!(m.signed_area_of(t) > 0.0, "triangle {t} not positive");
        }
        // each undirected edge shared by <= 2 triangles; boundary ones by exactly one
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &m.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let boundary: Vec<(usize, usize)> = m.boundary_edges.iter().map(|e| (e.a.min(e.b), e.a.max(e.b))).collect();
        for (k, c) in &count {
            let expect = if boundary.contains(k) { 1 } else { 2 };
            assert_eq!(*c, expect, "edge {k:?}");
        }
        for w in m.boundary_edges.windows(2) {
            assert_eq!(w[0].b, w[1].a);
        }
        assert_eq!(m.boundary_edges.last().unwrap().b, m.boundary_edges[0].a);
    }

    #[test]
    fn square_mesh_area_and_quality() {
        let m = generate(&square(), 0.25, None).unwrap();
        check_conforming(&m);
        assert!((m.area() - 1.0).abs() < 1e-12);
        assert!(m.quality().min_angle >= 20.0);
        assert!(m.h <= 0.25 + 1e-12);
    }

    #[test]
    fn disk_mesh_area() {
        let d = disk();
        let m = generate(&d, 0.05, None).unwrap();
        check_conforming(&m);
        let a = m.area();
        assert!(a > PI - 0.01 && a < PI, "area {a}");
        assert!(m.quality().min_angle >= 20.0);
        for e in &m.boundary_edges {
            assert!((m.vertices[e.a].norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn refinement_counts_and_disk_area() {
        let d = disk();
        let m0 = generate(&d, 0.2, None).unwrap();
        let m1 = refine(&m0, &d);
        let m2 = refine(&m1, &d);
        assert_eq!(m1.triangles.len(), 4 * m0.triangles.len());
        assert_eq!(m1.boundary_edges.len(), 2 * m0.boundary_edges.len());
        check_conforming(&m1);
        check_conforming(&m2);
        let defects: Vec<f64> = [&m0, &m1, &m2].iter().map(|m| PI - m.area()).collect();
        assert!(defects[0] > defects[1] && defects[1] > defects[2] && defects[2] > 0.0);
        let r = defects[1] / defects[2];
        assert!((r - 4.0).abs() < 0.3, "ratio {r}");
        assert!((m1.quality().min_angle - m0.quality().min_angle).abs() < 3.0);
    }

    #[test]
    fn graded_corner_edge() {
        let d = DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)]).unwrap();
        let h = 0.2;
        let g = Grading { corners: vec![2], factor: 0.15, levels: 4 };
        let m = generate(&d, h, Some(&g)).unwrap();
        check_conforming(&m);
        let target = 0.15f64.powi(4) * h;
        let shortest = m.boundary_edges.iter().map(|e| m.vertices[e.a].distance(m.vertices[e.b])).fold(f64::INFINITY, f64::min);
        assert!(shortest > 0.4 * target && shortest < 2.0 * target, "shortest {shortest} target {target}");
        assert!(m.quality().min_angle >= 20.0);
    }

    #[test]
    fn thin_triangle_meets_relaxed_floor() {
        let (a, b) = (2f64.to_radians(), 3f64.to_radians());
        // apex from the two base angles on the unit base
        let x = b.tan() / (a.tan() + b.tan());
        let apex = Point2::new(x, x * a.tan());
        let d = DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), apex]).unwrap();
        let m = generate(&d, 0.1, None).unwrap();
        check_conforming(&m);
        assert!(m.quality().min_angle >= quality_floor_for(&d));
    }

    #[test]
    fn structured_and_sliver_quality() {
        let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
        let m = Mesh::from_parts(v, vec![[0, 1, 2], [0, 2, 3]], Vec::new());
        assert!((m.quality().min_angle - 45.0).abs() < 1e-12);
        let v = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, 0.05)];
        let m = Mesh::from_parts(v, vec![[0, 1, 2]], Vec::new());
        assert!(m.quality().min_angle < 20.0);
    }

    #[test]
    fn deterministic() {
        let d = disk();
        let a = generate(&d, 0.1, Some(&Grading::new(vec![0]))).unwrap();
        let b = generate(&d, 0.1, Some(&Grading::new(vec![0]))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refuses_oversized_h() {
        assert!(matches!(generate(&square(), 5.0, None), Err(MeshError::SizeTooLarge { .. })));
    }

    #[test]
    fn dump_layout() {
        let m = generate(&square(), 0.5, None).unwrap();
        let mut buf = Vec::new();
        m.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# zaremba mesh v1\nvertices "));
        assert!(text.contains(&format!("triangles {}", m.triangles.len())));
        assert!(text.contains(&format!("boundary_edges {}", m.boundary_edges.len())));
    }
}
