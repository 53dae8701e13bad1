//! Triangle/neighbour kernel with Lawson flips and Delaunay refinement for convex domains.
//!
//! Edge `i` of triangle `t` joins `tri[t][i+1]` and `tri[t][i+2]`; `nbr[t][i]` is the triangle
//! across it, or `NONE` on the domain boundary. Every boundary edge carries its source arc and
//! the arclength parameters of both end points, keyed by the directed (counterclockwise) pair.

use crate::geometry::{DomainBoundary, Point2};
use robust::{incircle, orient2d, Coord};
use std::collections::{HashMap, VecDeque};

pub(crate) const NONE: u32 = u32::MAX;

fn coord(p: Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive iff `a, b, c` turn counterclockwise.
pub(crate) fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    orient2d(coord(a), coord(b), coord(c))
}

/// Positive iff `d` lies inside the circle through the counterclockwise triple `a, b, c`.
fn in_circle(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    incircle(coord(a), coord(b), coord(c), coord(d))
}

pub(crate) fn circumcenter(a: Point2, b: Point2, c: Point2) -> Point2 {
    let (u, v) = (b - a, c - a);
    let d = 2.0 * u.cross(v);
    let (uu, vv) = (u.dot(u), v.dot(v));
    a + Point2::new(v.y * uu - u.y * vv, u.x * vv - v.x * uu) * (1.0 / d)
}

/// Smallest interior angle of a triangle, radians.
pub(crate) fn min_angle(a: Point2, b: Point2, c: Point2) -> f64 {
    let ang = |p: Point2, q: Point2, r: Point2| {
        let (u, v) = (q - p, r - p);
        u.cross(v).abs().atan2(u.dot(v))
    };
    ang(a, b, c).min(ang(b, c, a)).min(ang(c, a, b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Seg {
    pub arc: usize,
    pub s0: f64,
    pub s1: f64,
}

enum Located {
    Inside(u32),
    OnEdge(u32, usize),
    Outside(u32, usize),
    Vertex,
}

/// Refinement targets.
pub(crate) struct RefineParams<'a> {
    pub size: &'a dyn Fn(Point2) -> f64,
    /// circumradius over shortest edge above which a triangle is skinny
    pub ratio_bound: f64,
    /// corners with interior angle below 60 degrees, as vertex ids
    pub small_corners: Vec<u32>,
    /// base length for concentric-shell splitting
    pub shell_unit: f64,
    pub max_vertices: usize,
}

pub(crate) struct Kernel<'b> {
    pub pts: Vec<Point2>,
    pub tri: Vec<[u32; 3]>,
    pub nbr: Vec<[u32; 3]>,
    pub dead: Vec<bool>,
    pub segs: HashMap<(u32, u32), Seg>,
    boundary: &'b DomainBoundary,
    /// for boundary vertices: the arc(s) they lie on (corners carry both)
    on_arcs: Vec<[usize; 2]>,
    /// one triangle incident to each vertex
    vtri: Vec<u32>,
    hint: u32,
    /// hit the vertex cap during refinement
    pub capped: bool,
}

const NO_ARC: usize = usize::MAX;

impl<'b> Kernel<'b> {
    /// Delaunay triangulation of the convex polygon spanned by the boundary samples.
    pub fn from_boundary(boundary: &'b DomainBoundary, pts: Vec<Point2>, arcs: &[usize], params: &[f64]) -> Self {
        let n = pts.len();
        let mut segs = HashMap::new();
        let mut on_arcs = vec![[NO_ARC, NO_ARC]; n];
        for k in 0..n {
            let next = (k + 1) % n;
            let arc = arcs[k];
            let s1 = if arcs[next] == arc { params[next] } else { boundary.arc(arc).length() };
            segs.insert((k as u32, next as u32), Seg { arc, s0: params[k], s1 });
            on_arcs[k][0] = arc;
            if arcs[next] != arc {
                on_arcs[next][1] = arc;
            }
        }
        let mut k = Kernel {
            pts,
            tri: Vec::new(),
            nbr: Vec::new(),
            dead: Vec::new(),
            segs,
            boundary,
            on_arcs,
            vtri: Vec::new(),
            hint: 0,
            capped: false,
        };
        k.ear_clip();
        k.link();
        k.vtri = vec![NONE; k.pts.len()];
        for t in 0..k.tri.len() {
            for v in k.tri[t] {
                k.vtri[v as usize] = t as u32;
            }
        }
        k.make_delaunay();
        k
    }

    /// Best-ear clipping of the boundary polygon (largest smallest angle first).
    fn ear_clip(&mut self) {
        let mut ring: Vec<u32> = (0..self.pts.len() as u32).collect();
        let score = |ring: &[u32], i: usize, pts: &[Point2]| {
            let m = ring.len();
            let (a, b, c) = (pts[ring[(i + m - 1) % m] as usize], pts[ring[i] as usize], pts[ring[(i + 1) % m] as usize]);
            if orient(a, b, c) > 0.0 {
                min_angle(a, b, c)
            } else {
                f64::NEG_INFINITY
            }
        };
        let mut scores: Vec<f64> = (0..ring.len()).map(|i| score(&ring, i, &self.pts)).collect();
        while ring.len() > 3 {
            let mut best = 0;
            for i in 1..ring.len() {
                if scores[i] > scores[best] {
                    best = i;
                }
            }
            let m = ring.len();
            self.tri.push([ring[(best + m - 1) % m], ring[best], ring[(best + 1) % m]]);
            ring.remove(best);
            scores.remove(best);
            let m = ring.len();
            let prev = (best + m - 1) % m;
            let next = best % m;
            scores[prev] = score(&ring, prev, &self.pts);
            scores[next] = score(&ring, next, &self.pts);
        }
        self.tri.push([ring[0], ring[1], ring[2]]);
        self.dead = vec![false; self.tri.len()];
    }

    fn link(&mut self) {
        let mut half: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        for (t, v) in self.tri.iter().enumerate() {
            for i in 0..3 {
                half.insert((v[(i + 1) % 3], v[(i + 2) % 3]), (t as u32, i));
            }
        }
        self.nbr = self
            .tri
            .iter()
            .map(|v| {
                let mut n = [NONE; 3];
                for (i, slot) in n.iter_mut().enumerate() {
                    if let Some(&(u, _)) = half.get(&(v[(i + 2) % 3], v[(i + 1) % 3])) {
                        *slot = u;
                    }
                }
                n
            })
            .collect();
    }

    fn make_delaunay(&mut self) {
        let mut stack: Vec<(u32, usize)> = (0..self.tri.len() as u32).flat_map(|t| (0..3).map(move |i| (t, i))).collect();
        while let Some((t, i)) = stack.pop() {
            if self.is_illegal(t, i) {
                let u = self.nbr[t as usize][i];
                self.flip(t, i);
                for w in [t, u] {
                    for j in 0..3 {
                        stack.push((w, j));
                    }
                }
            }
        }
    }

    fn p(&self, v: u32) -> Point2 {
        self.pts[v as usize]
    }

    fn index_in(&self, t: u32, v: u32) -> usize {
        self.tri[t as usize].iter().position(|&w| w == v).expect("vertex not in triangle")
    }

    fn nbr_index(&self, u: u32, t: u32) -> usize {
        self.nbr[u as usize].iter().position(|&w| w == t).expect("triangles not adjacent")
    }

    fn set_back(&mut self, x: u32, old: u32, new: u32) {
        if x != NONE {
            if let Some(slot) = self.nbr[x as usize].iter_mut().find(|w| **w == old) {
                *slot = new;
            }
        }
    }

    fn edge(&self, t: u32, i: usize) -> (u32, u32) {
        let v = self.tri[t as usize];
        (v[(i + 1) % 3], v[(i + 2) % 3])
    }

    fn is_illegal(&self, t: u32, i: usize) -> bool {
        if self.dead[t as usize] {
            return false;
        }
        let u = self.nbr[t as usize][i];
        if u == NONE {
            return false;
        }
        let v = self.tri[t as usize];
        let d = self.tri[u as usize][self.nbr_index(u, t)];
        in_circle(self.p(v[i]), self.p(v[(i + 1) % 3]), self.p(v[(i + 2) % 3]), self.p(d)) > 0.0
    }

    /// Replace the diagonal opposite `tri[t][i]`; afterwards both triangles contain `tri[t][i]` at index 0.
    fn flip(&mut self, t: u32, i: usize) {
        let (tu, u) = (t as usize, self.nbr[t as usize][i]);
        let uu = u as usize;
        let j = self.nbr_index(u, t);
        let [a, b, c] = [self.tri[tu][i], self.tri[tu][(i + 1) % 3], self.tri[tu][(i + 2) % 3]];
        let d = self.tri[uu][j];
        let n_ca = self.nbr[tu][(i + 1) % 3];
        let n_ab = self.nbr[tu][(i + 2) % 3];
        let n_bd = self.nbr[uu][(j + 1) % 3];
        let n_dc = self.nbr[uu][(j + 2) % 3];
        self.put(tu as u32, [a, b, d], [n_bd, u, n_ab]);
        self.put(uu as u32, [a, d, c], [n_dc, n_ca, t]);
        self.set_back(n_bd, u, t);
        self.set_back(n_ca, t, u);
    }

    fn legalize(&mut self, p: u32, mut stack: Vec<u32>) {
        while let Some(t) = stack.pop() {
            let i = self.index_in(t, p);
            if self.is_illegal(t, i) {
                let u = self.nbr[t as usize][i];
                self.flip(t, i);
                stack.push(t);
                stack.push(u);
            }
        }
    }

    fn put(&mut self, t: u32, v: [u32; 3], n: [u32; 3]) {
        self.tri[t as usize] = v;
        self.nbr[t as usize] = n;
        for w in v {
            self.vtri[w as usize] = t;
        }
    }

    fn new_tri(&mut self, v: [u32; 3], n: [u32; 3]) -> u32 {
        self.tri.push(v);
        self.nbr.push(n);
        self.dead.push(false);
        let t = (self.tri.len() - 1) as u32;
        for w in v {
            self.vtri[w as usize] = t;
        }
        t
    }

    fn add_point(&mut self, p: Point2) -> u32 {
        self.pts.push(p);
        self.on_arcs.push([NO_ARC, NO_ARC]);
        self.vtri.push(NONE);
        (self.pts.len() - 1) as u32
    }

    fn split_inside(&mut self, t: u32, p: u32) -> [u32; 3] {
        let tu = t as usize;
        let [a, b, c] = self.tri[tu];
        let [n_a, n_b, n_c] = self.nbr[tu];
        let t1 = self.new_tri([p, c, a], [n_b, NONE, t]);
        let t2 = self.new_tri([p, a, b], [n_c, t, t1]);
        self.nbr[t1 as usize][1] = t2;
        self.put(tu as u32, [p, b, c], [n_a, t1, t2]);
        self.set_back(n_b, t, t1);
        self.set_back(n_c, t, t2);
        [t, t1, t2]
    }

    fn split_interior_edge(&mut self, t: u32, i: usize, p: u32) -> Vec<u32> {
        let u = self.nbr[t as usize][i];
        let j = self.nbr_index(u, t);
        let (tu, uu) = (t as usize, u as usize);
        let [a, b, c] = [self.tri[tu][i], self.tri[tu][(i + 1) % 3], self.tri[tu][(i + 2) % 3]];
        let d = self.tri[uu][j];
        let n_ca = self.nbr[tu][(i + 1) % 3];
        let n_ab = self.nbr[tu][(i + 2) % 3];
        let n_bd = self.nbr[uu][(j + 1) % 3];
        let n_dc = self.nbr[uu][(j + 2) % 3];
        let t1 = self.new_tri([p, c, a], [n_ca, t, NONE]);
        let u1 = self.new_tri([p, d, c], [n_dc, t1, u]);
        self.nbr[t1 as usize][2] = u1;
        self.put(tu as u32, [p, a, b], [n_ab, u, t1]);
        self.put(uu as u32, [p, b, d], [n_bd, u1, t]);
        self.set_back(n_ca, t, t1);
        self.set_back(n_dc, u, u1);
        vec![t, t1, u, u1]
    }

    /// Split the boundary edge opposite `tri[t][i]` at arclength `s` on its arc.
    fn split_boundary(&mut self, t: u32, i: usize, s: f64) -> Vec<u32> {
        let (b, c) = self.edge(t, i);
        let seg = self.segs.remove(&(b, c)).expect("boundary edge without arc");
        let arc = self.boundary.arc(seg.arc);
        let q = arc.point(s);
        let p = self.add_point(q);
        self.on_arcs[p as usize][0] = seg.arc;
        self.segs.insert((b, p), Seg { arc: seg.arc, s0: seg.s0, s1: s });
        self.segs.insert((p, c), Seg { arc: seg.arc, s0: s, s1: seg.s1 });
        let tu = t as usize;
        if !arc.is_segment() && orient(self.p(b), self.p(c), q) < 0.0 {
            let u = self.new_tri([p, c, b], [t, NONE, NONE]);
            self.nbr[tu][i] = u;
            self.legalize(p, vec![u]);
            return vec![u];
        }
        let a = self.tri[tu][i];
        let n_ca = self.nbr[tu][(i + 1) % 3];
        let n_ab = self.nbr[tu][(i + 2) % 3];
        let t1 = self.new_tri([p, c, a], [n_ca, t, NONE]);
        self.put(tu as u32, [p, a, b], [n_ab, NONE, t1]);
        self.set_back(n_ca, t, t1);
        self.legalize(p, vec![t, t1]);
        vec![t, t1]
    }

    fn locate(&self, p: Point2, start: u32) -> Located {
        let mut t = if start != NONE && !self.dead[start as usize] { start } else { self.any_alive() };
        let cap = 4 * self.tri.len() + 16;
        for step in 0..cap {
            let v = self.tri[t as usize];
            let mut moved = false;
            for k in 0..3 {
                let i = (k + step) % 3;
                let (b, c) = (v[(i + 1) % 3], v[(i + 2) % 3]);
                if orient(self.p(b), self.p(c), p) < 0.0 {
                    let u = self.nbr[t as usize][i];
                    if u == NONE {
                        return Located::Outside(t, i);
                    }
                    t = u;
                    moved = true;
                    break;
                }
            }
            if !moved {
                return self.classify(t, p);
            }
        }
        // walk did not settle; fall back to a scan
        for t in 0..self.tri.len() as u32 {
            if self.dead[t as usize] {
                continue;
            }
            let v = self.tri[t as usize];
            if (0..3).all(|i| orient(self.p(v[(i + 1) % 3]), self.p(v[(i + 2) % 3]), p) >= 0.0) {
                return self.classify(t, p);
            }
        }
        Located::Vertex
    }

    fn classify(&self, t: u32, p: Point2) -> Located {
        let v = self.tri[t as usize];
        let mut zero = None;
        for i in 0..3 {
            if self.p(v[i]) == p {
                return Located::Vertex;
            }
            if orient(self.p(v[(i + 1) % 3]), self.p(v[(i + 2) % 3]), p) == 0.0 {
                if zero.is_some() {
                    return Located::Vertex;
                }
                zero = Some(i);
            }
        }
        match zero {
            Some(i) if self.nbr[t as usize][i] == NONE => Located::Outside(t, i),
            Some(i) => Located::OnEdge(t, i),
            None => Located::Inside(t),
        }
    }

    fn any_alive(&self) -> u32 {
        self.dead.iter().position(|d| !d).expect("empty triangulation") as u32
    }

    /// Boundary edges of the Delaunay cavity of `p` whose diametral circle contains `p`.
    fn encroached_by(&self, p: Point2, t0: u32) -> Vec<(u32, usize)> {
        let mut seen = vec![t0];
        let mut queue = VecDeque::from([t0]);
        let mut hits = Vec::new();
        while let Some(t) = queue.pop_front() {
            for i in 0..3 {
                let u = self.nbr[t as usize][i];
                if u == NONE {
                    let (b, c) = self.edge(t, i);
                    if (self.p(b) - p).dot(self.p(c) - p) < 0.0 {
                        hits.push((t, i));
                    }
                    continue;
                }
                if seen.contains(&u) {
                    continue;
                }
                let v = self.tri[u as usize];
                if in_circle(self.p(v[0]), self.p(v[1]), self.p(v[2]), p) > 0.0 {
                    seen.push(u);
                    queue.push_back(u);
                }
            }
        }
        hits
    }

    /// Is the boundary edge opposite `tri[t][i]` encroached by the opposite vertex?
    fn edge_encroached(&self, t: u32, i: usize) -> bool {
        let v = self.tri[t as usize];
        let (a, b, c) = (self.p(v[i]), self.p(v[(i + 1) % 3]), self.p(v[(i + 2) % 3]));
        (b - a).dot(c - a) < 0.0
    }

    fn split_parameter(&self, b: u32, c: u32, params: &RefineParams) -> f64 {
        let seg = self.segs[&(b, c)];
        let len = seg.s1 - seg.s0;
        let shell = |dist: f64| {
            let unit = params.shell_unit;
            unit * 2f64.powf((2.0 * dist / (3.0 * unit)).log2().floor())
        };
        if params.small_corners.contains(&b) && !params.small_corners.contains(&c) {
            return seg.s0 + shell(len);
        }
        if params.small_corners.contains(&c) && !params.small_corners.contains(&b) {
            return seg.s1 - shell(len);
        }
        0.5 * (seg.s0 + seg.s1)
    }

    fn split_segment(&mut self, t: u32, i: usize, params: &RefineParams) -> Vec<u32> {
        let (b, c) = self.edge(t, i);
        let s = self.split_parameter(b, c, params);
        self.split_boundary(t, i, s)
    }

    /// Both ends sit on arcs meeting at one of the small corners.
    fn near_small_corner(&self, p: u32, q: u32, params: &RefineParams) -> bool {
        params.small_corners.iter().any(|&corner| {
            let ca = self.on_arcs[corner as usize];
            let touches = |v: u32| v == corner || self.on_arcs[v as usize].iter().any(|a| *a != NO_ARC && ca.contains(a));
            touches(p) && touches(q)
        })
    }

    fn needs_split(&self, t: u32, params: &RefineParams) -> bool {
        let v = self.tri[t as usize];
        let pts = [self.p(v[0]), self.p(v[1]), self.p(v[2])];
        let lens = [pts[1].distance(pts[2]), pts[2].distance(pts[0]), pts[0].distance(pts[1])];
        let lmax = lens.iter().cloned().fold(0.0, f64::max);
        let centroid = (pts[0] + pts[1] + pts[2]) * (1.0 / 3.0);
        if lmax > (params.size)(centroid) {
            return true;
        }
        let (imin, lmin) = lens.iter().cloned().enumerate().fold((0, f64::INFINITY), |m, (k, l)| if l < m.1 { (k, l) } else { m });
        let r = circumcenter(pts[0], pts[1], pts[2]).distance(pts[0]);
        if r / lmin <= params.ratio_bound {
            return false;
        }
        !self.near_small_corner(v[(imin + 1) % 3], v[(imin + 2) % 3], params)
    }

    /// Delaunay refinement: split encroached boundary edges, then insert circumcentres of bad triangles.
    pub fn refine(&mut self, params: &RefineParams) {
        let mut queue: VecDeque<u32> = (0..self.tri.len() as u32).collect();
        let mut seg_queue: VecDeque<(u32, u32)> = VecDeque::new();
        for t in 0..self.tri.len() as u32 {
            for i in 0..3 {
                if self.nbr[t as usize][i] == NONE {
                    seg_queue.push_back(self.edge(t, i));
                }
            }
        }
        loop {
            if self.pts.len() >= params.max_vertices {
                self.capped = true;
                return;
            }
            if let Some((b, c)) = seg_queue.pop_front() {
                if let Some((t, i)) = self.find_boundary(b, c) {
                    if self.edge_encroached(t, i) {
                        let touched = self.split_segment(t, i, params);
                        self.enqueue(&touched, &mut queue, &mut seg_queue);
                    }
                }
                continue;
            }
            let Some(t) = queue.pop_front() else { return };
            if self.dead[t as usize] || !self.needs_split(t, params) {
                continue;
            }
            let v = self.tri[t as usize];
            let cc = circumcenter(self.p(v[0]), self.p(v[1]), self.p(v[2]));
            let touched = match self.locate(cc, t) {
                Located::Outside(u, i) => self.split_segment(u, i, params),
                Located::Vertex => continue,
                Located::Inside(u) | Located::OnEdge(u, _) => {
                    let hits = self.encroached_by(cc, u);
                    if !hits.is_empty() {
                        for (b, c) in hits.iter().map(|&(w, i)| self.edge(w, i)).collect::<Vec<_>>() {
                            seg_queue.push_back((b, c));
                            // split regardless of the opposite-vertex test
                            if let Some((w, i)) = self.find_boundary(b, c) {
                                let touched = self.split_segment(w, i, params);
                                self.enqueue(&touched, &mut queue, &mut seg_queue);
                            }
                        }
                        queue.push_back(t);
                        continue;
                    }
                    let p = self.add_point(cc);
                    self.hint = u;
                    match self.locate(cc, u) {
                        Located::OnEdge(w, i) => {
                            let ts = self.split_interior_edge(w, i, p);
                            self.legalize(p, ts.clone());
                            ts
                        }
                        Located::Inside(w) => {
                            let ts = self.split_inside(w, p);
                            self.legalize(p, ts.to_vec());
                            ts.to_vec()
                        }
                        _ => {
                            self.pts.pop();
                            self.on_arcs.pop();
                            self.vtri.pop();
                            continue;
                        }
                    }
                }
            };
            self.enqueue(&touched, &mut queue, &mut seg_queue);
            if !self.dead[t as usize] {
                queue.push_back(t);
            }
        }
    }

    /// Queue every triangle around the newest vertex and every boundary edge near it.
    fn enqueue(&self, touched: &[u32], queue: &mut VecDeque<u32>, seg_queue: &mut VecDeque<(u32, u32)>) {
        let p = (self.pts.len() - 1) as u32;
        let mut star = touched.to_vec();
        let start = touched.iter().copied().find(|&t| self.tri[t as usize].contains(&p));
        if let Some(t0) = start {
            // walk the full star of p, both directions (p may be on the boundary)
            let mut stack = vec![t0];
            while let Some(t) = stack.pop() {
                for &u in &self.nbr[t as usize] {
                    if u != NONE && self.tri[u as usize].contains(&p) && !star.contains(&u) {
                        star.push(u);
                        stack.push(u);
                    }
                }
            }
        }
        for &t in &star {
            queue.push_back(t);
            for i in 0..3 {
                if self.nbr[t as usize][i] == NONE {
                    seg_queue.push_back(self.edge(t, i));
                }
                let u = self.nbr[t as usize][i];
                if u != NONE {
                    for j in 0..3 {
                        if self.nbr[u as usize][j] == NONE {
                            seg_queue.push_back(self.edge(u, j));
                        }
                    }
                }
            }
        }
    }

    fn find_boundary(&self, b: u32, c: u32) -> Option<(u32, usize)> {
        if !self.segs.contains_key(&(b, c)) {
            return None;
        }
        // any triangle at b: walk its star
        let t0 = self.triangle_at(b)?;
        let mut stack = vec![t0];
        let mut seen = vec![t0];
        while let Some(t) = stack.pop() {
            for i in 0..3 {
                if self.nbr[t as usize][i] == NONE && self.edge(t, i) == (b, c) {
                    return Some((t, i));
                }
                let u = self.nbr[t as usize][i];
                if u != NONE && self.tri[u as usize].contains(&b) && !seen.contains(&u) {
                    seen.push(u);
                    stack.push(u);
                }
            }
        }
        None
    }

    fn triangle_at(&self, v: u32) -> Option<u32> {
        let t = self.vtri[v as usize];
        (t != NONE).then_some(t)
    }

    /// Live triangles in index order.
    pub fn triangles(&self) -> Vec<[u32; 3]> {
        self.tri.iter().zip(&self.dead).filter(|(_, d)| !**d).map(|(t, _)| *t).collect()
    }
}
