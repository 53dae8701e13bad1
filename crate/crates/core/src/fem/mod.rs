//! P1 finite elements for the mixed Dirichlet-Neumann Laplacian.
//!
//! Dirichlet vertices (those on the closure of a Dirichlet arc) are eliminated; the lowest
//! eigenpair of `K u = lambda M u` on the free vertices is found by inverse iteration with
//! Jacobi-preconditioned conjugate gradients.

mod csr;
mod extrapolate;
mod study;

pub use csr::CsrMatrix;
pub use extrapolate::{extrapolate, extrapolate_pairs, Extrapolation};
pub use study::{hierarchy_for, solve_hierarchy, transition_corners, LevelResult, SolverConfig, Study};

use crate::exec::Execution;
use crate::mesh::Mesh;
use csr::{dot, norm};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const CG_MAX_ITER: usize = 10_000;
pub const POWER_MAX_ITER: usize = 500;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("Dirichlet set constrains no vertex; the pure Neumann problem has lambda = 0")]
    NoDirichlet,
    #[error("every vertex is constrained; no free degrees of freedom")]
    NoFreeDofs,
    #[error("conjugate gradients did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    CgNotConverged { iterations: usize, residual: f64 },
    #[error("inverse iteration did not converge in {iterations} steps (residual {residual:.3e})")]
    PowerNotConverged { iterations: usize, residual: f64 },
    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("extrapolation needs at least 3 levels, got {0}")]
    TooFewLevels(usize),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// Free and constrained vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub free: Vec<usize>,
    pub constrained: Vec<usize>,
    /// vertex -> position in `free`
    index: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, dirichlet_arcs: &[usize]) -> Self {
        let on = mesh.vertices_on_arcs(dirichlet_arcs);
        let mut free = Vec::new();
        let mut constrained = Vec::new();
        let mut index = vec![None; mesh.vertices.len()];
        for (v, &c) in on.iter().enumerate() {
            if c {
                constrained.push(v);
            } else {
                index[v] = Some(free.len());
                free.push(v);
            }
        }
        DofMap { free, constrained, index }
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn dof_of(&self, vertex: usize) -> Option<usize> {
        self.index[vertex]
    }

    /// Free-DOF vector expanded to all vertices (zero on constrained ones).
    pub fn expand(&self, u: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.index.len()];
        for (k, &v) in self.free.iter().enumerate() {
            full[v] = u[k];
        }
        full
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| full[v]).collect()
    }
}

/// Element stiffness and mass matrices of a linear triangle.
pub fn element_matrices(p: [crate::geometry::Point2; 3]) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (k, m)
}

fn assemble_on(mesh: &Mesh, dofs: &DofMap, exec: Execution) -> (CsrMatrix, CsrMatrix) {
    let n = dofs.n_free();
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &mesh.triangles {
        for &a in t {
            if let Some(i) = dofs.dof_of(a) {
                rows[i].extend(t.iter().filter_map(|&b| dofs.dof_of(b)));
            }
        }
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    let mut k = CsrMatrix::from_pattern(rows.clone());
    let mut m = CsrMatrix::from_pattern(rows);
    let elements = exec.map_range(mesh.triangles.len(), |t| element_matrices(mesh.triangle_points(t)));
    // scatter in triangle order so the sums match a serial run bit for bit
    for (t, (ke, me)) in mesh.triangles.iter().zip(&elements) {
        for a in 0..3 {
            let Some(i) = dofs.dof_of(t[a]) else { continue };
            for b in 0..3 {
                if let Some(j) = dofs.dof_of(t[b]) {
                    k.add(i, j, ke[a][b]);
                    m.add(i, j, me[a][b]);
                }
            }
        }
    }
    (k, m)
}

/// Stiffness and mass matrices restricted to the free vertices.
pub fn assemble(mesh: &Mesh, dirichlet_arcs: &[usize]) -> Result<(CsrMatrix, CsrMatrix, DofMap), FemError> {
    assemble_with(mesh, dirichlet_arcs, Execution::default())
}

pub fn assemble_with(mesh: &Mesh, dirichlet_arcs: &[usize], exec: Execution) -> Result<(CsrMatrix, CsrMatrix, DofMap), FemError> {
    let dofs = DofMap::new(mesh, dirichlet_arcs);
    if dofs.constrained.is_empty() {
        return Err(FemError::NoDirichlet);
    }
    if dofs.free.is_empty() {
        return Err(FemError::NoFreeDofs);
    }
    let (k, m) = assemble_on(mesh, &dofs, exec);
    Ok((k, m, dofs))
}

/// Unconstrained matrices over all vertices.
pub fn assemble_unconstrained(mesh: &Mesh, exec: Execution) -> (CsrMatrix, CsrMatrix) {
    assemble_on(mesh, &DofMap::new(mesh, &[]), exec)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// values at free vertices, mean positive, `M`-normalized
    pub vector: Vec<f64>,
    /// `||K u - lambda M u|| / ||M u||`
    pub residual: f64,
    /// smallest residual measurable in double precision for this pair
    pub residual_floor: f64,
    pub h: f64,
    pub n_dofs: usize,
    pub iterations: usize,
}

/// Preconditioned conjugate gradients for `K x = b`, starting from `x`.
fn pcg(k: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64], rel_tol: f64) -> Result<usize, FemError> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = k.mul(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut res = norm(&r) / bnorm;
    for it in 0..CG_MAX_ITER {
        if res <= rel_tol {
            return Ok(it);
        }
        k.mul_into(&p, &mut q);
        let alpha = rz / dot(&p, &q);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm(&r) / bnorm;
    }
    if res <= rel_tol {
        return Ok(CG_MAX_ITER);
    }
    Err(FemError::CgNotConverged { iterations: CG_MAX_ITER, residual: res })
}

/// Smallest eigenpair of `K u = lambda M u` from a constant start vector.
pub fn solve_smallest(k: &CsrMatrix, m: &CsrMatrix, tol: f64) -> Result<EigenResult, FemError> {
    solve_smallest_from(k, m, tol, None)
}

/// As [`solve_smallest`], starting from `guess` when given (e.g. a prolongated coarse solution).
pub fn solve_smallest_from(k: &CsrMatrix, m: &CsrMatrix, tol: f64, guess: Option<&[f64]>) -> Result<EigenResult, FemError> {
    if !(tol > 0.0) {
        return Err(FemError::BadTolerance(tol));
    }
    let n = k.dim();
    if n == 0 {
        return Err(FemError::NoFreeDofs);
    }
    let inv_diag: Vec<f64> = k.diagonal().iter().map(|d| 1.0 / d).collect();
    let mut x: Vec<f64> = match guess {
        Some(g) if g.len() == n && g.iter().any(|v| *v != 0.0) => g.to_vec(),
        Some(g) if g.len() != n => return Err(FemError::Dimension { expected: n, got: g.len() }),
        _ => vec![1.0; n],
    };
    let scale = m.quadratic_form(&x).sqrt();
    x.iter_mut().for_each(|v| *v /= scale);
    let mut lambda = k.quadratic_form(&x);
    let mut y: Vec<f64> = x.iter().map(|v| v / lambda).collect();
    let cg_tol = (1e-2 * tol).max(1e-14);
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    for it in 1..=POWER_MAX_ITER {
        let mx = m.mul(&x);
        pcg(k, &inv_diag, &mx, &mut y, cg_tol)?;
        // Rayleigh quotient of y: y'Ky / y'My with Ky = Mx
        let ymy = m.quadratic_form(&y);
        lambda = dot(&y, &mx) / ymy;
        let s = ymy.sqrt();
        x = y.iter().map(|v| v / s).collect();
        let kx = k.mul(&x);
        let mx = m.mul(&x);
        let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
        let mx_norm = norm(&mx);
        residual = norm(&r) / mx_norm;
        let floor = residual_floor(k, m, &x, lambda) / mx_norm;
        if residual < 0.9 * best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if residual <= tol.max(floor) || (since_best >= 20 && residual <= 1e3 * tol.max(floor)) {
            let mean: f64 = x.iter().sum::<f64>();
            if mean < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok(EigenResult { lambda, vector: x, residual, residual_floor: floor, h: 0.0, n_dofs: n, iterations: it });
        }
        y = x.iter().map(|v| v / lambda).collect();
    }
    Err(FemError::PowerNotConverged { iterations: POWER_MAX_ITER, residual })
}

/// Rounding level of `||K x - lambda M x||`: `64 eps (|| |K||x| || + lambda || |M||x| ||)`.
fn residual_floor(k: &CsrMatrix, m: &CsrMatrix, x: &[f64], lambda: f64) -> f64 {
    let ax: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    64.0 * f64::EPSILON * (norm(&k.abs_mul(&ax)) + lambda * norm(&m.abs_mul(&ax)))
}

pub fn rayleigh_quotient(u: &[f64], k: &CsrMatrix, m: &CsrMatrix) -> Result<f64, FemError> {
    if u.len() != k.dim() {
        return Err(FemError::Dimension { expected: k.dim(), got: u.len() });
    }
    let den = m.quadratic_form(u);
    if den == 0.0 {
        return Err(FemError::ZeroVector);
    }
    Ok(k.quadratic_form(u) / den)
}

/// Assemble on `mesh` and solve; `guess` is a full-vertex vector.
pub fn solve_on_mesh(
    mesh: &Mesh,
    dirichlet_arcs: &[usize],
    tol: f64,
    guess: Option<&[f64]>,
    exec: Execution,
) -> Result<(EigenResult, DofMap), FemError> {
    let (k, m, dofs) = assemble_with(mesh, dirichlet_arcs, exec)?;
    let g = guess.map(|full| dofs.restrict(full));
    let mut r = solve_smallest_from(&k, &m, tol, g.as_deref())?;
    r.h = mesh.h_nominal;
    Ok((r, dofs))
}

/// Full-vertex vector on `fine` interpolated from `coarse_full` (fine refines the coarse mesh).
pub fn prolongate(fine: &Mesh, coarse_full: &[f64]) -> Vec<f64> {
    let n0 = coarse_full.len();
    let mut out = coarse_full.to_vec();
    out.extend(fine.parent_edges.iter().map(|[a, b]| 0.5 * (coarse_full[*a] + coarse_full[*b])));
    debug_assert_eq!(out.len(), n0 + fine.parent_edges.len());
    out
}
