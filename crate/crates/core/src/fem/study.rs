//! Refinement studies: one mesh hierarchy, warm-started solves per level, extrapolation.

use super::{extrapolate_pairs, prolongate, solve_on_mesh, EigenResult, Extrapolation, FemError, DEFAULT_TOL};
use crate::exec::Execution;
use crate::geometry::DomainBoundary;
use crate::mesh::{self, Grading, Mesh, MeshError, DEFAULT_GRADING_FACTOR, DEFAULT_GRADING_LEVELS};
use serde::{Deserialize, Serialize};

fn default_levels() -> usize {
    4
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_factor() -> f64 {
    DEFAULT_GRADING_FACTOR
}
fn default_grading_levels() -> u32 {
    DEFAULT_GRADING_LEVELS
}
fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub h0: f64,
    /// total number of levels, the coarsest included
    #[serde(default = "default_levels")]
    pub levels: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// grade meshes toward Dirichlet-Neumann transition corners
    #[serde(default = "default_true")]
    pub grading: bool,
    #[serde(default = "default_factor")]
    pub grading_factor: f64,
    #[serde(default = "default_grading_levels")]
    pub grading_levels: u32,
    #[serde(default)]
    pub execution: Execution,
}

impl SolverConfig {
    pub fn new(h0: f64, levels: usize) -> Self {
        SolverConfig {
            h0,
            levels,
            tol: DEFAULT_TOL,
            grading: true,
            grading_factor: DEFAULT_GRADING_FACTOR,
            grading_levels: DEFAULT_GRADING_LEVELS,
            execution: Execution::default(),
        }
    }

    pub fn with_grading(mut self, on: bool) -> Self {
        self.grading = on;
        self
    }
}

/// Corners where membership in any of the given Dirichlet sets changes.
pub fn transition_corners(boundary: &DomainBoundary, dirichlet_sets: &[&[usize]]) -> Vec<usize> {
    let n = boundary.arc_count();
    (0..n)
        .filter(|&c| {
            let prev = (c + n - 1) % n;
            dirichlet_sets.iter().any(|set| set.contains(&prev) != set.contains(&c))
        })
        .collect()
}

/// Nested meshes for a study; graded toward `corners` when grading is on.
pub fn hierarchy_for(boundary: &DomainBoundary, cfg: &SolverConfig, corners: &[usize]) -> Result<Vec<Mesh>, MeshError> {
    let grading = (cfg.grading && !corners.is_empty()).then(|| Grading {
        corners: corners.to_vec(),
        factor: cfg.grading_factor,
        levels: cfg.grading_levels,
    });
    mesh::hierarchy(boundary, cfg.h0, grading.as_ref(), cfg.levels.max(1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    /// nominal mesh size `h0 / 2^level`
    pub h: f64,
    /// longest edge
    pub h_max: f64,
    pub lambda: f64,
    pub residual: f64,
    pub n_dofs: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub dirichlet_arcs: Vec<usize>,
    pub levels: Vec<LevelResult>,
    pub extrapolation: Option<Extrapolation>,
    /// finest-level eigenpair
    #[serde(skip)]
    pub finest: Option<EigenResult>,
}

impl Study {
    pub fn finest_lambda(&self) -> f64 {
        self.levels.last().map_or(f64::NAN, |l| l.lambda)
    }

    /// Extrapolated value when available, otherwise the finest one.
    pub fn best_lambda(&self) -> f64 {
        self.extrapolation.map_or(self.finest_lambda(), |e| e.lambda_inf)
    }

    pub fn error_estimate(&self) -> f64 {
        self.extrapolation.map_or(f64::INFINITY, |e| e.error_estimate)
    }
}

/// Solves on every level, each warm-started from the prolongated coarser eigenvector.
pub fn solve_hierarchy(meshes: &[Mesh], dirichlet_arcs: &[usize], tol: f64, exec: Execution) -> Result<Study, FemError> {
    let mut levels = Vec::with_capacity(meshes.len());
    let mut prev_full: Option<Vec<f64>> = None;
    let mut finest = None;
    for (k, mesh) in meshes.iter().enumerate() {
        let guess = prev_full.as_ref().map(|v| prolongate(mesh, v));
        let (r, dofs) = solve_on_mesh(mesh, dirichlet_arcs, tol, guess.as_deref(), exec)?;
        levels.push(LevelResult {
            level: k,
            h: mesh.h_nominal,
            h_max: mesh.h,
            lambda: r.lambda,
            residual: r.residual,
            n_dofs: r.n_dofs,
            iterations: r.iterations,
        });
        prev_full = Some(dofs.expand(&r.vector));
        finest = Some(r);
    }
    let pairs: Vec<(f64, f64)> = levels.iter().map(|l| (l.h, l.lambda)).collect();
    let extrapolation = if pairs.len() >= 3 { Some(extrapolate_pairs(&pairs)?) } else { None };
    Ok(Study { dirichlet_arcs: dirichlet_arcs.to_vec(), levels, extrapolation, finest })
}
