//! Config-driven scenarios: hypothesis checks, eigenvalue comparisons on shared mesh families,
//! parameter sweeps, inclusion monotonicity and identity checks.

mod families;
mod report;

pub use families::{acute_trapezium, delta_quadrilateral, triangle_from_base_angles, Family, FamilyComparison, FamilyMember};
pub use report::{emit_report, Format, Report, ReportFile, SCHEMA_VERSION};

use crate::exec::Execution;
use crate::fem::{hierarchy_for, solve_hierarchy, transition_corners, FemError, SolverConfig, Study};
use crate::geometry::{ArcKind, DomainBoundary, GeometryError, Point2};
use crate::hypotheses::{
    check_hypotheses, monotonicity_profile, BoundaryPartition, HypothesisError, HypothesisReport, MonotonicityProfile,
    DEFAULT_PROFILE_SAMPLES,
};
use crate::identity::{
    check_membership, identity_residual_with, ArcLabel, CellGeometry, IdentityBreakdown, IdentityError, IdentityOptions,
    ManufacturedFunction, MembershipReport, DEFAULT_BOUNDARY_H,
};
use crate::mesh::{Mesh, MeshError, MeshQuality};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

/// Safety factor between an eigenvalue gap and the combined extrapolation error.
pub const VERDICT_FACTOR: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Identity(#[from] IdentityError),
}

fn invalid(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Config(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Compare,
    Sweep,
    Identity,
    Inclusion,
}

/// Either a closed polygon or an explicit arc chain.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polygon: Option<Vec<Point2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arcs: Option<Vec<ArcKind>>,
}

impl DomainSpec {
    /// Validated convex boundary.
    pub fn build(&self) -> Result<DomainBoundary, ScenarioError> {
        let boundary = match (&self.polygon, &self.arcs) {
            (Some(v), None) => DomainBoundary::polygon(v)?,
            (None, Some(arcs)) => {
                DomainBoundary::new(arcs.iter().cloned().map(crate::geometry::BoundaryArc::new).collect::<Result<Vec<_>, _>>()?)?
            }
            _ => return Err(invalid("domain needs exactly one of `polygon` or `arcs`")),
        };
        boundary.ensure_valid()?;
        Ok(boundary)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    pub gamma: Vec<usize>,
    pub gamma_prime: usize,
}

/// Nested Dirichlet sets for inclusion runs: `smaller` must be a subset of `larger`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InclusionSpec {
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub family: Family,
    /// explicit grid values
    #[serde(default)]
    pub values: Vec<f64>,
    /// inclusive `[start, stop]` range with `step`, appended to `values`
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    /// restrict to comparisons with these labels
    #[serde(default)]
    pub comparisons: Vec<String>,
}

impl SweepSpec {
    pub fn grid_values(&self) -> Result<Vec<f64>, ScenarioError> {
        let mut out = self.values.clone();
        match (self.start, self.stop, self.step) {
            (None, None, None) => {}
            (Some(a), Some(b), Some(s)) => {
                if !(s > 0.0) || b < a {
                    return Err(invalid("sweep range needs start <= stop and step > 0"));
                }
                let n = ((b - a) / s + 1e-9).floor() as usize;
                out.extend((0..=n).map(|k| a + k as f64 * s));
            }
            _ => return Err(invalid("sweep range needs all of start, stop, step")),
        }
        if out.is_empty() {
            return Err(invalid("sweep grid is empty"));
        }
        Ok(out)
    }
}

/// Manufactured function, by preset name or explicit terms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    Preset { preset: String },
    Terms(ManufacturedFunction),
}

impl FunctionSpec {
    pub fn build(&self) -> Result<ManufacturedFunction, ScenarioError> {
        match self {
            FunctionSpec::Terms(f) => Ok(f.clone()),
            FunctionSpec::Preset { preset } => match preset.as_str() {
                "cos_cos_quarter_wave" => Ok(ManufacturedFunction::cos_cos_quarter_wave()),
                "paraboloid" => Ok(ManufacturedFunction::paraboloid()),
                other => Err(invalid(format!("unknown function preset `{other}`"))),
            },
        }
    }
}

fn default_quad_order() -> usize {
    8
}
fn default_boundary_h() -> f64 {
    DEFAULT_BOUNDARY_H
}
fn default_identity_tol() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentitySpec {
    pub function: FunctionSpec,
    pub labels: Vec<ArcLabel>,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default = "default_boundary_h")]
    pub boundary_h: f64,
    #[serde(default)]
    pub mesh_h: Option<f64>,
    #[serde(default)]
    pub geometry: CellGeometry,
    /// pass threshold on `|residual|`
    #[serde(default = "default_identity_tol")]
    pub tolerance: f64,
    /// closed-form `[term_mixed, term_cross, term_curv]` to report deviations against
    #[serde(default)]
    pub expected_terms: Option<[f64; 3]>,
}

fn default_solver() -> SolverConfig {
    SolverConfig::new(0.1, 4)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub kind: Option<ScenarioKind>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub domain: Option<DomainSpec>,
    #[serde(default)]
    pub partition: Option<PartitionSpec>,
    /// Dirichlet arcs for single solves; defaults to the partition's `gamma`
    #[serde(default)]
    pub dirichlet: Option<Vec<usize>>,
    #[serde(default = "default_solver")]
    pub solver: SolverConfig,
    /// the comparison is symmetric by construction, so equality is the expected outcome
    #[serde(default)]
    pub symmetric: bool,
    /// closed-form eigenvalue for single solves
    #[serde(default)]
    pub reference_lambda: Option<f64>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub inclusion: Option<InclusionSpec>,
    #[serde(default)]
    pub identity: Option<IdentitySpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Numeric fields positive and the block required by `kind` present.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let s = &self.solver;
        if !(s.h0 > 0.0 && s.h0.is_finite()) {
            return Err(invalid(format!("solver.h0 must be positive, got {}", s.h0)));
        }
        if s.levels == 0 {
            return Err(invalid("solver.levels must be at least 1"));
        }
        if !(s.tol > 0.0) {
            return Err(invalid(format!("solver.tol must be positive, got {}", s.tol)));
        }
        if !(s.grading_factor > 0.0 && s.grading_factor < 1.0) {
            return Err(invalid(format!("solver.grading_factor must lie in (0, 1), got {}", s.grading_factor)));
        }
        let need = |ok: bool, what: &str| if ok { Ok(()) } else { Err(invalid(format!("kind needs a `{what}` block"))) };
        match self.kind {
            Some(ScenarioKind::Compare) => {
                need(self.domain.is_some(), "domain")?;
                need(self.partition.is_some(), "partition")
            }
            Some(ScenarioKind::Sweep) => need(self.sweep.is_some(), "sweep"),
            Some(ScenarioKind::Identity) => {
                need(self.domain.is_some(), "domain")?;
                need(self.identity.is_some(), "identity")
            }
            Some(ScenarioKind::Inclusion) => {
                need(self.domain.is_some(), "domain")?;
                need(self.inclusion.is_some(), "inclusion")
            }
            None => Ok(()),
        }
    }

    pub fn boundary(&self) -> Result<DomainBoundary, ScenarioError> {
        self.domain.as_ref().ok_or_else(|| invalid("config has no `domain`"))?.build()
    }

    pub fn partition_spec(&self) -> Result<&PartitionSpec, ScenarioError> {
        self.partition.as_ref().ok_or_else(|| invalid("config has no `partition`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    VerifiedStrict,
    EqualWithinTol,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::VerifiedStrict => "VERIFIED_STRICT",
            Verdict::EqualWithinTol => "EQUAL_WITHIN_TOL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

/// `VERIFIED_STRICT` iff `margin > 3 (err + err')`; equality only for symmetric cases.
pub fn verdict(margin: f64, err_gamma: f64, err_gamma_prime: f64, symmetric: bool) -> Verdict {
    let bound = VERDICT_FACTOR * (err_gamma + err_gamma_prime);
    if margin > bound {
        Verdict::VerifiedStrict
    } else if symmetric && margin.abs() <= bound {
        Verdict::EqualWithinTol
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshLevelSummary {
    pub level: usize,
    pub vertices: usize,
    pub triangles: usize,
    pub quality: MeshQuality,
}

fn summarize(meshes: &[Mesh]) -> Vec<MeshLevelSummary> {
    meshes
        .iter()
        .enumerate()
        .map(|(level, m)| MeshLevelSummary { level, vertices: m.vertices.len(), triangles: m.triangles.len(), quality: m.quality() })
        .collect()
}

/// Per-level gap against the distance of both sides from their extrapolated limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMargin {
    pub level: usize,
    pub h: f64,
    pub margin: f64,
    pub bound: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub name: String,
    pub gamma: Vec<usize>,
    pub gamma_prime: usize,
    pub hypotheses: HypothesisReport,
    pub study_gamma: Study,
    pub study_gamma_prime: Study,
    /// `lambda_inf(gamma) - lambda_inf(gamma')`
    pub margin: f64,
    /// `3 (err(gamma) + err(gamma'))`
    pub bound: f64,
    pub symmetric: bool,
    pub verdict: Verdict,
    pub level_margins: Vec<LevelMargin>,
    pub meshes: Vec<MeshLevelSummary>,
    #[serde(skip)]
    pub profile: Option<MonotonicityProfile>,
}

/// Hypothesis check plus both eigenvalue studies on one mesh family.
pub fn compare(
    name: &str,
    boundary: &DomainBoundary,
    gamma: &[usize],
    gamma_prime: usize,
    solver: &SolverConfig,
    symmetric: bool,
) -> Result<ComparisonReport, ScenarioError> {
    let partition = BoundaryPartition::new(boundary, gamma, gamma_prime)?;
    let hypotheses = check_hypotheses(boundary, &partition)?;
    let profile = monotonicity_profile(boundary, &partition, DEFAULT_PROFILE_SAMPLES)?;
    let gp = [gamma_prime];
    let corners = transition_corners(boundary, &[gamma, &gp]);
    let meshes = hierarchy_for(boundary, solver, &corners)?;
    let exec = solver.execution;
    let (a, b) = exec.join(|| solve_hierarchy(&meshes, gamma, solver.tol, exec), || solve_hierarchy(&meshes, &gp, solver.tol, exec));
    let (study_gamma, study_gamma_prime) = (a?, b?);
    let margin = study_gamma.best_lambda() - study_gamma_prime.best_lambda();
    let (eg, egp) = (study_gamma.error_estimate(), study_gamma_prime.error_estimate());
    let bound = VERDICT_FACTOR * (eg + egp);
    let symmetric = symmetric || hypotheses.mirror_symmetric;
    let (li, lpi) = (study_gamma.best_lambda(), study_gamma_prime.best_lambda());
    let level_margins = study_gamma
        .levels
        .iter()
        .zip(&study_gamma_prime.levels)
        .map(|(x, y)| {
            let m = x.lambda - y.lambda;
            let bound = VERDICT_FACTOR * ((x.lambda - li).abs() + (y.lambda - lpi).abs());
            LevelMargin { level: x.level, h: x.h, margin: m, bound, within: m.abs() <= bound }
        })
        .collect();
    Ok(ComparisonReport {
        name: name.into(),
        gamma: gamma.to_vec(),
        gamma_prime,
        verdict: verdict(margin, eg, egp, symmetric),
        hypotheses,
        study_gamma,
        study_gamma_prime,
        margin,
        bound,
        symmetric,
        level_margins,
        meshes: summarize(&meshes),
        profile: Some(profile),
    })
}

pub fn compare_config(cfg: &ScenarioConfig) -> Result<ComparisonReport, ScenarioError> {
    let boundary = cfg.boundary()?;
    let p = cfg.partition_spec()?;
    compare(&cfg.name, &boundary, &p.gamma, p.gamma_prime, &cfg.solver, cfg.symmetric)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub gamma: Vec<usize>,
    pub gamma_prime: usize,
    pub b: Point2,
    pub hypotheses: HypothesisReport,
    pub profile: MonotonicityProfile,
}

pub fn check_config(cfg: &ScenarioConfig) -> Result<CheckReport, ScenarioError> {
    let boundary = cfg.boundary()?;
    let p = cfg.partition_spec()?;
    let partition = BoundaryPartition::new(&boundary, &p.gamma, p.gamma_prime)?;
    Ok(CheckReport {
        name: cfg.name.clone(),
        gamma: p.gamma.clone(),
        gamma_prime: p.gamma_prime,
        b: partition.b(),
        hypotheses: check_hypotheses(&boundary, &partition)?,
        profile: monotonicity_profile(&boundary, &partition, DEFAULT_PROFILE_SAMPLES)?,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub name: String,
    pub study: Study,
    pub reference_lambda: Option<f64>,
    /// `|best - reference| / reference`
    pub relative_error: Option<f64>,
    pub meshes: Vec<MeshLevelSummary>,
}

/// Single refinement study with Dirichlet arcs from `dirichlet` or the partition's `gamma`.
pub fn solve_config(cfg: &ScenarioConfig) -> Result<(SolveReport, Vec<Mesh>), ScenarioError> {
    let boundary = cfg.boundary()?;
    let dirichlet = match (&cfg.dirichlet, &cfg.partition) {
        (Some(d), _) => d.clone(),
        (None, Some(p)) => p.gamma.clone(),
        (None, None) => return Err(invalid("solve needs `dirichlet` or `partition`")),
    };
    if let Some(&bad) = dirichlet.iter().find(|&&a| a >= boundary.arc_count()) {
        return Err(invalid(format!("Dirichlet arc {bad} does not exist")));
    }
    let corners = transition_corners(&boundary, &[&dirichlet]);
    let meshes = hierarchy_for(&boundary, &cfg.solver, &corners)?;
    let study = solve_hierarchy(&meshes, &dirichlet, cfg.solver.tol, cfg.solver.execution)?;
    let relative_error = cfg.reference_lambda.map(|r| (study.best_lambda() - r).abs() / r.abs());
    let report =
        SolveReport { name: cfg.name.clone(), study, reference_lambda: cfg.reference_lambda, relative_error, meshes: summarize(&meshes) };
    Ok((report, meshes))
}

/// One sweep grid point: a family member and one of its comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub index: usize,
    pub parameter: f64,
    pub comparison: FamilyComparison,
    pub report: Option<ComparisonReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub name: String,
    pub family: Family,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn all_verdicts(&self, v: Verdict) -> bool {
        self.points.iter().all(|p| p.report.as_ref().is_some_and(|r| r.verdict == v))
    }
}

/// Comparisons over the family grid; failures are recorded per point.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepReport, ScenarioError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| invalid("config has no `sweep` block"))?;
    let values = spec.grid_values()?;
    let mut grid = Vec::new();
    for &v in &values {
        let comparisons = match spec.family.member(v) {
            Ok(m) => m.comparisons,
            Err(e) => {
                grid.push((v, FamilyComparison { label: String::new(), gamma: vec![], gamma_prime: 0 }, Some(e.to_string())));
                continue;
            }
        };
        for c in comparisons {
            if spec.comparisons.is_empty() || spec.comparisons.contains(&c.label) {
                grid.push((v, c, None));
            }
        }
    }
    if grid.is_empty() {
        return Err(invalid("sweep selects no comparisons"));
    }
    // inner solves run sequentially when the grid itself is spread over threads
    let mut inner = cfg.solver.clone();
    if cfg.solver.execution == Execution::Parallel {
        inner.execution = Execution::Sequential;
    }
    let points = cfg.solver.execution.map_range(grid.len(), |i| {
        let (v, c, err) = &grid[i];
        let result = match err {
            Some(e) => Err(e.clone()),
            None => spec.family.member(*v).map_err(|e| e.to_string()).and_then(|m| {
                let name = format!("{}[{}]:{}", cfg.name, i, c.label);
                compare(&name, &m.boundary, &c.gamma, c.gamma_prime, &inner, cfg.symmetric).map_err(|e| e.to_string())
            }),
        };
        let (report, error) = match result {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e)),
        };
        SweepPoint { index: i, parameter: *v, comparison: c.clone(), report, error }
    });
    Ok(SweepReport { name: cfg.name.clone(), family: spec.family, points })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionLevel {
    pub level: usize,
    pub h: f64,
    pub lambda_smaller: f64,
    pub lambda_larger: f64,
    pub monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub name: String,
    pub smaller: Vec<usize>,
    pub larger: Vec<usize>,
    pub levels: Vec<InclusionLevel>,
    /// `lambda(smaller) <= lambda(larger)` on every level
    pub monotone_every_level: bool,
    /// the larger set adds at least one full arc
    pub adds_full_arc: bool,
    pub margin: f64,
    pub bound: f64,
    pub verdict: Verdict,
}

/// Dirichlet-set inclusion: per-level monotonicity and the extrapolated gap.
pub fn run_inclusion(cfg: &ScenarioConfig) -> Result<InclusionReport, ScenarioError> {
    let spec = cfg.inclusion.as_ref().ok_or_else(|| invalid("config has no `inclusion` block"))?;
    let boundary = cfg.boundary()?;
    if spec.smaller.is_empty() {
        return Err(invalid("inclusion needs a non-empty smaller set"));
    }
    if let Some(&a) = spec.smaller.iter().chain(&spec.larger).find(|&&a| a >= boundary.arc_count()) {
        return Err(invalid(format!("arc {a} does not exist")));
    }
    if let Some(a) = spec.smaller.iter().find(|a| !spec.larger.contains(a)) {
        return Err(invalid(format!("arc {a} of the smaller set is missing from the larger set")));
    }
    let corners = transition_corners(&boundary, &[&spec.smaller, &spec.larger]);
    let meshes = hierarchy_for(&boundary, &cfg.solver, &corners)?;
    let exec = cfg.solver.execution;
    let (a, b) = exec.join(
        || solve_hierarchy(&meshes, &spec.smaller, cfg.solver.tol, exec),
        || solve_hierarchy(&meshes, &spec.larger, cfg.solver.tol, exec),
    );
    let (small, large) = (a?, b?);
    let levels: Vec<InclusionLevel> = small
        .levels
        .iter()
        .zip(&large.levels)
        .map(|(s, l)| InclusionLevel {
            level: s.level,
            h: s.h,
            lambda_smaller: s.lambda,
            lambda_larger: l.lambda,
            monotone: s.lambda <= l.lambda,
        })
        .collect();
    let adds_full_arc = spec.larger.iter().any(|a| !spec.smaller.contains(a));
    let margin = large.best_lambda() - small.best_lambda();
    let v = verdict(margin, large.error_estimate(), small.error_estimate(), !adds_full_arc);
    Ok(InclusionReport {
        name: cfg.name.clone(),
        smaller: spec.smaller.clone(),
        larger: spec.larger.clone(),
        monotone_every_level: levels.iter().all(|l| l.monotone),
        levels,
        adds_full_arc,
        margin,
        bound: VERDICT_FACTOR * (large.error_estimate() + small.error_estimate()),
        verdict: v,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub membership: MembershipReport,
    pub breakdown: IdentityBreakdown,
    pub expected_terms: Option<[f64; 3]>,
    /// `|computed - expected| / max(|expected|, 1)` per term
    pub term_deviation: Option<[f64; 3]>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn run_identity(cfg: &ScenarioConfig) -> Result<IdentityReport, ScenarioError> {
    let spec = cfg.identity.as_ref().ok_or_else(|| invalid("config has no `identity` block"))?;
    let boundary = cfg.boundary()?;
    let f = spec.function.build()?;
    let membership = check_membership(&boundary, &spec.labels, &f)?;
    let opts = IdentityOptions {
        quad_order: spec.quad_order,
        mesh_h: spec.mesh_h,
        boundary_h: spec.boundary_h,
        geometry: spec.geometry,
        execution: cfg.solver.execution,
    };
    let breakdown = identity_residual_with(&boundary, &f, &opts)?;
    let term_deviation = spec.expected_terms.map(|e| {
        let got = [breakdown.term_mixed, breakdown.term_cross, breakdown.term_curv];
        std::array::from_fn(|i| (got[i] - e[i]).abs() / e[i].abs().max(1.0))
    });
    let pass = membership.pass && breakdown.residual.abs() <= spec.tolerance;
    Ok(IdentityReport {
        name: cfg.name.clone(),
        membership,
        breakdown,
        expected_terms: spec.expected_terms,
        term_deviation,
        tolerance: spec.tolerance,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(verdict(1.0, 0.1, 0.1, false), Verdict::VerifiedStrict);
        assert_eq!(verdict(0.6, 0.1, 0.1, false), Verdict::Inconclusive);
        assert_eq!(verdict(0.6, 0.1, 0.1, true), Verdict::EqualWithinTol);
        assert_eq!(verdict(-0.5, 0.1, 0.1, true), Verdict::EqualWithinTol);
        assert_eq!(verdict(-0.7, 0.1, 0.1, true), Verdict::Inconclusive);
        // exactly at the bound is not strict
        assert_eq!(verdict(0.6000000000000001, 0.1, 0.1, false), Verdict::Inconclusive);
    }

    #[test]
    fn config_validation() {
        let ok = r#"{"name":"sq","kind":"compare","domain":{"polygon":[[0,0],[1,0],[1,1],[0,1]]},
                    "partition":{"gamma":[1],"gamma_prime":3}}"#;
        let cfg = ScenarioConfig::from_json(ok).unwrap();
        assert_eq!(cfg.solver.levels, 4);
        assert!(cfg.boundary().is_ok());
        let missing = r#"{"name":"sq","kind":"compare"}"#;
        assert!(ScenarioConfig::from_json(missing).is_err());
        let neg = r#"{"name":"x","solver":{"h0":-1}}"#;
        assert!(ScenarioConfig::from_json(neg).is_err());
        let unknown = r#"{"name":"x","solverr":{}}"#;
        assert!(ScenarioConfig::from_json(unknown).is_err());
    }

    #[test]
    fn sweep_grid() {
        let s = SweepSpec {
            family: Family::ObtuseTriangle,
            values: vec![],
            start: Some(95.0),
            stop: Some(175.0),
            step: Some(10.0),
            comparisons: vec![],
        };
        let g = s.grid_values().unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[8], 175.0);
    }
}
