//! Geometric hypotheses for comparing two Dirichlet parts `Gamma` and `Gamma'` of one boundary.
//!
//! `Gamma'` is a straight segment with constant outward normal `b`. Both comparison results
//! need interior angles strictly below `pi/2` at the two end points of `Gamma`. When `Gamma`
//! and `Gamma'` do not exhaust the boundary, the remainder must additionally keep
//! `t = (b . tau)(b . nu)` non-increasing in positive orientation, including at corners
//! (left limit >= right limit).

use crate::geometry::{DomainBoundary, GeometryError, Point2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

pub const DEFAULT_TOL_ANGLE: f64 = 1e-9;
pub const DEFAULT_TOL_MONO: f64 = 1e-10;
pub const DEFAULT_PROFILE_SAMPLES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypothesisError {
    #[error("arc id {0} out of range")]
    UnknownArc(usize),
    #[error("gamma must be non-empty")]
    EmptyGamma,
    #[error("gamma and gamma' overlap at arc {0}")]
    Overlap(usize),
    #[error("gamma' (arc {0}) must be a straight segment")]
    GammaPrimeNotSegment(usize),
    #[error("gamma is not connected along the boundary")]
    DisconnectedGamma,
    #[error("need at least two samples per arc")]
    TooFewSamples,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Labels `Gamma`, `Gamma'` and the remaining arcs, ordered from the end of `Gamma`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryPartition {
    /// arc ids of `Gamma` in positive orientation
    gamma: Vec<usize>,
    gamma_prime: usize,
    /// `Sigma_1 .. Sigma_N` from `P_0` (end of `Gamma`) to `P_N` (start of `Gamma`)
    remainder: Vec<usize>,
    b: Point2,
    /// boundary corner index of `P_0`
    p0_corner: usize,
    /// boundary corner index of `P_N`
    pn_corner: usize,
}

impl BoundaryPartition {
    pub fn new(boundary: &DomainBoundary, gamma: &[usize], gamma_prime: usize) -> Result<Self, HypothesisError> {
        let n = boundary.arc_count();
        if gamma.is_empty() {
            return Err(HypothesisError::EmptyGamma);
        }
        let mut in_gamma = vec![false; n];
        for &g in gamma {
            if g >= n {
                return Err(HypothesisError::UnknownArc(g));
            }
            in_gamma[g] = true;
        }
        if gamma_prime >= n {
            return Err(HypothesisError::UnknownArc(gamma_prime));
        }
        if in_gamma[gamma_prime] {
            return Err(HypothesisError::Overlap(gamma_prime));
        }
        let b = normal_of_gamma_prime(boundary, gamma_prime)?;
        let starts: Vec<usize> = (0..n).filter(|&i| in_gamma[i] && !in_gamma[(i + n - 1) % n]).collect();
        if starts.len() != 1 {
            return Err(HypothesisError::DisconnectedGamma);
        }
        let first = starts[0];
        let mut ordered = Vec::new();
        let mut i = first;
        while in_gamma[i] {
            ordered.push(i);
            i = (i + 1) % n;
        }
        let p0_corner = i;
        let mut remainder = Vec::new();
        while i != first {
            remainder.push(i);
            i = (i + 1) % n;
        }
        Ok(BoundaryPartition { gamma: ordered, gamma_prime, remainder, b, p0_corner, pn_corner: first })
    }

    pub fn gamma(&self) -> &[usize] {
        &self.gamma
    }

    pub fn gamma_prime(&self) -> usize {
        self.gamma_prime
    }

    pub fn remainder(&self) -> &[usize] {
        &self.remainder
    }

    /// Outward unit normal of `Gamma'`.
    pub fn b(&self) -> Point2 {
        self.b
    }

    /// `Gamma` and `Gamma'` cover the whole boundary.
    pub fn is_complementary(&self) -> bool {
        self.remainder == [self.gamma_prime]
    }

    pub fn p0_corner(&self) -> usize {
        self.p0_corner
    }

    pub fn pn_corner(&self) -> usize {
        self.pn_corner
    }
}

/// Constant outward unit normal of the segment `gamma_prime`.
pub fn normal_of_gamma_prime(boundary: &DomainBoundary, gamma_prime: usize) -> Result<Point2, HypothesisError> {
    let arc = boundary.arcs().get(gamma_prime).ok_or(HypothesisError::UnknownArc(gamma_prime))?;
    if !arc.is_segment() {
        return Err(HypothesisError::GammaPrimeNotSegment(gamma_prime));
    }
    Ok(arc.frame(0.0).nu)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub s: f64,
    pub value: f64,
    /// analytic `d t / d s = kappa ((b.nu)^2 - (b.tau)^2)`
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcProfile {
    pub arc: usize,
    pub is_gamma_prime: bool,
    pub samples: Vec<ProfileSample>,
}

/// One-sided limits of `t` at an interior corner `P_j` of the remainder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerLimits {
    /// index `j` in `P_1 .. P_{N-1}`
    pub j: usize,
    /// boundary corner index
    pub corner: usize,
    pub point: Point2,
    pub left: f64,
    pub right: f64,
}

/// `t = (b . tau)(b . nu)` along the remainder `Sigma_1 .. Sigma_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityProfile {
    pub b: Point2,
    pub arcs: Vec<ArcProfile>,
    pub corners: Vec<CornerLimits>,
}

fn profile_value(b: Point2, tau: Point2, nu: Point2) -> f64 {
    b.dot(tau) * b.dot(nu)
}

pub fn monotonicity_profile(
    boundary: &DomainBoundary,
    partition: &BoundaryPartition,
    samples_per_arc: usize,
) -> Result<MonotonicityProfile, HypothesisError> {
    if samples_per_arc < 2 {
        return Err(HypothesisError::TooFewSamples);
    }
    let b = partition.b;
    let arcs = partition
        .remainder
        .iter()
        .map(|&id| {
            let arc = boundary.arc(id);
            let is_gamma_prime = id == partition.gamma_prime;
            let samples = (0..samples_per_arc)
                .map(|k| {
                    let s = arc.length() * k as f64 / (samples_per_arc - 1) as f64;
                    if is_gamma_prime {
                        return ProfileSample { s, value: 0.0, derivative: 0.0 };
                    }
                    let f = arc.frame(s);
                    let kappa = arc.curvature(s);
                    let (bt, bn) = (b.dot(f.tau), b.dot(f.nu));
                    ProfileSample { s, value: bt * bn, derivative: kappa * (bn * bn - bt * bt) }
                })
                .collect();
            ArcProfile { arc: id, is_gamma_prime, samples }
        })
        .collect();
    let n = partition.remainder.len();
    let corners = (1..n)
        .map(|j| {
            let (prev, next) = (partition.remainder[j - 1], partition.remainder[j]);
            let one_sided = |id: usize, at_end: bool| {
                if id == partition.gamma_prime {
                    return 0.0;
                }
                let arc = boundary.arc(id);
                let f = arc.frame(if at_end { arc.length() } else { 0.0 });
                profile_value(b, f.tau, f.nu)
            };
            CornerLimits { j, corner: next, point: boundary.corners()[next], left: one_sided(prev, true), right: one_sided(next, false) }
        })
        .collect();
    Ok(MonotonicityProfile { b, arcs, corners })
}

impl MonotonicityProfile {
    /// Difference quotients between consecutive samples, per arc.
    pub fn finite_difference_slopes(&self) -> Vec<Vec<f64>> {
        self.arcs.iter().map(|a| a.samples.windows(2).map(|w| (w[1].value - w[0].value) / (w[1].s - w[0].s)).collect()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    InteriorIncrease,
    CornerUpJump,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Location {
    Arc { arc: usize, s: f64 },
    Corner { j: usize, corner: usize, point: Point2 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub location: Location,
    pub kind: ViolationKind,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityCheck {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

/// Non-increase of the profile: analytic slope `<= tol` on every arc and no corner up-jump beyond `tol`.
pub fn check_monotonicity(profile: &MonotonicityProfile, tol: f64) -> MonotonicityCheck {
    let mut violations = Vec::new();
    for a in &profile.arcs {
        let worst = a.samples.iter().max_by(|x, y| x.derivative.total_cmp(&y.derivative));
        if let Some(w) = worst {
            if w.derivative > tol {
                violations.push(Violation {
                    location: Location::Arc { arc: a.arc, s: w.s },
                    kind: ViolationKind::InteriorIncrease,
                    magnitude: w.derivative,
                });
            }
        }
    }
    for c in &profile.corners {
        let jump = c.right - c.left;
        if jump > tol {
            violations.push(Violation {
                location: Location::Corner { j: c.j, corner: c.corner, point: c.point },
                kind: ViolationKind::CornerUpJump,
                magnitude: jump,
            });
        }
    }
    MonotonicityCheck { pass: violations.is_empty(), violations }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleCheck {
    pub angle_at_p0: f64,
    pub angle_at_pn: f64,
    pub pass: bool,
    /// `pi/2 - max(angle_at_p0, angle_at_pn)`
    pub margin: f64,
}

/// Which comparison result the hypotheses support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    /// `Gamma`, `Gamma'` complementary with acute end angles of `Gamma`.
    Complementary,
    /// Non-complementary, acute end angles, connected `Gamma`, monotone remainder profile.
    MonotoneRemainder,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub angle_check: AngleCheck,
    pub complementary: bool,
    pub gamma_connected: bool,
    pub monotonicity: MonotonicityCheck,
    /// a reflection of the domain swaps `Gamma` and `Gamma'`
    pub mirror_symmetric: bool,
    pub classification: Classification,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HypothesisOptions {
    pub samples_per_arc: usize,
    pub tol_angle: f64,
    pub tol_mono: f64,
}

impl Default for HypothesisOptions {
    fn default() -> Self {
        HypothesisOptions { samples_per_arc: DEFAULT_PROFILE_SAMPLES, tol_angle: DEFAULT_TOL_ANGLE, tol_mono: DEFAULT_TOL_MONO }
    }
}

pub fn check_hypotheses(boundary: &DomainBoundary, partition: &BoundaryPartition) -> Result<HypothesisReport, HypothesisError> {
    check_hypotheses_with(boundary, partition, &HypothesisOptions::default())
}

pub fn check_hypotheses_with(
    boundary: &DomainBoundary,
    partition: &BoundaryPartition,
    opts: &HypothesisOptions,
) -> Result<HypothesisReport, HypothesisError> {
    let angles = boundary.interior_angles();
    let angle_at_p0 = angles[partition.p0_corner];
    let angle_at_pn = angles[partition.pn_corner];
    let margin = FRAC_PI_2 - angle_at_p0.max(angle_at_pn);
    let angle_check = AngleCheck { angle_at_p0, angle_at_pn, pass: margin > opts.tol_angle, margin };
    let complementary = partition.is_complementary();
    let profile = monotonicity_profile(boundary, partition, opts.samples_per_arc)?;
    let monotonicity = check_monotonicity(&profile, opts.tol_mono);
    // BoundaryPartition::new refuses a disconnected gamma
    let gamma_connected = true;
    let classification = if complementary && angle_check.pass {
        Classification::Complementary
    } else if !complementary && angle_check.pass && monotonicity.pass && gamma_connected {
        Classification::MonotoneRemainder
    } else {
        Classification::None
    };
    Ok(HypothesisReport {
        angle_check,
        complementary,
        gamma_connected,
        monotonicity,
        mirror_symmetric: mirror_swaps(boundary, partition),
        classification,
    })
}

/// Detects a reflection of a polygonal domain that exchanges a single-segment `Gamma` with `Gamma'`.
pub fn mirror_swaps(boundary: &DomainBoundary, partition: &BoundaryPartition) -> bool {
    if partition.gamma.len() != 1 || !boundary.arcs().iter().all(|a| a.is_segment()) {
        return false;
    }
    let g = boundary.arc(partition.gamma[0]);
    let gp = boundary.arc(partition.gamma_prime);
    if (g.length() - gp.length()).abs() > 1e-9 * g.length() {
        return false;
    }
    let (mg, mgp) = (g.start().midpoint(g.end()), gp.start().midpoint(gp.end()));
    let axis_normal = (mgp - mg).normalized();
    let origin = mg.midpoint(mgp);
    let reflect = |p: Point2| p - axis_normal * (2.0 * (p - origin).dot(axis_normal));
    let tol = 1e-9 * boundary.diameter().max(1.0);
    let corners = boundary.corners();
    let maps_onto = |p: Point2, set: &[Point2]| set.iter().any(|q| q.distance(p) <= tol);
    corners.iter().all(|&c| maps_onto(reflect(c), corners))
        && maps_onto(reflect(g.start()), &[gp.start(), gp.end()])
        && maps_onto(reflect(g.end()), &[gp.start(), gp.end()])
}
