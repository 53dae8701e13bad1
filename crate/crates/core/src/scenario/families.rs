use crate::geometry::{DomainBoundary, GeometryError, Point2};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

/// Parameterized domain families for sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// parameter: largest angle in degrees, in (90, 180)
    ObtuseTriangle,
    /// parameter: smallest angle in degrees, in (0, 45]
    RightTriangle,
    /// parameter: shorter base over longer base, in (0, 1)
    AcuteTrapezium,
    /// parameter: the angle defect in radians, in (0, pi/4)
    DeltaQuadrilateral,
}

/// One comparison of a family member: `gamma` against the single segment `gamma_prime`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyComparison {
    pub label: String,
    pub gamma: Vec<usize>,
    pub gamma_prime: usize,
}

#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub boundary: DomainBoundary,
    pub comparisons: Vec<FamilyComparison>,
}

fn cmp(label: &str, gamma: usize, gamma_prime: usize) -> FamilyComparison {
    FamilyComparison { label: label.into(), gamma: vec![gamma], gamma_prime }
}

/// Triangle with base `(0,0)-(1,0)` and base angles `alpha < beta` (radians).
///
/// Arc 0 is the base (longest side when the apex angle is largest), arc 1 is opposite `alpha`
/// (shortest side), arc 2 is opposite `beta`.
pub fn triangle_from_base_angles(alpha: f64, beta: f64) -> Result<DomainBoundary, GeometryError> {
    let apex_angle = std::f64::consts::PI - alpha - beta;
    let side = beta.sin() / apex_angle.sin();
    let apex = Point2::new(side * alpha.cos(), side * alpha.sin());
    DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), apex])
}

/// Trapezium with longer base `(0,0)-(1,0)` and shorter base of length `ratio` centred at height 1/2.
///
/// Arc 0 is the longer base, arc 2 the shorter one.
pub fn acute_trapezium(ratio: f64) -> Result<DomainBoundary, GeometryError> {
    let (l, r) = (0.5 - 0.5 * ratio, 0.5 + 0.5 * ratio);
    DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(r, 0.5), Point2::new(l, 0.5)])
}

/// Quadrilateral degenerating to an obtuse triangle as `delta -> 0`.
///
/// Arc 0 is the vertical side `(0,2.5) -> (0,0)`, arc 1 has slope -1, arc 2 slope
/// `-tan(pi/4 - delta)`, arc 3 closes the chain back to the top. Corner 2 joins arcs 1 and 2.
pub fn delta_quadrilateral(delta: f64) -> Result<DomainBoundary, GeometryError> {
    let p0 = Point2::new(0.0, 2.5);
    let p1 = Point2::new(0.0, 0.0);
    let p2 = Point2::new(1.75, -1.75);
    let dir = Point2::new((FRAC_PI_4 - delta).cos(), -(FRAC_PI_4 - delta).sin());
    let p3 = p2 + dir * 3.75;
    DomainBoundary::polygon(&[p0, p1, p2, p3])
}

impl Family {
    pub fn member(self, parameter: f64) -> Result<FamilyMember, GeometryError> {
        let bad = |what: &str| GeometryError::InvalidArc(format!("{what} parameter {parameter} out of range"));
        match self {
            Family::ObtuseTriangle | Family::RightTriangle => {
                let (alpha, beta) = if self == Family::ObtuseTriangle {
                    if !(parameter > 90.0 && parameter < 180.0) {
                        return Err(bad("obtuse triangle"));
                    }
                    let rest = (180.0 - parameter).to_radians();
                    (0.4 * rest, 0.6 * rest)
                } else {
                    if !(parameter > 0.0 && parameter <= 45.0) {
                        return Err(bad("right triangle"));
                    }
                    (parameter.to_radians(), (90.0 - parameter).to_radians())
                };
                Ok(FamilyMember {
                    boundary: triangle_from_base_angles(alpha, beta)?,
                    comparisons: vec![cmp("S_vs_L", 0, 1), cmp("M_vs_L", 0, 2)],
                })
            }
            Family::AcuteTrapezium => {
                if !(parameter > 0.0 && parameter < 1.0) {
                    return Err(bad("trapezium"));
                }
                Ok(FamilyMember { boundary: acute_trapezium(parameter)?, comparisons: vec![cmp("S_vs_L", 0, 2)] })
            }
            Family::DeltaQuadrilateral => {
                if !(parameter > 0.0 && parameter < FRAC_PI_4) {
                    return Err(bad("delta quadrilateral"));
                }
                Ok(FamilyMember { boundary: delta_quadrilateral(parameter)?, comparisons: vec![cmp("gamma_prime_vs_gamma", 3, 0)] })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_sides_are_ordered() {
        for gamma in [95.0, 135.0, 175.0] {
            let m = Family::ObtuseTriangle.member(gamma).unwrap();
            let len: Vec<f64> = m.boundary.arcs().iter().map(|a| a.length()).collect();
            assert!(len[1] < len[2] && len[2] < len[0]);
            let apex = m.boundary.interior_angles()[2].to_degrees();
            assert!((apex - gamma).abs() < 1e-9);
        }
        let r = Family::RightTriangle.member(30.0).unwrap();
        assert!((r.boundary.interior_angles()[2] - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn delta_quadrilateral_angles() {
        let d = delta_quadrilateral(0.1).unwrap();
        let a = d.interior_angles();
        assert!((a[1] - 3.0 * FRAC_PI_4).abs() < 1e-12);
        assert!((a[2] - (std::f64::consts::PI - 0.1)).abs() < 1e-12);
        assert!(a[0] < std::f64::consts::FRAC_PI_2 && a[3] < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn trapezium_is_acute_at_long_base() {
        for r in [0.2, 0.5, 0.9] {
            let a = acute_trapezium(r).unwrap().interior_angles().to_vec();
            assert!(a[0] < std::f64::consts::FRAC_PI_2 && a[1] < std::f64::consts::FRAC_PI_2);
        }
        assert!(Family::AcuteTrapezium.member(1.0).is_err());
    }
}
