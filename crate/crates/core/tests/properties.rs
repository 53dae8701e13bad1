use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use zaremba::fem::{assemble, assemble_with, solve_on_mesh, solve_smallest, DEFAULT_TOL};
use zaremba::geometry::{BoundaryArc, DomainBoundary, Point2, RigidMotion};
use zaremba::hypotheses::{check_hypotheses, BoundaryPartition, Classification};
use zaremba::identity::{identity_residual, Factor, ManufacturedFunction, Term};
use zaremba::mesh;
use zaremba::Execution;

fn triangle(alpha: f64, beta: f64) -> DomainBoundary {
    let apex_angle = PI - alpha - beta;
    let side = beta.sin() / apex_angle.sin();
    DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(side * alpha.cos(), side * alpha.sin())]).unwrap()
}

/// base angles in [0.2, 1.3] with an apex angle of at least 0.3
fn base_angles() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..1.3, 0.2f64..1.3).prop_filter("apex angle", |(a, b)| a + b < PI - 0.3)
}

fn motion() -> impl Strategy<Value = RigidMotion> {
    (-PI..PI, -5.0f64..5.0, -5.0f64..5.0).prop_map(|(a, x, y)| RigidMotion::new(a, Point2::new(x, y)))
}

fn dense_smallest(k: &[Vec<f64>], m: &[Vec<f64>]) -> f64 {
    let n = k.len();
    let l = DMatrix::from_fn(n, n, |i, j| m[i][j]).cholesky().unwrap().l();
    let linv = l.try_inverse().unwrap();
    let a = &linv * DMatrix::from_fn(n, n, |i, j| k[i][j]) * linv.transpose();
    SymmetricEigen::new((&a + a.transpose()) * 0.5).eigenvalues.min()
}

fn subset(mask: u8) -> Vec<usize> {
    (0..3).filter(|i| mask & (1 << i) != 0).collect()
}

fn factor() -> impl Strategy<Value = Factor> {
    let leaf = prop_oneof![
        prop::collection::vec(-2.0f64..2.0, 1..5).prop_map(|c| Factor::poly(&c)),
        (0.1f64..3.0, -1.0f64..1.0).prop_map(|(freq, phase)| Factor::Sin { freq, phase }),
        (0.1f64..3.0, -1.0f64..1.0).prop_map(|(freq, phase)| Factor::Cos { freq, phase }),
    ];
    leaf.prop_recursive(2, 6, 3, |inner| prop::collection::vec(inner, 2..4).prop_map(|factors| Factor::Product { factors }))
}

fn manufactured() -> impl Strategy<Value = ManufacturedFunction> {
    prop::collection::vec((-2.0f64..2.0, factor(), factor()), 1..4)
        .prop_map(|ts| ManufacturedFunction::new(ts.into_iter().map(|(coef, fx, gy)| Term { coef, fx, gy }).collect()))
}

/// Product of the affine forms vanishing on each side, expanded into monomial terms.
fn vanishing_on_sides(b: &DomainBoundary) -> ManufacturedFunction {
    let mut poly: BTreeMap<(usize, usize), f64> = BTreeMap::from([((0, 0), 1.0)]);
    for arc in b.arcs() {
        let (p, q) = (arc.start(), arc.end());
        // inward-positive form c0 + cx x + cy y
        let (cx, cy) = (-(q.y - p.y), q.x - p.x);
        let c0 = -(cx * p.x + cy * p.y);
        let mut next = BTreeMap::new();
        for (&(i, j), &c) in &poly {
            *next.entry((i, j)).or_insert(0.0) += c * c0;
            *next.entry((i + 1, j)).or_insert(0.0) += c * cx;
            *next.entry((i, j + 1)).or_insert(0.0) += c * cy;
        }
        poly = next;
    }
    let mono = |k: usize| {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Factor::poly(&c)
    };
    ManufacturedFunction::new(poly.into_iter().map(|((i, j), coef)| Term { coef, fx: mono(i), gy: mono(j) }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hypotheses_are_invariant_under_rigid_motion_and_scaling(
        (alpha, beta) in base_angles(),
        m in motion(),
        c in 0.1f64..10.0,
        gamma in 0usize..3,
        offset in 1usize..3,
    ) {
        let b = triangle(alpha, beta);
        let gp = (gamma + offset) % 3;
        let base = check_hypotheses(&b, &BoundaryPartition::new(&b, &[gamma], gp).unwrap()).unwrap();
        for moved in [b.transformed(&m).unwrap(), b.scaled(c).unwrap()] {
            let r = check_hypotheses(&moved, &BoundaryPartition::new(&moved, &[gamma], gp).unwrap()).unwrap();
            prop_assert_eq!(r.classification, base.classification);
            prop_assert_eq!(r.monotonicity.pass, base.monotonicity.pass);
            prop_assert!((r.angle_check.angle_at_p0 - base.angle_check.angle_at_p0).abs() < 1e-9);
            prop_assert!((r.angle_check.angle_at_pn - base.angle_check.angle_at_pn).abs() < 1e-9);
            prop_assert_eq!(r.monotonicity.violations.len(), base.monotonicity.violations.len());
        }
    }

    #[test]
    fn collinear_split_of_remainder_changes_nothing((alpha, beta) in base_angles(), at in 0.05f64..0.95) {
        let b = triangle(alpha, beta);
        let c = b.corners();
        let mid = c[2] + (c[0] - c[2]) * at;
        let split = DomainBoundary::polygon(&[c[0], c[1], c[2], mid]).unwrap();
        split.ensure_valid().unwrap();
        for (gamma, gp) in [(0, 1), (1, 0)] {
            let r0 = check_hypotheses(&b, &BoundaryPartition::new(&b, &[gamma], gp).unwrap()).unwrap();
            let r1 = check_hypotheses(&split, &BoundaryPartition::new(&split, &[gamma], gp).unwrap()).unwrap();
            prop_assert_eq!(r1.classification, r0.classification);
            prop_assert_eq!(r1.monotonicity.pass, r0.monotonicity.pass);
            prop_assert!((r1.angle_check.margin - r0.angle_check.margin).abs() < 1e-12);
        }
    }

    #[test]
    fn manufactured_derivatives_match_finite_differences(f in manufactured(), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let e = 1e-5;
        let p = Point2::new(x, y);
        let j = f.jet(p);
        let at = |dx: f64, dy: f64| f.jet(Point2::new(x + dx, y + dy));
        let scale = 1.0 + [j.u, j.ux, j.uy, j.uxx, j.uyy, j.uxy].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let checks = [
            (j.ux, (at(e, 0.0).u - at(-e, 0.0).u) / (2.0 * e)),
            (j.uy, (at(0.0, e).u - at(0.0, -e).u) / (2.0 * e)),
            (j.uxx, (at(e, 0.0).ux - at(-e, 0.0).ux) / (2.0 * e)),
            (j.uyy, (at(0.0, e).uy - at(0.0, -e).uy) / (2.0 * e)),
            (j.uxy, (at(0.0, e).ux - at(0.0, -e).ux) / (2.0 * e)),
            (j.uxy, (at(e, 0.0).uy - at(-e, 0.0).uy) / (2.0 * e)),
        ];
        for (exact, fd) in checks {
            prop_assert!((exact - fd).abs() < 1e-7 * scale, "{exact} vs {fd}");
        }
    }

    #[test]
    fn identity_holds_for_functions_vanishing_on_a_triangle((alpha, beta) in base_angles(), m in motion()) {
        let b = triangle(alpha, beta).transformed(&m).unwrap();
        let f = vanishing_on_sides(&b);
        let r = identity_residual(&b, &f, 6).unwrap();
        prop_assert!(r.term_curv.abs() < 1e-12);
        prop_assert!(r.term_cross > 0.0);
        prop_assert!(r.residual.abs() < 1e-9 * r.term_cross.max(1.0), "{:?}", r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvature_term_is_nonpositive_on_a_disk(f in manufactured()) {
        let disk = DomainBoundary::new(vec![
            BoundaryArc::circular(Point2::new(0.0, 0.0), 1.0, 0.0, PI).unwrap(),
            BoundaryArc::circular(Point2::new(0.0, 0.0), 1.0, PI, 2.0 * PI).unwrap(),
        ])
        .unwrap();
        let r = identity_residual(&disk, &f, 4).unwrap();
        prop_assert!(r.term_curv <= 0.0);
    }

    #[test]
    fn sparse_solver_matches_dense_oracle((alpha, beta) in base_angles(), mask in 1u8..8) {
        let b = triangle(alpha, beta);
        let m = mesh::generate(&b, 0.1, None).unwrap();
        let (k, mm, dofs) = assemble(&m, &subset(mask)).unwrap();
        prop_assume!(dofs.n_free() <= 300);
        let r = solve_smallest(&k, &mm, DEFAULT_TOL).unwrap();
        let dense = dense_smallest(&k.to_dense(), &mm.to_dense());
        prop_assert!((r.lambda - dense).abs() < 1e-9 * dense, "{} vs {dense}", r.lambda);
        prop_assert!(r.vector.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn eigenvalues_scale_and_move_with_the_mesh((alpha, beta) in base_angles(), mask in 1u8..8, c in 0.2f64..5.0, mv in motion()) {
        let m = mesh::generate(&triangle(alpha, beta), 0.1, None).unwrap();
        let arcs = subset(mask);
        let lambda = |m: &mesh::Mesh| solve_on_mesh(m, &arcs, DEFAULT_TOL, None, Execution::Sequential).unwrap().0.lambda;
        let l0 = lambda(&m);
        prop_assert!((lambda(&m.mapped(|p| p * c)) * c * c - l0).abs() < 1e-12 * l0);
        prop_assert!((lambda(&m.mapped(|p| mv.apply(p))) - l0).abs() < 1e-12 * l0);
    }

    #[test]
    fn discrete_eigenvalue_increases_with_dirichlet_set((alpha, beta) in base_angles()) {
        let m = mesh::generate(&triangle(alpha, beta), 0.1, None).unwrap();
        let lambdas: Vec<f64> = (1u8..8)
            .map(|mask| solve_on_mesh(&m, &subset(mask), DEFAULT_TOL, None, Execution::Sequential).unwrap().0.lambda)
            .collect();
        for a in 1u8..8 {
            for b in 1u8..8 {
                if a != b && a & b == a {
                    prop_assert!(lambdas[a as usize - 1] < lambdas[b as usize - 1]);
                }
            }
        }
    }

    #[test]
    fn execution_modes_are_bit_identical((alpha, beta) in base_angles(), mask in 1u8..8) {
        let m = mesh::generate(&triangle(alpha, beta), 0.08, None).unwrap();
        let (ks, ms, _) = assemble_with(&m, &subset(mask), Execution::Sequential).unwrap();
        let (kp, mp, _) = assemble_with(&m, &subset(mask), Execution::Parallel).unwrap();
        prop_assert!(ks == kp && ms == mp);
        let seq = solve_on_mesh(&m, &subset(mask), DEFAULT_TOL, None, Execution::Sequential).unwrap().0;
        let par = solve_on_mesh(&m, &subset(mask), DEFAULT_TOL, None, Execution::Parallel).unwrap().0;
        prop_assert_eq!(seq.lambda.to_bits(), par.lambda.to_bits());
        prop_assert_eq!(seq.vector, par.vector);
    }
}

#[test]
fn right_triangle_hypotheses_classify_as_remainder_monotone() {
    // legs on the axes; gamma is the hypotenuse, gamma' the vertical leg
    let b = DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 1.0)]).unwrap();
    let r = check_hypotheses(&b, &BoundaryPartition::new(&b, &[1], 2).unwrap()).unwrap();
    assert_eq!(r.classification, Classification::MonotoneRemainder);
}
