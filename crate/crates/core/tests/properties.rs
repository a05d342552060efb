use proptest::prelude::*;
use robust::{Coord, Coord3D};

use delone::delaunay::{delaunay, empty_simplices};
use delone::functionals::{eval, FunctionalKind, FunctionalSpec};
use delone::geometry::{area_via_circumradius, circumradius, measure, Point};
use delone::{in_sphere, orientation, InSphere, Orientation};

fn c2(p: &[f64]) -> Coord<f64> {
    Coord { x: p[0], y: p[1] }
}

fn c3(p: &[f64]) -> Coord3D<f64> {
    Coord3D { x: p[0], y: p[1], z: p[2] }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Small integer coordinates scaled by a power of two: exact ties are common.
fn grid_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((-4i32..=4).prop_map(|v| v as f64 * 0.125), d)
}

fn real_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, d)
}

fn rotate(p: &[f64], t: f64, shift: &[f64]) -> Vec<f64> {
    let (s, c) = t.sin_cos();
    let mut q = p.to_vec();
    q[0] = c * p[0] - s * p[1] + shift[0];
    q[1] = s * p[0] + c * p[1] + shift[1];
    for i in 2..q.len() {
        q[i] += shift[i];
    }
    q
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn area_identity(s in prop::collection::vec(real_point(2), 3)) {
        let area = measure(&s).unwrap();
        prop_assume!(area > 1e-3);
        let d = |i: usize, j: usize| ((s[i][0] - s[j][0]).powi(2) + (s[i][1] - s[j][1]).powi(2)).sqrt();
        let rho = circumradius(&s).unwrap();
        let via = area_via_circumradius(d(0, 1), d(1, 2), d(2, 0), rho).unwrap();
        prop_assert!((via - area).abs() <= 1e-9 * area.max(1.0));
    }

    #[test]
    fn orientation_matches_exact_oracle_2d(s in prop::collection::vec(grid_point(2), 3)) {
        let expect = sign(robust::orient2d(c2(&s[0]), c2(&s[1]), c2(&s[2])));
        prop_assert_eq!(orientation(&s).unwrap().sign(), expect);
    }

    #[test]
    fn orientation_matches_exact_oracle_3d(s in prop::collection::vec(grid_point(3), 4)) {
        let expect = -sign(robust::orient3d(c3(&s[0]), c3(&s[1]), c3(&s[2]), c3(&s[3])));
        prop_assert_eq!(orientation(&s).unwrap().sign(), expect);
    }

    #[test]
    fn in_sphere_matches_exact_oracle_2d(s in prop::collection::vec(grid_point(2), 4)) {
        let o = robust::orient2d(c2(&s[0]), c2(&s[1]), c2(&s[2]));
        prop_assume!(o != 0.0);
        let ic = sign(robust::incircle(c2(&s[0]), c2(&s[1]), c2(&s[2]), c2(&s[3])) * o);
        let expect = match ic { 1 => InSphere::Inside, 0 => InSphere::On, _ => InSphere::Outside };
        prop_assert_eq!(in_sphere(&s[..3], &s[3]).unwrap(), expect);
    }

    #[test]
    fn in_sphere_matches_exact_oracle_3d(s in prop::collection::vec(grid_point(3), 5)) {
        let o = robust::orient3d(c3(&s[0]), c3(&s[1]), c3(&s[2]), c3(&s[3]));
        prop_assume!(o != 0.0);
        let is = sign(robust::insphere(c3(&s[0]), c3(&s[1]), c3(&s[2]), c3(&s[3]), c3(&s[4])) * o);
        let expect = match is { 1 => InSphere::Inside, 0 => InSphere::On, _ => InSphere::Outside };
        prop_assert_eq!(in_sphere(&s[..4], &s[4]).unwrap(), expect);
    }

    #[test]
    fn in_sphere_ignores_vertex_order(s in prop::collection::vec(real_point(3), 5), perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle()) {
        prop_assume!(orientation(&s[..4]).unwrap() != Orientation::Degenerate);
        let permuted: Vec<&Vec<f64>> = perm.iter().map(|&i| &s[i]).collect();
        prop_assert_eq!(in_sphere(&s[..4], &s[4]).unwrap(), in_sphere(&permuted, &s[4]).unwrap());
    }

    #[test]
    fn functionals_are_rigid_motion_invariant(
        s in prop::collection::vec(real_point(2), 3),
        t in 0.0f64..std::f64::consts::TAU,
        shift in real_point(3),
    ) {
        prop_assume!(measure(&s).unwrap() > 1e-2);
        let moved: Vec<Vec<f64>> = s.iter().map(|p| rotate(p, t, &shift)).collect();
        for kind in FunctionalKind::ALL {
            let f = FunctionalSpec::new(kind);
            let (a, b) = (eval(&f, &s).unwrap(), eval(&f, &moved).unwrap());
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{} {} {}", kind.name(), a, b);
        }
    }

    #[test]
    fn functionals_3d_are_rigid_motion_invariant(
        s in prop::collection::vec(real_point(3), 4),
        t in 0.0f64..std::f64::consts::TAU,
        shift in real_point(3),
    ) {
        prop_assume!(measure(&s).unwrap() > 1e-1);
        let moved: Vec<Vec<f64>> = s.iter().map(|p| rotate(p, t, &shift)).collect();
        for kind in FunctionalKind::ALL.into_iter().filter(|k| k.supports(3)) {
            let f = FunctionalSpec::new(kind);
            let (a, b) = (eval(&f, &s).unwrap(), eval(&f, &moved).unwrap());
            prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{} {} {}", kind.name(), a, b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn delaunay_cells_are_exactly_the_empty_simplices(raw in prop::collection::vec(real_point(2), 4..24)) {
        let pts: Vec<Point> = raw.into_iter().enumerate().map(|(i, c)| Point::new(i, c).unwrap()).collect();
        let cx = delaunay(pts.clone()).unwrap();
        let mut got: Vec<Vec<usize>> = cx.cells().iter().map(|c| c.to_vec()).collect();
        let mut want = empty_simplices(&pts);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn delaunay_3d_cells_are_exactly_the_empty_simplices(raw in prop::collection::vec(real_point(3), 5..16)) {
        let pts: Vec<Point> = raw.into_iter().enumerate().map(|(i, c)| Point::new(i, c).unwrap()).collect();
        let cx = delaunay(pts.clone()).unwrap();
        let mut got: Vec<Vec<usize>> = cx.cells().iter().map(|c| c.to_vec()).collect();
        let mut want = empty_simplices(&pts);
        got.sort();
        want.sort();
        prop_assert_eq!(got, want);
    }
}
