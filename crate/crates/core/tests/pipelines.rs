use delone::clip::restrict_delaunay;
use delone::delaunay::delaunay_window;
use delone::density::{alpha_grid, center_invariance_gap, count_certificate, density_sequence, main_theorem_comparison, safe_max_alpha};
use delone::functionals::FunctionalSpec;
use delone::generators::{lattice_window, poisson_delone_window, verify_delone_params};
use delone::io::{read_points, write_points};
use delone::prefix::{build_unbounded_prefix, interior_points, nearest_pair};
use delone::Error;

fn spec(s: &str) -> FunctionalSpec {
    s.parse().unwrap()
}

#[test]
fn lattice_count_matches_gauss_circle() {
    let win = lattice_window(2, 10.0, Some(1)).unwrap();
    let brute = (-10i32..=10).flat_map(|x| (-10i32..=10).map(move |y| (x, y))).filter(|(x, y)| x * x + y * y <= 100).count();
    assert_eq!(brute, 317);
    assert_eq!(win.points.len(), brute);
    let cx = delaunay_window(&win).unwrap();
    let cert = count_certificate(&win, &cx).unwrap();
    assert_eq!(cert.points, 317);
    assert!(cert.pass, "{cert:?}");
}

#[test]
fn area_density_tends_to_one() {
    let win = lattice_window(2, 40.0, Some(2)).unwrap();
    let cx = delaunay_window(&win).unwrap();
    let q = cx.interior_bound_q(40.0);
    let top = safe_max_alpha(&cx, &[0.0, 0.0]).unwrap();
    let grid = alpha_grid(10.0, top, 1.2).unwrap();
    let seq = density_sequence(&cx, &spec("AREA"), &[0.0, 0.0], &grid).unwrap();
    for (a, f) in grid.iter().zip(&seq.values) {
        // the missing area lies in an annulus of width 2q
        assert!(*f <= 1.0 + 1e-12 && 1.0 - f <= 4.0 * q / a, "alpha {a}: {f}");
    }
    assert!(seq.ball_values.iter().zip(&seq.values).all(|(b, v)| b <= v));
}

#[test]
fn center_gap_within_annulus_bound() {
    let win = poisson_delone_window(0.4, 1.5, 30.0, 2, 4).unwrap();
    let cx = delaunay_window(&win).unwrap();
    let grid = alpha_grid(8.0, 20.0, 1.1).unwrap();
    let rep = center_invariance_gap(&cx, &spec("F5"), &[3.0, -2.0], &grid).unwrap();
    assert!(rep.bound_ok);
    assert!(matches!(
        center_invariance_gap(&cx, &spec("F5"), &[3.0, -2.0], &[29.0]),
        Err(Error::UnsafeGrid { .. })
    ));
}

#[test]
fn comparison_on_jittered_lattice() {
    let win = lattice_window(2, 25.0, Some(3)).unwrap();
    let rep = main_theorem_comparison(&win, &spec("FR"), 20, 4, None).unwrap();
    assert_eq!(rep.flipped_edges.len(), 20);
    assert!(rep.slack_pass && rep.first_bracket_pass && rep.containment_pass);
    assert!(rep.pass);
    for row in &rep.rows {
        let total = row.first_bracket + row.second_bracket;
        assert!((total - (row.sigma_t - row.sigma_d)).abs() <= 1e-9 * (row.sigma_t.abs() + 1.0));
    }
}

#[test]
fn restricted_delaunay_of_itself_is_itself() {
    let win = poisson_delone_window(0.4, 1.5, 12.0, 2, 6).unwrap();
    let cx = delaunay_window(&win).unwrap();
    let sub = cx.subcomplex(|c| cx.cell_coords(c).iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 36.0));
    let back = restrict_delaunay(&cx, &sub).unwrap();
    assert_eq!(back.cell_set(), sub.cell_set());
}

#[test]
fn point_file_round_trip_keeps_the_triangulation() {
    let win = poisson_delone_window(0.4, 1.5, 10.0, 2, 8).unwrap();
    assert!(verify_delone_params(&win).pass);
    let mut buf = vec![];
    write_points(&win, &mut buf).unwrap();
    let back = read_points(buf.as_slice()).unwrap();
    assert_eq!(delaunay_window(&back).unwrap().cell_set(), delaunay_window(&win).unwrap().cell_set());
}

#[test]
fn prefix_phases_on_poisson_window() {
    let win = poisson_delone_window(0.4, 1.5, 30.0, 2, 12).unwrap();
    let [a, b] = nearest_pair(&win).unwrap();
    let cx = build_unbounded_prefix(&win, 4).unwrap();
    assert!(cx.vertex_ids().contains(&a) && cx.vertex_ids().contains(&b));
    assert!(cx.max_edge_length() > 4.0);
    assert!(interior_points(&cx).is_empty());
}
