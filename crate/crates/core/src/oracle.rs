//! Brute-force ground truth: triangulation enumeration for small planar sets and
//! quadrature for the lifted volume.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::Serialize;

use crate::complex::{Cell, TriangulationComplex};
use crate::delaunay::delaunay_2d;
use crate::error::{Error, Result};
use crate::functionals::{sum_over, tolerance, FunctionalSpec};
use crate::geometry::{centroid, check, degenerate, measure, norm2, Point};
use crate::predicates::orient_sign;

pub const MAX_ENUMERATION: usize = 9;
pub const MAX_EDGE_ENUMERATION: usize = 7;

fn cell_key(cx: &TriangulationComplex) -> Vec<Cell> {
    let mut k = cx.cells().to_vec();
    k.sort_unstable();
    k
}

/// All triangulations of a generic planar point set, by breadth-first search over
/// the flip graph starting at the Delaunay triangulation. The Delaunay
/// triangulation is first.
pub fn enumerate_triangulations_2d(points: &[Point]) -> Result<Vec<TriangulationComplex>> {
    if points.len() > MAX_ENUMERATION {
        return Err(Error::TooLarge { n: points.len(), max: MAX_ENUMERATION });
    }
    let start = delaunay_2d(points.to_vec())?;
    let mut seen: HashSet<Vec<Cell>> = HashSet::new();
    seen.insert(cell_key(&start));
    let mut queue = VecDeque::from([start]);
    let mut out = Vec::new();
    while let Some(cx) = queue.pop_front() {
        for e in cx.interior_facets() {
            if !cx.is_flippable(&e) {
                continue;
            }
            let mut next = cx.clone();
            next.flip_any(&e)?;
            if seen.insert(cell_key(&next)) {
                queue.push_back(next);
            }
        }
        out.push(cx);
    }
    Ok(out)
}

/// Edge set of a planar complex, as sorted vertex pairs.
pub fn edge_set(cx: &TriangulationComplex) -> BTreeSet<(usize, usize)> {
    let mut out = BTreeSet::new();
    for c in cx.cells() {
        for i in 0..3 {
            for j in i + 1..3 {
                out.insert((c[i], c[j]));
            }
        }
    }
    out
}

fn segments_cross(p: [&[f64]; 2], q: [&[f64]; 2]) -> bool {
    let o1 = orient_sign(&[p[0], p[1], q[0]]);
    let o2 = orient_sign(&[p[0], p[1], q[1]]);
    let o3 = orient_sign(&[q[0], q[1], p[0]]);
    let o4 = orient_sign(&[q[0], q[1], p[1]]);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// All maximal non-crossing sets of straight edges between the points. For a
/// generic planar set these are exactly the edge sets of its triangulations.
pub fn maximal_noncrossing_edge_sets(points: &[Point]) -> Result<Vec<BTreeSet<(usize, usize)>>> {
    let n = points.len();
    if n > MAX_EDGE_ENUMERATION {
        return Err(Error::TooLarge { n, max: MAX_EDGE_ENUMERATION });
    }
    if points.iter().any(|p| p.dim() != 2) {
        return Err(Error::UnsupportedDimension(points[0].dim()));
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if orient_sign(&[&points[i].coords, &points[j].coords, &points[k].coords]) == 0 {
                    return Err(Error::NonGeneric { ids: vec![i, j, k] });
                }
            }
        }
    }
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let m = edges.len();
    let seg = |e: usize| [points[edges[e].0].coords.as_slice(), points[edges[e].1].coords.as_slice()];
    let mut cross = vec![vec![false; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            let x = segments_cross(seg(a), seg(b));
            cross[a][b] = x;
            cross[b][a] = x;
        }
    }
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    let mut excluded = Vec::new();
    search(0, &cross, &mut chosen, &mut excluded, &mut out);
    Ok(out.into_iter().map(|s: Vec<usize>| s.into_iter().map(|e| edges[e]).collect()).collect())
}

fn search(e: usize, cross: &[Vec<bool>], chosen: &mut Vec<usize>, excluded: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let m = cross.len();
    if e == m {
        if excluded.iter().all(|&x| chosen.iter().any(|&c| cross[x][c])) {
            out.push(chosen.clone());
        }
        return;
    }
    // An excluded edge must be crossed by a chosen edge or by some later candidate.
    if excluded.iter().any(|&x| !chosen.iter().any(|&c| cross[x][c]) && !(e..m).any(|l| cross[x][l])) {
        return;
    }
    if chosen.iter().any(|&c| cross[e][c]) {
        search(e + 1, cross, chosen, excluded, out);
        return;
    }
    chosen.push(e);
    search(e + 1, cross, chosen, excluded, out);
    chosen.pop();
    excluded.push(e);
    search(e + 1, cross, chosen, excluded, out);
    excluded.pop();
}

#[derive(Clone, Debug, Serialize)]
pub struct MinSumReport {
    pub functional: FunctionalSpec,
    pub triangulations: usize,
    pub min_sum: f64,
    pub max_sum: f64,
    pub delaunay_sum: f64,
    /// Number of triangulations whose sum ties the minimum within tolerance.
    pub ties: usize,
    pub argmin_is_delaunay: bool,
    pub argmin_cells: Vec<Vec<usize>>,
}

/// Minimum of the summed functional over all triangulations of a small planar set.
pub fn min_sum_triangulation(points: &[Point], f: &FunctionalSpec) -> Result<(TriangulationComplex, MinSumReport)> {
    let all = enumerate_triangulations_2d(points)?;
    let sums: Vec<f64> = all.iter().map(|cx| sum_over(f, cx)).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in sums.iter().enumerate() {
        if *s < sums[best] {
            best = i;
        }
    }
    let min = sums[best];
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = sums.iter().filter(|&&s| s - min <= tolerance(s, min)).count();
    let report = MinSumReport {
        functional: *f,
        triangulations: all.len(),
        min_sum: min,
        max_sum: max,
        delaunay_sum: sums[0],
        ties,
        argmin_is_delaunay: sums[0] - min <= tolerance(sums[0], min),
        argmin_cells: all[best].cells().iter().map(|c| c.to_vec()).collect(),
    };
    Ok((all.into_iter().nth(best).unwrap(), report))
}

/// The regular s-fold subdivision of a d-simplex (d = 2, 3) into s^d pieces, as
/// barycentric coordinates of each piece's vertices.
fn subdivision(d: usize, s: usize) -> Vec<Vec<Vec<f64>>> {
    // Freudenthal triangulation of the cube [0,s]^d restricted to the Kuhn simplex
    // s >= y1 >= ... >= yd >= 0, mapped to barycentrics.
    let perms: Vec<Vec<usize>> = if d == 2 {
        vec![vec![0, 1], vec![1, 0]]
    } else {
        vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]
    };
    let mut out = Vec::with_capacity(s.pow(d as u32));
    let mut z = vec![0usize; d];
    loop {
        for p in &perms {
            let mut y: Vec<usize> = z.clone();
            let mut verts = vec![y.clone()];
            for &axis in p {
                y[axis] += 1;
                verts.push(y.clone());
            }
            if verts.iter().all(|v| v.windows(2).all(|w| w[0] >= w[1]) && v[0] <= s) {
                out.push(
                    verts
                        .iter()
                        .map(|v| {
                            let y: Vec<f64> = v.iter().map(|&c| c as f64 / s as f64).collect();
                            let mut lam = Vec::with_capacity(d + 1);
                            lam.push(1.0 - y[0]);
                            for k in 0..d - 1 {
                                lam.push(y[k] - y[k + 1]);
                            }
                            lam.push(y[d - 1]);
                            lam
                        })
                        .collect(),
                );
            }
        }
        let mut k = 0;
        loop {
            if k == d {
                return out;
            }
            z[k] += 1;
            if z[k] < s {
                break;
            }
            z[k] = 0;
            k += 1;
        }
    }
}

/// Nodes (barycentric in a piece) and weights of a rule exact for quadratics.
fn degree_two_rule(d: usize) -> (Vec<Vec<f64>>, f64) {
    let (a, b) = if d == 2 { (2.0 / 3.0, 1.0 / 6.0) } else { (0.585_410_196_624_968_5, 0.138_196_601_125_010_5) };
    let nodes = (0..=d).map(|i| (0..=d).map(|j| if i == j { a } else { b }).collect()).collect();
    (nodes, 1.0 / (d + 1) as f64)
}

fn quadrature<P: AsRef<[f64]>>(simplex: &[P], s: usize, nodes: &[Vec<f64>], weight: f64) -> Result<f64> {
    let d = check(simplex)?;
    if d != 2 && d != 3 {
        return Err(Error::UnsupportedDimension(d));
    }
    let vol = measure(simplex)?;
    if vol == 0.0 {
        return Err(degenerate(d));
    }
    let s = s.max(1);
    let c = centroid(simplex);
    let v: Vec<Vec<f64>> =
        simplex.iter().map(|p| p.as_ref().iter().zip(&c).map(|(x, m)| x - m).collect()).collect();
    let lifted: Vec<f64> = v.iter().map(|p| norm2(p)).collect();
    let integrand = |lam: &[f64]| {
        let x: Vec<f64> = (0..d).map(|j| (0..=d).map(|i| lam[i] * v[i][j]).sum()).collect();
        let ell: f64 = (0..=d).map(|i| lam[i] * lifted[i]).sum();
        ell - norm2(&x)
    };
    let mut total = 0.0;
    for piece in subdivision(d, s) {
        for node in nodes {
            let lam: Vec<f64> = (0..=d).map(|i| (0..=d).map(|k| node[k] * piece[k][i]).sum()).collect();
            total += weight * integrand(&lam);
        }
    }
    Ok(total * vol / s.pow(d as u32) as f64)
}

/// Lifted volume by a composite degree-2 rule on the regular s-fold subdivision.
pub fn fe_quadrature<P: AsRef<[f64]>>(simplex: &[P], s: usize) -> Result<f64> {
    let d = check(simplex)?;
    let (nodes, w) = degree_two_rule(d);
    quadrature(simplex, s, &nodes, w)
}

/// Lifted volume by the composite midpoint (piece centroid) rule; converges as O(1/s^2).
pub fn fe_midpoint<P: AsRef<[f64]>>(simplex: &[P], s: usize) -> Result<f64> {
    let d = check(simplex)?;
    let node = vec![1.0 / (d + 1) as f64; d + 1];
    quadrature(simplex, s, &[node], 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::fe_lifted_volume;

    fn pts(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().enumerate().map(|(i, p)| Point::new(i, p.to_vec()).unwrap()).collect()
    }

    #[test]
    fn subdivision_counts_and_volume() {
        for d in [2, 3] {
            for s in [1, 2, 3, 5] {
                let pieces = subdivision(d, s);
                assert_eq!(pieces.len(), s.pow(d as u32));
            }
        }
    }

    #[test]
    fn convex_quadrilateral_and_pentagon() {
        let quad = pts(&[[0.0, 0.0], [2.0, 0.1], [2.1, 1.9], [-0.1, 2.2]]);
        assert_eq!(enumerate_triangulations_2d(&quad).unwrap().len(), 2);
        let pent: Vec<[f64; 2]> =
            (0..5).map(|k| { let t = k as f64 * 1.2566 + 0.1 * k as f64 * k as f64 / 7.0; [t.cos(), t.sin()] }).collect();
        assert_eq!(enumerate_triangulations_2d(&pts(&pent)).unwrap().len(), 5);
        assert_eq!(maximal_noncrossing_edge_sets(&pts(&pent)).unwrap().len(), 5);
    }

    #[test]
    fn interior_point_in_triangle() {
        let p = pts(&[[0.0, 0.0], [4.0, 0.0], [2.0, 3.0], [2.0, 1.0]]);
        let bfs = enumerate_triangulations_2d(&p).unwrap();
        let edges = maximal_noncrossing_edge_sets(&p).unwrap();
        assert_eq!(bfs.len(), edges.len());
        assert_eq!(bfs.len(), 1);
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let t = [[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]];
        assert!((fe_quadrature(&t, 64).unwrap() - 25.0).abs() < 1e-9);
        let m64 = fe_midpoint(&t, 64).unwrap();
        let m128 = fe_midpoint(&t, 128).unwrap();
        assert!((m64 - 25.0).abs() > 4.0 * (m128 - 25.0).abs() * 0.9);
        let tet = [[0.1, 0.0, 0.3], [1.2, 0.1, 0.0], [0.0, 1.1, 0.2], [0.3, 0.2, 1.4]];
        let exact = fe_lifted_volume(&tet).unwrap();
        assert!((fe_quadrature(&tet, 4).unwrap() - exact).abs() < 1e-12 * exact.max(1.0));
    }
}
