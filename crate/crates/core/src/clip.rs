//! Simplex intersection volumes and restriction of a Delaunay triangulation to the
//! underlying space of another complex.

use std::collections::{HashMap, HashSet};

use smallvec::SmallVec;

use crate::complex::{Cell, TriangulationComplex};
use crate::error::{Error, Result};
use crate::geometry::measure_unchecked;

/// A cell counts as contained when this fraction of its measure is covered.
pub const COVERAGE_FRACTION: f64 = 1.0 - 1e-9;

type V = [f64; 3];

fn sub(a: &V, b: &V) -> V {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &V, b: &V) -> V {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &V, b: &V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn to_v(p: &[f64]) -> V {
    let mut v = [0.0; 3];
    v[..p.len()].copy_from_slice(p);
    v
}

/// Halfspaces `n . x <= c` bounding a simplex, one per facet.
fn halfspaces(s: &[V], d: usize) -> SmallVec<[(V, f64); 4]> {
    let mut out = SmallVec::new();
    for i in 0..=d {
        let f: SmallVec<[V; 3]> = (0..=d).filter(|&j| j != i).map(|j| s[j]).collect();
        let n = if d == 2 {
            let e = sub(&f[1], &f[0]);
            [e[1], -e[0], 0.0]
        } else {
            cross(&sub(&f[1], &f[0]), &sub(&f[2], &f[0]))
        };
        let c = dot(&n, &f[0]);
        if dot(&n, &s[i]) > c {
            out.push(([-n[0], -n[1], -n[2]], -c));
        } else {
            out.push((n, c));
        }
    }
    out
}

fn lerp(a: &V, b: &V, sa: f64, sb: f64) -> V {
    let t = sa / (sa - sb);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

fn clip_polygon(poly: Vec<V>, n: &V, c: f64) -> Vec<V> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let a = &poly[i];
        let b = &poly[(i + 1) % poly.len()];
        let (sa, sb) = (c - dot(n, a), c - dot(n, b));
        if sa >= 0.0 {
            out.push(*a);
        }
        if (sa >= 0.0) != (sb >= 0.0) {
            out.push(lerp(a, b, sa, sb));
        }
    }
    out
}

fn polygon_area(poly: &[V]) -> f64 {
    let mut a = 0.0;
    for i in 0..poly.len() {
        let (p, q) = (&poly[i], &poly[(i + 1) % poly.len()]);
        a += p[0] * q[1] - p[1] * q[0];
    }
    a.abs() / 2.0
}

fn tet_volume(t: &[V; 4]) -> f64 {
    dot(&sub(&t[1], &t[0]), &cross(&sub(&t[2], &t[0]), &sub(&t[3], &t[0]))).abs() / 6.0
}

/// Splits the triangular prism `(a0 b0 c0)-(a1 b1 c1)` into three tetrahedra.
fn prism(a0: V, b0: V, c0: V, a1: V, b1: V, c1: V, out: &mut Vec<[V; 4]>) {
    out.push([a0, b0, c0, a1]);
    out.push([b0, c0, a1, b1]);
    out.push([c0, a1, b1, c1]);
}

fn clip_tet(t: &[V; 4], n: &V, c: f64, out: &mut Vec<[V; 4]>) {
    let s: [f64; 4] = std::array::from_fn(|i| c - dot(n, &t[i]));
    let inside: SmallVec<[usize; 4]> = (0..4).filter(|&i| s[i] >= 0.0).collect();
    let outside: SmallVec<[usize; 4]> = (0..4).filter(|&i| s[i] < 0.0).collect();
    let x = |i: usize, o: usize| lerp(&t[i], &t[o], s[i], s[o]);
    match inside.len() {
        4 => out.push(*t),
        0 => {}
        1 => {
            let v = inside[0];
            out.push([t[v], x(v, outside[0]), x(v, outside[1]), x(v, outside[2])]);
        }
        2 => {
            let (v0, v1, a, b) = (inside[0], inside[1], outside[0], outside[1]);
            prism(t[v0], x(v0, a), x(v0, b), t[v1], x(v1, a), x(v1, b), out);
        }
        _ => {
            let (v0, v1, v2, a) = (inside[0], inside[1], inside[2], outside[0]);
            prism(t[v0], t[v1], t[v2], x(v0, a), x(v1, a), x(v2, a), out);
        }
    }
}

/// Measure of the intersection of two d-simplices (d = 2 or 3).
pub fn intersection_measure<P: AsRef<[f64]>, Q: AsRef<[f64]>>(a: &[P], b: &[Q]) -> f64 {
    let d = a.len() - 1;
    let av: SmallVec<[V; 4]> = a.iter().map(|p| to_v(p.as_ref())).collect();
    let bv: SmallVec<[V; 4]> = b.iter().map(|p| to_v(p.as_ref())).collect();
    let hs = halfspaces(&bv, d);
    if d == 2 {
        let mut poly = av.to_vec();
        for (n, c) in &hs {
            poly = clip_polygon(poly, n, *c);
            if poly.len() < 3 {
                return 0.0;
            }
        }
        polygon_area(&poly)
    } else {
        let mut pieces = vec![[av[0], av[1], av[2], av[3]]];
        for (n, c) in &hs {
            let mut next = Vec::with_capacity(pieces.len() * 3);
            for t in &pieces {
                clip_tet(t, n, *c, &mut next);
            }
            pieces = next;
            if pieces.is_empty() {
                return 0.0;
            }
        }
        pieces.iter().map(tet_volume).sum()
    }
}

/// Bucket index of cell bounding boxes.
pub(crate) struct CellIndex {
    h: f64,
    d: usize,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

fn bbox(pts: &[&[f64]], d: usize) -> ([f64; 3], [f64; 3]) {
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    for j in 0..d {
        lo[j] = pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min);
        hi[j] = pts.iter().map(|p| p[j]).fold(f64::NEG_INFINITY, f64::max);
    }
    (lo, hi)
}

impl CellIndex {
    pub(crate) fn new(cx: &TriangulationComplex) -> Self {
        let d = cx.dimension();
        let m = cx.num_cells().max(1);
        let mean_extent = (0..cx.num_cells())
            .map(|c| {
                let pts = cx.cell_coords(c);
                let (lo, hi) = bbox(&pts, d);
                (0..d).map(|j| hi[j] - lo[j]).fold(0.0, f64::max)
            })
            .sum::<f64>()
            / m as f64;
        let h = if mean_extent > 0.0 { mean_extent } else { 1.0 };
        let mut idx = CellIndex { h, d, buckets: HashMap::new() };
        for c in 0..cx.num_cells() {
            let pts = cx.cell_coords(c);
            let (lo, hi) = bbox(&pts, d);
            idx.for_each_key(&lo, &hi, |k, b| b.entry(k).or_default().push(c));
        }
        idx
    }

    fn key_range(&self, lo: &[f64; 3], hi: &[f64; 3]) -> [(i64, i64); 3] {
        std::array::from_fn(|j| {
            if j < self.d {
                ((lo[j] / self.h).floor() as i64, (hi[j] / self.h).floor() as i64)
            } else {
                (0, 0)
            }
        })
    }

    fn for_each_key(&mut self, lo: &[f64; 3], hi: &[f64; 3], mut f: impl FnMut([i64; 3], &mut HashMap<[i64; 3], Vec<usize>>)) {
        let r = self.key_range(lo, hi);
        for a in r[0].0..=r[0].1 {
            for b in r[1].0..=r[1].1 {
                for c in r[2].0..=r[2].1 {
                    f([a, b, c], &mut self.buckets);
                }
            }
        }
    }

    pub(crate) fn candidates(&self, pts: &[&[f64]]) -> Vec<usize> {
        let (lo, hi) = bbox(pts, self.d);
        let r = self.key_range(&lo, &hi);
        let mut out = HashSet::new();
        for a in r[0].0..=r[0].1 {
            for b in r[1].0..=r[1].1 {
                for c in r[2].0..=r[2].1 {
                    if let Some(v) = self.buckets.get(&[a, b, c]) {
                        out.extend(v.iter().copied());
                    }
                }
            }
        }
        let mut v: Vec<usize> = out.into_iter().collect();
        v.sort_unstable();
        v
    }
}

/// Fraction of cell `c` of `cx` covered by the cells of `region`.
pub(crate) fn covered_fraction(cx: &TriangulationComplex, c: usize, region: &TriangulationComplex, index: &CellIndex) -> f64 {
    let pts = cx.cell_coords(c);
    let total = measure_unchecked(&pts);
    let mut covered = 0.0;
    for t in index.candidates(&pts) {
        covered += intersection_measure(&pts, &region.cell_coords(t));
        if covered >= total {
            break;
        }
    }
    covered / total
}

/// Cells of `dl` lying in the underlying space of `region`, as a subcomplex of `dl`.
///
/// A cell identical to a region cell is kept outright; any other cell is kept when
/// the region covers at least [`COVERAGE_FRACTION`] of its measure.
pub fn restrict_delaunay(dl: &TriangulationComplex, region: &TriangulationComplex) -> Result<TriangulationComplex> {
    if dl.dimension() != region.dimension() {
        return Err(Error::DimensionMismatch { expected: dl.dimension(), found: region.dimension() });
    }
    let same: HashSet<Cell> = region.cell_set();
    let index = CellIndex::new(region);
    let keep: Vec<bool> = (0..dl.num_cells())
        .map(|c| {
            let cell = &dl.cells()[c];
            if same.contains(cell) {
                return true;
            }
            if region.num_cells() == 0 {
                return false;
            }
            covered_fraction(dl, c, region, &index) >= COVERAGE_FRACTION
        })
        .collect();
    Ok(dl.subcomplex(|c| keep[c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::delaunay::{delaunay, radon_two_triangulations};
    use crate::geometry::Point;

    fn pts(c: &[&[f64]]) -> Vec<Point> {
        c.iter().enumerate().map(|(i, p)| Point::new(i, p.to_vec()).unwrap()).collect()
    }

    #[test]
    fn triangle_intersections() {
        let a = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
        assert!((intersection_measure(&a, &a) - 2.0).abs() < 1e-15);
        let b = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert!((intersection_measure(&a, &b) - 0.5).abs() < 1e-15);
        let far = [[5.0, 5.0], [6.0, 5.0], [5.0, 6.0]];
        assert_eq!(intersection_measure(&a, &far), 0.0);
    }

    #[test]
    fn tetrahedron_intersections() {
        let a = [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 2.0]];
        assert!((intersection_measure(&a, &a) - 8.0 / 6.0).abs() < 1e-14);
        let b = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!((intersection_measure(&a, &b) - 1.0 / 6.0).abs() < 1e-14);
        // Half-space cut through the middle: compare with Monte Carlo-free closed form.
        let shifted = [[1.0, 0.0, 0.0], [3.0, 0.0, 0.0], [1.0, 2.0, 0.0], [1.0, 0.0, 2.0]];
        // Overlap is the tetrahedron x >= 1, x + y + z <= 2: edge 1, volume 1/6.
        assert!((intersection_measure(&a, &shifted) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn restriction_examples() {
        let p = pts(&[&[0.0, 0.0], &[3.0, 0.1], &[3.2, 2.0], &[0.1, 2.1], &[1.6, 1.0], &[1.5, -1.3]]);
        let dl = delaunay(p.clone()).unwrap();
        assert_eq!(restrict_delaunay(&dl, &dl).unwrap().num_cells(), dl.num_cells());
        let one = dl.subcomplex(|c| c == 2);
        let r = restrict_delaunay(&dl, &one).unwrap();
        assert_eq!(r.cells(), one.cells());

        let q = pts(&[&[0.0, 0.0], &[3.0, 0.0], &[3.0, 1.0], &[0.0, 1.02]]);
        let (d2, t2) = radon_two_triangulations(q).unwrap();
        let r = restrict_delaunay(&d2, &t2).unwrap();
        assert_eq!(r.cell_set(), d2.cell_set());
        let half = t2.subcomplex(|c| c == 0);
        assert_eq!(restrict_delaunay(&d2, &half).unwrap().num_cells(), 0);
        let _ = build_complex;
    }
}
