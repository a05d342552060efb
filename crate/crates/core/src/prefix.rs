//! Phase-by-phase construction of a planar triangulation that is not uniformly
//! bounded: every phase adds an edge longer than the phase number.

use serde_json::json;

use crate::complex::{build_complex, TriangulationComplex};
use crate::error::{Error, Result};
use crate::generators::PointSetWindow;
use crate::geometry::{dist, norm2};
use crate::predicates::orient_sign;

/// Initial number of direction cones around the chosen boundary vertex.
pub const INITIAL_CONES: usize = 64;
/// Cone count at which the search for a long edge gives up.
pub const MAX_CONES: usize = 4096;

/// The two points nearest the origin (ties by id): the single edge of phase 0.
pub fn nearest_pair(window: &PointSetWindow) -> Result<[usize; 2]> {
    if window.points.len() < 2 {
        return Err(Error::WindowExhausted("fewer than two points".into()));
    }
    let mut ids: Vec<usize> = (0..window.points.len()).collect();
    ids.sort_by(|&a, &b| norm2(&window.points[a].coords).total_cmp(&norm2(&window.points[b].coords)).then(a.cmp(&b)));
    Ok([ids[0].min(ids[1]), ids[0].max(ids[1])])
}

struct Builder<'a> {
    pts: &'a [Vec<f64>],
    /// Counter-clockwise hull; two entries while the complex is a single edge.
    hull: Vec<usize>,
    tris: Vec<[usize; 3]>,
    is_vertex: Vec<bool>,
}

impl Builder<'_> {
    fn orient(&self, a: usize, b: usize, c: usize) -> i8 {
        orient_sign(&[&self.pts[a], &self.pts[b], &self.pts[c]])
    }

    fn non_generic(ids: &[usize]) -> Error {
        Error::NonGeneric { ids: ids.to_vec() }
    }

    fn outside(&self, p: usize) -> Result<bool> {
        let n = self.hull.len();
        if n == 2 {
            return Ok(true);
        }
        let mut out = false;
        for i in 0..n {
            let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
            match self.orient(a, b, p) {
                0 => return Err(Self::non_generic(&[a, b, p])),
                s if s < 0 => out = true,
                _ => {}
            }
        }
        Ok(out)
    }

    /// Adds `p` (outside the hull) by coning it to every visible boundary edge.
    fn star(&mut self, p: usize) -> Result<()> {
        let n = self.hull.len();
        if n == 2 {
            let (a, b) = (self.hull[0], self.hull[1]);
            self.hull = match self.orient(a, b, p) {
                0 => return Err(Self::non_generic(&[a, b, p])),
                s if s > 0 => vec![a, b, p],
                _ => vec![b, a, p],
            };
            self.tris.push([self.hull[0], self.hull[1], p]);
            self.is_vertex[p] = true;
            return Ok(());
        }
        let mut visible = vec![false; n];
        for i in 0..n {
            let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
            match self.orient(a, b, p) {
                0 => return Err(Self::non_generic(&[a, b, p])),
                s => visible[i] = s < 0,
            }
        }
        let m = visible.iter().filter(|v| **v).count();
        let s = (0..n).find(|&i| visible[i] && !visible[(i + n - 1) % n]).expect("point outside the hull");
        for j in 0..m {
            let i = (s + j) % n;
            let (a, b) = (self.hull[i], self.hull[(i + 1) % n]);
            self.tris.push([b, a, p]);
        }
        let mut hull: Vec<usize> = (0..=n - m).map(|j| self.hull[(s + m + j) % n]).collect();
        hull.push(p);
        self.hull = hull;
        self.is_vertex[p] = true;
        Ok(())
    }

    /// Splits the triangle containing `w` in its interior into three.
    fn split(&mut self, w: usize) -> Result<()> {
        for t in 0..self.tris.len() {
            let [a, b, c] = self.tris[t];
            let s = [self.orient(a, b, w), self.orient(b, c, w), self.orient(c, a, w)];
            if s.iter().any(|&x| x < 0) {
                continue;
            }
            if s.contains(&0) {
                return Err(Self::non_generic(&[a, b, c, w]));
            }
            self.tris[t] = [a, b, w];
            self.tris.push([b, c, w]);
            self.tris.push([c, a, w]);
            self.is_vertex[w] = true;
            return Ok(());
        }
        Err(Error::InvalidInput(format!("point {w} is inside the hull but in no triangle")))
    }

    /// Whether direction `dir` from hull vertex `x` leaves the hull immediately.
    fn escapes(&self, x: usize, dir: [f64; 2]) -> bool {
        let n = self.hull.len();
        let i = self.hull.iter().position(|&v| v == x).unwrap();
        let px = &self.pts[x];
        let cross = |v: usize| {
            let e = [self.pts[v][0] - px[0], self.pts[v][1] - px[1]];
            e[0] * dir[1] - e[1] * dir[0]
        };
        if n == 2 {
            let o = self.hull[1 - i];
            let e = [self.pts[o][0] - px[0], self.pts[o][1] - px[1]];
            return cross(o) != 0.0 || e[0] * dir[0] + e[1] * dir[1] < 0.0;
        }
        let (u, v) = (self.hull[(i + n - 1) % n], self.hull[(i + 1) % n]);
        // inside the tangent cone iff dir is left of x->v and right of x->u
        !(cross(v) >= 0.0 && cross(u) <= 0.0)
    }

    /// Direction of angle `theta`.
    fn ray(theta: f64) -> [f64; 2] {
        [theta.cos(), theta.sin()]
    }

    /// A point `y` with `|xy| > len` such that `xy` meets the hull only at `x`.
    fn long_edge(&self, x: usize, len: f64) -> Result<Option<usize>> {
        let px = &self.pts[x];
        let angle = |y: usize| {
            let a = (self.pts[y][1] - px[1]).atan2(self.pts[y][0] - px[0]);
            a.rem_euclid(std::f64::consts::TAU)
        };
        let far: Vec<usize> =
            (0..self.pts.len()).filter(|&y| !self.is_vertex[y] && dist(&self.pts[y], px) > len).collect();
        let n = self.hull.len();
        let i = self.hull.iter().position(|&v| v == x).unwrap();
        let neighbours = if n == 2 { vec![self.hull[1 - i]] } else { vec![self.hull[(i + n - 1) % n], self.hull[(i + 1) % n]] };
        let mut m = INITIAL_CONES;
        while m <= MAX_CONES {
            let width = std::f64::consts::TAU / m as f64;
            for c in 0..m {
                let (lo, hi) = (c as f64 * width, (c + 1) as f64 * width);
                let in_cone = |a: f64| a >= lo && a < hi;
                let cone_free = self.escapes(x, Self::ray(lo))
                    && self.escapes(x, Self::ray(hi))
                    && self.escapes(x, Self::ray((lo + hi) / 2.0))
                    && neighbours.iter().all(|&v| !in_cone(angle(v)));
                if !cone_free {
                    continue;
                }
                let best = far
                    .iter()
                    .copied()
                    .filter(|&y| in_cone(angle(y)) && self.segment_clear(x, y))
                    .min_by(|&a, &b| dist(&self.pts[a], px).total_cmp(&dist(&self.pts[b], px)).then(a.cmp(&b)));
                if best.is_some() {
                    return Ok(best);
                }
            }
            m *= 2;
        }
        Ok(None)
    }

    /// Exact check that segment `xy` touches the hull only at vertex `x`.
    fn segment_clear(&self, x: usize, y: usize) -> bool {
        let n = self.hull.len();
        if n == 2 {
            return true;
        }
        let i = self.hull.iter().position(|&v| v == x).unwrap();
        let (u, v) = (self.hull[(i + n - 1) % n], self.hull[(i + 1) % n]);
        self.orient(x, v, y) < 0 || self.orient(u, x, y) < 0
    }
}

/// Triangulation after `k >= 1` phases. Each phase `j` picks the smallest-id hull
/// vertex `x`, joins it to the nearest point `y` with `|xy| > j` in the first
/// direction cone free of the current complex, cones every point within distance
/// `j` of the origin onto the hull, then splits triangles until every covered point
/// of the window is a vertex. The complex keeps all window points; uncovered ones
/// are unused.
pub fn build_unbounded_prefix(window: &PointSetWindow, k: usize) -> Result<TriangulationComplex> {
    if window.dimension != 2 {
        return Err(Error::UnsupportedDimension(window.dimension));
    }
    if k == 0 {
        return Err(Error::InvalidInput("phase 0 is a single edge; see nearest_pair".into()));
    }
    let pts: Vec<Vec<f64>> = window.points.iter().map(|p| p.coords.clone()).collect();
    let [a, b] = nearest_pair(window)?;
    let mut is_vertex = vec![false; pts.len()];
    is_vertex[a] = true;
    is_vertex[b] = true;
    let mut bld = Builder { pts: &pts, hull: vec![a, b], tris: vec![], is_vertex };
    let mut long_edges = Vec::with_capacity(k);
    for phase in 1..=k {
        let len = phase as f64;
        let x = *bld.hull.iter().min().unwrap();
        let y = bld
            .long_edge(x, len)?
            .ok_or_else(|| Error::WindowExhausted(format!("no edge longer than {len} leaves vertex {x} in phase {phase}")))?;
        bld.star(y)?;
        long_edges.push(json!({"phase": phase, "edge": [x, y], "length": dist(&pts[x], &pts[y])}));
        let mut near: Vec<usize> =
            (0..pts.len()).filter(|&z| !bld.is_vertex[z] && norm2(&pts[z]) <= len * len).collect();
        near.sort_by(|&p, &q| norm2(&pts[p]).total_cmp(&norm2(&pts[q])).then(p.cmp(&q)));
        for z in near {
            if !bld.is_vertex[z] && bld.outside(z)? {
                bld.star(z)?;
            }
        }
        for w in 0..pts.len() {
            if !bld.is_vertex[w] && !bld.outside(w)? {
                bld.split(w)?;
            }
        }
    }
    let cells = bld.tris.iter().map(|t| t.to_vec()).collect();
    let mut cx = build_complex(window.points.clone(), cells)?;
    cx.window_radius = Some(window.window_radius);
    cx.provenance = json!({"construction": "unbounded_prefix", "phases": k, "long_edges": long_edges});
    Ok(cx)
}

/// Points of the complex's point set lying in the interior of some cell.
pub fn interior_points(cx: &TriangulationComplex) -> Vec<usize> {
    let mut out = vec![];
    for c in 0..cx.num_cells() {
        let s = cx.cell_coords(c);
        let lo: Vec<f64> = (0..cx.dimension()).map(|i| s.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)).collect();
        let hi: Vec<f64> = (0..cx.dimension()).map(|i| s.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)).collect();
        for p in cx.points() {
            if cx.cells()[c].contains(&p.id) || p.coords.iter().zip(&lo).zip(&hi).any(|((x, l), h)| x < l || x > h) {
                continue;
            }
            let o = orient_sign(&s);
            let strictly = (0..s.len()).all(|i| {
                let mut q = s.clone();
                q[i] = &p.coords;
                orient_sign(&q) == o
            });
            if strictly {
                out.push(p.id);
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delaunay::delaunay_window;
    use crate::generators::poisson_delone_window;

    #[test]
    fn phase_zero_is_nearest_pair() {
        let win = poisson_delone_window(0.4, 1.5, 10.0, 2, 3).unwrap();
        let [a, b] = nearest_pair(&win).unwrap();
        let mut r: Vec<f64> = win.points.iter().map(|p| norm2(&p.coords)).collect();
        r.sort_by(f64::total_cmp);
        let got = [norm2(&win.points[a].coords), norm2(&win.points[b].coords)];
        assert_eq!(got.iter().copied().fold(0.0, f64::max), r[1]);
    }

    #[test]
    fn phases_add_long_edges() {
        let win = poisson_delone_window(0.4, 1.5, 25.0, 2, 5).unwrap();
        let q = delaunay_window(&win).unwrap().interior_bound_q(win.window_radius);
        for k in 1..=3 {
            let cx = build_unbounded_prefix(&win, k).unwrap();
            assert!(cx.max_edge_length() > k as f64 && cx.max_edge_length() > q);
            assert!(interior_points(&cx).is_empty());
            let covered = cx.vertex_ids();
            for p in &win.points {
                if norm2(&p.coords) <= (k * k) as f64 {
                    assert!(covered.contains(&p.id));
                }
            }
        }
    }

    #[test]
    fn small_window_is_exhausted() {
        let win = poisson_delone_window(0.4, 1.5, 7.0, 2, 1).unwrap();
        assert!(matches!(build_unbounded_prefix(&win, 12), Err(Error::WindowExhausted(_))));
    }
}
