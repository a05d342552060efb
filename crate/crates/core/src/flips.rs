//! Planar edge flips: directed (Lawson) legalization and the reverse flips used to
//! build non-Delaunay triangulations.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{build_complex, sorted_cell, sorted_facet, Facet, TriangulationComplex};
use crate::error::{Error, Result};
use crate::geometry::{circumsphere_unchecked, Point};
use crate::predicates::orient_sign;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlipDirection {
    ToDelaunay,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipRecord {
    pub facet: Vec<usize>,
    pub new_facet: Vec<usize>,
    pub before_max_circumradius: f64,
    pub after_max_circumradius: f64,
    pub direction: FlipDirection,
}

/// The quadrilateral `(a, b | c, d)` around interior edge `ab`, with cell indices.
struct Quad {
    a: usize,
    b: usize,
    c: usize,
    d: usize,
    cells: [usize; 2],
}

impl TriangulationComplex {
    fn quad(&self, facet: &[usize]) -> Result<Quad> {
        if self.dimension() != 2 {
            return Err(Error::UnsupportedDimension(self.dimension()));
        }
        let f = sorted_facet(facet);
        let inc = self.incident_cells(&f).ok_or_else(|| Error::MissingFacet { facet: f.to_vec() })?;
        if inc.len() != 2 {
            return Err(Error::BoundaryFacet { facet: f.to_vec() });
        }
        let cells = [inc[0], inc[1]];
        Ok(Quad {
            a: f[0],
            b: f[1],
            c: self.opposite_vertex(cells[0], &f),
            d: self.opposite_vertex(cells[1], &f),
            cells,
        })
    }

    fn quad_is_convex(&self, q: &Quad) -> bool {
        let (a, b, c, d) = (self.coords(q.a), self.coords(q.b), self.coords(q.c), self.coords(q.d));
        let s1 = orient_sign(&[c, d, a]);
        let s2 = orient_sign(&[c, d, b]);
        s1 != 0 && s2 != 0 && s1 != s2
    }

    fn swap_diagonal(&mut self, q: &Quad) -> (f64, f64) {
        let r = |cx: &Self, c: usize| circumsphere_unchecked(&cx.cell_coords(c)).radius;
        let before = r(self, q.cells[0]).max(r(self, q.cells[1]));
        self.replace_cell(q.cells[0], sorted_cell(&[q.a, q.c, q.d]));
        self.replace_cell(q.cells[1], sorted_cell(&[q.b, q.c, q.d]));
        let after = r(self, q.cells[0]).max(r(self, q.cells[1]));
        (before, after)
    }

    /// Directed flip of a non-locally-Delaunay interior edge.
    pub fn flip(&mut self, facet: &[usize]) -> Result<FlipRecord> {
        let q = self.quad(facet)?;
        if self.is_locally_delaunay(facet)? {
            return Err(Error::LocallyDelaunay { facet: vec![q.a, q.b] });
        }
        if !self.quad_is_convex(&q) {
            return Err(Error::NonConvex { facet: vec![q.a, q.b] });
        }
        let (before, after) = self.swap_diagonal(&q);
        Ok(FlipRecord {
            facet: vec![q.a, q.b],
            new_facet: sorted_facet(&[q.c, q.d]).to_vec(),
            before_max_circumradius: before,
            after_max_circumradius: after,
            direction: FlipDirection::ToDelaunay,
        })
    }

    /// Swaps the diagonal of a convex quadrilateral regardless of the Delaunay condition.
    /// Returns the new edge.
    pub fn flip_any(&mut self, facet: &[usize]) -> Result<Facet> {
        let q = self.quad(facet)?;
        if !self.quad_is_convex(&q) {
            return Err(Error::NonConvex { facet: vec![q.a, q.b] });
        }
        self.swap_diagonal(&q);
        Ok(sorted_facet(&[q.c, q.d]))
    }

    /// Whether the quadrilateral around an interior edge is strictly convex.
    pub fn is_flippable(&self, facet: &[usize]) -> bool {
        self.quad(facet).map(|q| self.quad_is_convex(&q)).unwrap_or(false)
    }
}

/// Lawson legalization with a FIFO queue of suspect edges.
pub fn legalize_to_delaunay(mut cx: TriangulationComplex) -> Result<(TriangulationComplex, Vec<FlipRecord>)> {
    if cx.dimension() != 2 {
        return Err(Error::UnsupportedDimension(cx.dimension()));
    }
    let mut queue: VecDeque<Facet> = cx.interior_facets().into();
    let mut log = Vec::new();
    while let Some(f) = queue.pop_front() {
        match cx.incident_cells(&f) {
            Some(inc) if inc.len() == 2 => {}
            _ => continue,
        }
        if cx.is_locally_delaunay(&f)? {
            continue;
        }
        let rec = cx.flip(&f)?;
        let (a, b) = (rec.facet[0], rec.facet[1]);
        let (c, d) = (rec.new_facet[0], rec.new_facet[1]);
        for e in [[a, c], [a, d], [b, c], [b, d]] {
            queue.push_back(sorted_facet(&e));
        }
        log.push(rec);
    }
    Ok((cx, log))
}

/// Applies up to `steps` unconditional flips at random flippable interior edges.
pub fn random_flip_walk<R: Rng>(cx: &mut TriangulationComplex, steps: usize, rng: &mut R) -> Result<usize> {
    let mut done = 0;
    for _ in 0..steps {
        let edges: Vec<Facet> = cx.interior_facets().into_iter().filter(|f| cx.is_flippable(f)).collect();
        if edges.is_empty() {
            break;
        }
        let f = &edges[rng.gen_range(0..edges.len())];
        cx.flip_any(f)?;
        done += 1;
    }
    Ok(done)
}

/// Left-to-right sweep triangulation: each new point is coned to the visible hull edges.
pub fn sweep_triangulation(points: Vec<Point>) -> Result<TriangulationComplex> {
    if points.iter().any(|p| p.dim() != 2) {
        return Err(Error::UnsupportedDimension(points.iter().map(|p| p.dim()).find(|&d| d != 2).unwrap()));
    }
    if points.len() < 3 {
        return Err(Error::InvalidInput("sweep triangulation needs at least 3 points".into()));
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (&points[i].coords, &points[j].coords);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
    });
    let c = |i: usize| points[i].coords.as_slice();
    let (p0, p1, p2) = (order[0], order[1], order[2]);
    let o = orient_sign(&[c(p0), c(p1), c(p2)]);
    if o == 0 {
        return Err(Error::Degenerate { ids: vec![p0, p1, p2] });
    }
    let mut hull = if o > 0 { vec![p0, p1, p2] } else { vec![p0, p2, p1] };
    let mut cells = vec![vec![p0, p1, p2]];
    for &p in &order[3..] {
        let n = hull.len();
        let visible: Vec<bool> = (0..n).map(|i| orient_sign(&[c(hull[i]), c(hull[(i + 1) % n]), c(p)]) < 0).collect();
        if !visible.iter().any(|&v| v) {
            return Err(Error::InvalidInput(format!("point {p} is not beyond the current hull")));
        }
        for i in 0..n {
            if visible[i] {
                cells.push(vec![hull[i], hull[(i + 1) % n], p]);
            }
        }
        let start = (0..n).find(|&i| visible[i] && !visible[(i + n - 1) % n]).unwrap();
        let end = (0..n).map(|k| (start + k) % n).take_while(|&i| visible[i]).last().unwrap();
        let mut next = Vec::with_capacity(n + 1);
        let mut i = (end + 1) % n;
        loop {
            next.push(hull[i]);
            if i == start {
                break;
            }
            i = (i + 1) % n;
        }
        next.push(p);
        hull = next;
    }
    build_complex(points, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::circumradius;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().enumerate().map(|(i, p)| Point::new(i, p.to_vec()).unwrap()).collect()
    }

    // (0,0),(3,0),(3,1),(0,1) nudged off the common circle.
    fn thin_quad() -> Vec<Point> {
        pts(&[[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [0.0, 1.02]])
    }

    #[test]
    fn exactly_one_diagonal_is_locally_delaunay() {
        let a = build_complex(thin_quad(), vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        let b = build_complex(thin_quad(), vec![vec![0, 1, 3], vec![1, 2, 3]]).unwrap();
        let la = a.is_locally_delaunay(&[0, 2]).unwrap();
        let lb = b.is_locally_delaunay(&[1, 3]).unwrap();
        assert_ne!(la, lb);
        // Direct oracle: vertex 3 against the circle through 0, 1, 2.
        let p = thin_quad();
        let direct = crate::predicates::in_sphere(&[&p[0].coords, &p[1].coords, &p[2].coords], &p[3].coords).unwrap();
        assert_eq!(la, direct == crate::InSphere::Outside);
    }

    #[test]
    fn flip_reduces_max_circumradius() {
        let p = thin_quad();
        let mut cx = build_complex(p.clone(), vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        let (bad, cells) = if cx.is_locally_delaunay(&[0, 2]).unwrap() {
            (vec![1, 3], vec![vec![0, 1, 3], vec![1, 2, 3]])
        } else {
            (vec![0, 2], vec![vec![0, 1, 2], vec![0, 2, 3]])
        };
        cx = build_complex(p.clone(), cells).unwrap();
        let before = cx.cells().iter().map(|c| circumradius(&[&p[c[0]].coords, &p[c[1]].coords, &p[c[2]].coords]).unwrap()).fold(0.0, f64::max);
        let rec = cx.flip(&bad).unwrap();
        assert!((rec.before_max_circumradius - before).abs() < 1e-12);
        assert!(rec.after_max_circumradius <= rec.before_max_circumradius + crate::TAU_GEO);
        assert!(cx.is_locally_delaunay(&rec.new_facet).unwrap());
        assert!(matches!(cx.flip(&rec.new_facet), Err(Error::LocallyDelaunay { .. })));
    }

    #[test]
    fn non_convex_quad_cannot_flip() {
        let p = pts(&[[0.0, 0.0], [4.0, 0.0], [2.0, 3.0], [2.0, 0.5]]);
        let mut cx = build_complex(p, vec![vec![0, 1, 3], vec![1, 2, 3], vec![0, 2, 3]]).unwrap();
        assert!(matches!(cx.flip_any(&[1, 3]), Err(Error::NonConvex { .. })));
    }

    #[test]
    fn sweep_then_legalize_terminates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<Point> = (0..25).map(|i| Point::new(i, vec![rng.gen(), rng.gen()]).unwrap()).collect();
        let cx = sweep_triangulation(p).unwrap();
        let (out, log) = legalize_to_delaunay(cx).unwrap();
        for f in out.interior_facets() {
            assert!(out.is_locally_delaunay(&f).unwrap());
        }
        let (_, again) = legalize_to_delaunay(out).unwrap();
        assert!(again.is_empty());
        assert!(log.iter().all(|r| r.after_max_circumradius <= r.before_max_circumradius + crate::TAU_GEO));
    }
}
