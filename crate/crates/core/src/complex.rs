//! Simplicial complexes with facet adjacency.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{centroid, circumsphere_unchecked, measure_unchecked, Circumsphere, Point};
use crate::predicates::{in_sphere_with, orient_sign, InSphere};

/// Sorted vertex ids of a d-simplex.
pub type Cell = SmallVec<[usize; 4]>;
/// Sorted vertex ids of a (d-1)-face.
pub type Facet = SmallVec<[usize; 3]>;

/// Cells above this count skip the coverage scan.
pub const COVERAGE_LIMIT: usize = 10_000;

#[derive(Clone, Debug)]
pub struct TriangulationComplex {
    dimension: usize,
    points: Vec<Point>,
    cells: Vec<Cell>,
    facets: HashMap<Facet, SmallVec<[usize; 2]>>,
    bound_q: OnceLock<f64>,
    pub provenance: serde_json::Value,
    pub window_radius: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    pub dimension: usize,
    pub points: Vec<Vec<f64>>,
    pub cells: Vec<Vec<usize>>,
    #[serde(default)]
    pub provenance: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_radius: Option<f64>,
}

pub(crate) fn sorted_cell(ids: &[usize]) -> Cell {
    let mut c: Cell = ids.iter().copied().collect();
    c.sort_unstable();
    c
}

pub(crate) fn sorted_facet(ids: &[usize]) -> Facet {
    let mut f: Facet = ids.iter().copied().collect();
    f.sort_unstable();
    f
}

/// Facet of `cell` opposite its `i`-th vertex.
pub(crate) fn facet_without(cell: &[usize], i: usize) -> Facet {
    cell.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect()
}

/// Builds a full triangulation of the convex hull of its vertices, checking every invariant.
pub fn build_complex(points: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<TriangulationComplex> {
    let cx = TriangulationComplex::assemble(points, cells)?;
    if cx.cells.len() <= COVERAGE_LIMIT {
        cx.check_coverage()?;
    }
    Ok(cx)
}

/// Builds a simplicial complex without requiring it to cover a convex region.
pub fn build_subcomplex(points: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<TriangulationComplex> {
    TriangulationComplex::assemble(points, cells)
}

impl TriangulationComplex {
    fn assemble(points: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let dimension = match points.first() {
            Some(p) => p.dim(),
            None => return Err(Error::InvalidInput("complex without points".into())),
        };
        if !(1..=3).contains(&dimension) {
            return Err(Error::UnsupportedDimension(dimension));
        }
        for (i, p) in points.iter().enumerate() {
            if p.dim() != dimension {
                return Err(Error::DimensionMismatch { expected: dimension, found: p.dim() });
            }
            if p.id != i {
                return Err(Error::InvalidInput(format!("point at index {i} carries id {}", p.id)));
            }
            if p.coords.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite { id: i });
            }
        }
        let mut sorted = Vec::with_capacity(cells.len());
        let mut seen = HashSet::with_capacity(cells.len());
        for (ci, c) in cells.iter().enumerate() {
            if c.len() != dimension + 1 {
                return Err(Error::DimensionMismatch { expected: dimension + 1, found: c.len() });
            }
            if let Some(&id) = c.iter().find(|&&id| id >= points.len()) {
                return Err(Error::InvalidId { cell: ci, id });
            }
            let s = sorted_cell(c);
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Degenerate { ids: s.to_vec() });
            }
            let pts: SmallVec<[&[f64]; 4]> = s.iter().map(|&v| points[v].coords.as_slice()).collect();
            if orient_sign(&pts) == 0 {
                return Err(Error::Degenerate { ids: s.to_vec() });
            }
            if !seen.insert(s.clone()) {
                return Err(Error::NonManifold { facet: s.to_vec(), count: 2 });
            }
            sorted.push(s);
        }
        let mut cx = TriangulationComplex {
            dimension,
            points,
            cells: sorted,
            facets: HashMap::new(),
            bound_q: OnceLock::new(),
            provenance: serde_json::Value::Null,
            window_radius: None,
        };
        cx.rebuild_facets()?;
        Ok(cx)
    }

    fn rebuild_facets(&mut self) -> Result<()> {
        let mut facets: HashMap<Facet, SmallVec<[usize; 2]>> = HashMap::with_capacity(self.cells.len() * 2);
        for (ci, c) in self.cells.iter().enumerate() {
            for i in 0..c.len() {
                facets.entry(facet_without(c, i)).or_default().push(ci);
            }
        }
        if let Some((f, v)) = facets.iter().find(|(_, v)| v.len() > 2) {
            return Err(Error::NonManifold { facet: f.to_vec(), count: v.len() });
        }
        self.facets = facets;
        Ok(())
    }

    /// Every boundary facet must support the vertex set, the cells must exactly fill
    /// the hull, and no point inside the hull may be missing from the vertex set.
    pub fn check_coverage(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Ok(());
        }
        let used = self.vertex_ids();
        let verts: Vec<usize> = used.iter().copied().collect();
        let inner = centroid(&verts.iter().map(|&v| self.coords(v)).collect::<Vec<_>>());
        let mut hull_volume = 0.0;
        let mut supports: Vec<(Facet, i8)> = Vec::new();
        for (f, inc) in &self.facets {
            if inc.len() != 1 {
                continue;
            }
            let cell = &self.cells[inc[0]];
            let opp = *cell.iter().find(|v| !f.contains(v)).unwrap();
            let mut pts: SmallVec<[&[f64]; 4]> = f.iter().map(|&v| self.coords(v)).collect();
            pts.push(self.coords(opp));
            let side = orient_sign(&pts);
            for &v in &verts {
                *pts.last_mut().unwrap() = self.coords(v);
                let s = orient_sign(&pts);
                if s != 0 && s != side {
                    return Err(Error::Coverage(format!(
                        "boundary facet {:?} does not support the hull (vertex {v} lies beyond it)",
                        f.to_vec()
                    )));
                }
            }
            *pts.last_mut().unwrap() = inner.as_slice();
            hull_volume += measure_unchecked(&pts);
            supports.push((f.clone(), side));
        }
        let total = self.total_measure();
        if (total - hull_volume).abs() > 1e-8 * hull_volume.max(f64::MIN_POSITIVE) {
            return Err(Error::Coverage(format!("cell measure {total} differs from hull volume {hull_volume}")));
        }
        for p in &self.points {
            if used.contains(&p.id) {
                continue;
            }
            let inside = supports.iter().all(|(f, side)| {
                let mut pts: SmallVec<[&[f64]; 4]> = f.iter().map(|&v| self.coords(v)).collect();
                pts.push(&p.coords);
                let s = orient_sign(&pts);
                s == 0 || s == *side
            });
            if inside {
                return Err(Error::Coverage(format!("point {} lies in the underlying space but is not a vertex", p.id)));
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn coords(&self, v: usize) -> &[f64] {
        &self.points[v].coords
    }

    pub fn cell_coords(&self, c: usize) -> SmallVec<[&[f64]; 4]> {
        self.cells[c].iter().map(|&v| self.points[v].coords.as_slice()).collect()
    }

    pub fn vertex_ids(&self) -> std::collections::BTreeSet<usize> {
        self.cells.iter().flat_map(|c| c.iter().copied()).collect()
    }

    pub fn cell_set(&self) -> HashSet<Cell> {
        self.cells.iter().cloned().collect()
    }

    pub fn incident_cells(&self, facet: &[usize]) -> Option<&[usize]> {
        self.facets.get(&sorted_facet(facet)).map(|v| v.as_slice())
    }

    pub fn facets(&self) -> impl Iterator<Item = (&Facet, &[usize])> {
        self.facets.iter().map(|(f, v)| (f, v.as_slice()))
    }

    /// Interior facets in sorted order.
    pub fn interior_facets(&self) -> Vec<Facet> {
        let mut v: Vec<Facet> = self.facets.iter().filter(|(_, c)| c.len() == 2).map(|(f, _)| f.clone()).collect();
        v.sort_unstable();
        v
    }

    pub fn boundary_facets(&self) -> Vec<Facet> {
        let mut v: Vec<Facet> = self.facets.iter().filter(|(_, c)| c.len() == 1).map(|(f, _)| f.clone()).collect();
        v.sort_unstable();
        v
    }

    pub fn opposite_vertex(&self, cell: usize, facet: &[usize]) -> usize {
        *self.cells[cell].iter().find(|v| !facet.contains(v)).expect("facet is a face of the cell")
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        measure_unchecked(&self.cell_coords(c))
    }

    pub fn total_measure(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_measure(c)).sum()
    }

    pub fn cell_circumsphere(&self, c: usize) -> Circumsphere {
        circumsphere_unchecked(&self.cell_coords(c))
    }

    /// In-sphere test of point `v` against the circumsphere of cell `c`.
    pub(crate) fn cell_in_sphere(&self, c: usize, v: usize) -> InSphere {
        let pts = self.cell_coords(c);
        in_sphere_with(&pts, self.coords(v), orient_sign(&pts))
    }

    /// Whether the opposite vertices of an interior facet lie outside each other's circumspheres.
    pub fn is_locally_delaunay(&self, facet: &[usize]) -> Result<bool> {
        let f = sorted_facet(facet);
        let inc = self.facets.get(&f).ok_or_else(|| Error::MissingFacet { facet: f.to_vec() })?;
        if inc.len() != 2 {
            return Err(Error::BoundaryFacet { facet: f.to_vec() });
        }
        let v2 = self.opposite_vertex(inc[1], &f);
        match self.cell_in_sphere(inc[0], v2) {
            InSphere::Outside => Ok(true),
            InSphere::Inside => Ok(false),
            InSphere::On => {
                let mut ids = self.cells[inc[0]].to_vec();
                ids.push(v2);
                Err(Error::NonGeneric { ids })
            }
        }
    }

    /// Maximum circumradius over all cells (cached).
    pub fn uniform_bound_q(&self) -> f64 {
        *self
            .bound_q
            .get_or_init(|| (0..self.cells.len()).map(|c| self.cell_circumsphere(c).radius).fold(0.0, f64::max))
    }

    /// Maximum circumradius over cells whose circumball lies inside `B_w(0)`.
    pub fn interior_bound_q(&self, w: f64) -> f64 {
        (0..self.cells.len())
            .map(|c| self.cell_circumsphere(c))
            .filter(|s| s.center.iter().map(|x| x * x).sum::<f64>().sqrt() + s.radius <= w)
            .map(|s| s.radius)
            .fold(0.0, f64::max)
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut best: f64 = 0.0;
        for c in &self.cells {
            for i in 0..c.len() {
                for j in i + 1..c.len() {
                    best = best.max(crate::geometry::dist(self.coords(c[i]), self.coords(c[j])));
                }
            }
        }
        best
    }

    /// Replaces cell `idx` with `new`, keeping the facet map in sync.
    pub(crate) fn replace_cell(&mut self, idx: usize, new: Cell) {
        let old = std::mem::replace(&mut self.cells[idx], new.clone());
        for i in 0..old.len() {
            let f = facet_without(&old, i);
            if let Some(v) = self.facets.get_mut(&f) {
                v.retain(|c| *c != idx);
                if v.is_empty() {
                    self.facets.remove(&f);
                }
            }
        }
        for i in 0..new.len() {
            self.facets.entry(facet_without(&new, i)).or_default().push(idx);
        }
        self.bound_q = OnceLock::new();
    }

    /// The subcomplex formed by the selected cells, sharing this complex's points.
    pub fn subcomplex(&self, keep: impl Fn(usize) -> bool) -> TriangulationComplex {
        let cells: Vec<Cell> = (0..self.cells.len()).filter(|&c| keep(c)).map(|c| self.cells[c].clone()).collect();
        let mut cx = TriangulationComplex {
            dimension: self.dimension,
            points: self.points.clone(),
            cells,
            facets: HashMap::new(),
            bound_q: OnceLock::new(),
            provenance: self.provenance.clone(),
            window_radius: self.window_radius,
        };
        cx.rebuild_facets().expect("subcomplex of a manifold complex is manifold");
        cx
    }

    pub fn with_cells(&self, cells: Vec<Cell>) -> Result<TriangulationComplex> {
        let mut cx = self.subcomplex(|_| false);
        cx.cells = cells;
        cx.rebuild_facets()?;
        Ok(cx)
    }

    pub fn to_json(&self) -> ComplexJson {
        ComplexJson {
            dimension: self.dimension,
            points: self.points.iter().map(|p| p.coords.clone()).collect(),
            cells: self.cells.iter().map(|c| c.to_vec()).collect(),
            provenance: self.provenance.clone(),
            window_radius: self.window_radius,
        }
    }

    /// Parses the JSON form; `full` selects the triangulation checks of [`build_complex`].
    pub fn from_json(json: ComplexJson, full: bool) -> Result<Self> {
        let points = json
            .points
            .into_iter()
            .enumerate()
            .map(|(i, c)| Point::new(i, c))
            .collect::<Result<Vec<_>>>()?;
        if points.first().map(|p| p.dim()) != Some(json.dimension) {
            return Err(Error::DimensionMismatch {
                expected: json.dimension,
                found: points.first().map_or(0, |p| p.dim()),
            });
        }
        let mut cx = if full { build_complex(points, json.cells)? } else { build_subcomplex(points, json.cells)? };
        cx.provenance = json.provenance;
        cx.window_radius = json.window_radius;
        Ok(cx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(c: &[[f64; 2]]) -> Vec<Point> {
        c.iter().enumerate().map(|(i, p)| Point::new(i, p.to_vec()).unwrap()).collect()
    }

    #[test]
    fn two_triangles_share_one_interior_facet() {
        let p = pts(&[[0.0, 0.0], [2.0, 0.1], [2.1, 2.0], [0.1, 1.9]]);
        let cx = build_complex(p, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        assert_eq!(cx.interior_facets().len(), 1);
        assert_eq!(cx.boundary_facets().len(), 4);
    }

    #[test]
    fn three_cells_on_one_edge_rejected() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, -1.0], [0.5, 2.0]]);
        let err = build_complex(p, vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::NonManifold { .. }));
    }

    #[test]
    fn missing_center_vertex_rejected() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let cells = vec![vec![0, 1, 4], vec![1, 2, 4], vec![2, 3, 4], vec![3, 0, 4]];
        assert!(matches!(build_complex(p, cells), Err(Error::InvalidId { .. })));
    }

    #[test]
    fn overlapping_cells_rejected() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        let cells = vec![vec![0, 1, 2], vec![0, 2, 3], vec![1, 2, 3]];
        assert!(build_complex(p, cells).is_err());
    }

    #[test]
    fn unused_interior_point_rejected() {
        let p = pts(&[[0.0, 0.0], [4.0, 0.0], [2.0, 3.0], [2.0, 1.0]]);
        assert!(matches!(build_complex(p.clone(), vec![vec![0, 1, 2]]), Err(Error::Coverage(_))));
        assert!(build_subcomplex(p, vec![vec![0, 1, 2]]).is_ok());
    }

    #[test]
    fn degenerate_cell_rejected() {
        let p = pts(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]);
        assert!(matches!(build_complex(p, vec![vec![0, 1, 2]]), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn locally_delaunay_on_thin_rectangle() {
        // (0,0),(3,0),(3,1),(0,1) split by the diagonal 0-2.
        let p = pts(&[[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [0.0, 1.0]]);
        let cx = build_complex(p, vec![vec![0, 1, 2], vec![0, 2, 3]]).unwrap();
        // A rectangle is cocircular, so the test reports non-genericity.
        assert!(matches!(cx.is_locally_delaunay(&[0, 2]), Err(Error::NonGeneric { .. })));
        assert!(matches!(cx.is_locally_delaunay(&[0, 1]), Err(Error::BoundaryFacet { .. })));
    }

    #[test]
    fn bound_q_of_single_triangle() {
        let p = pts(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]]);
        let cx = build_complex(p, vec![vec![0, 1, 2]]).unwrap();
        assert!((cx.uniform_bound_q() - 2.5).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let p = pts(&[[0.1, 1.0 / 3.0], [2.0f64.sqrt(), 1e-17], [std::f64::consts::PI, 7.25]]);
        let cx = build_complex(p, vec![vec![0, 1, 2]]).unwrap();
        let s = serde_json::to_string(&cx.to_json()).unwrap();
        let back = TriangulationComplex::from_json(serde_json::from_str(&s).unwrap(), true).unwrap();
        for (a, b) in cx.points().iter().zip(back.points()) {
            for (x, y) in a.coords.iter().zip(&b.coords) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        assert_eq!(cx.cells(), back.cells());
    }
}
