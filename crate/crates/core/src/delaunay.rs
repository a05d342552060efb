//! Delaunay triangulations in the plane and in space.
//!
//! Points are inserted one at a time into the lower hull of their lifts
//! `(x, |x|^2)`. A vertex at vertical infinity closes the hull, so cells
//! containing it stand for the facets of the current convex hull. A finite
//! cell conflicts with a new point when the point lies strictly inside its
//! circumsphere (the lifted point is strictly below the cell's lifted
//! hyperplane); the conflict region is replaced by a cone from the new point.

use std::collections::HashMap;

use smallvec::SmallVec;

use crate::complex::{build_complex, TriangulationComplex};
use crate::error::{Error, Result};
use crate::generators::PointSetWindow;
use crate::geometry::{circumsphere_unchecked, dist2, Point};
use crate::predicates::{in_sphere_with, orient_sign, InSphere};

const INF: usize = usize::MAX;
const NONE: usize = usize::MAX;

/// Exhaustive emptiness verification up to this many points; sampled above.
pub const EXHAUSTIVE_EMPTINESS: usize = 200;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Conflict {
    Yes,
    No,
    On,
}

struct Builder<'a> {
    d: usize,
    pts: &'a [Point],
    cells: Vec<[usize; 4]>,
    nbrs: Vec<[usize; 4]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    last: usize,
    visit: Vec<u32>,
    stamp: u32,
    rot: usize,
}

impl<'a> Builder<'a> {
    fn coords(&self, v: usize) -> &'a [f64] {
        &self.pts[v].coords
    }

    fn is_infinite(&self, c: usize) -> bool {
        self.cells[c][..=self.d].contains(&INF)
    }

    /// Orientation of cell `c` with slot `slot` replaced by point `p`.
    fn orient_replaced(&self, c: usize, slot: usize, p: &[f64]) -> i8 {
        let cell = &self.cells[c];
        let pts: SmallVec<[&[f64]; 4]> =
            (0..=self.d).map(|k| if k == slot { p } else { self.coords(cell[k]) }).collect();
        orient_sign(&pts)
    }

    fn finite_conflict(&self, c: usize, p: &[f64]) -> Conflict {
        let pts: SmallVec<[&[f64]; 4]> = self.cells[c][..=self.d].iter().map(|&v| self.coords(v)).collect();
        match in_sphere_with(&pts, p, 1) {
            InSphere::Inside => Conflict::Yes,
            InSphere::On => Conflict::On,
            InSphere::Outside => Conflict::No,
        }
    }

    fn conflict(&self, c: usize, p: &[f64]) -> Conflict {
        match self.cells[c][..=self.d].iter().position(|&v| v == INF) {
            None => self.finite_conflict(c, p),
            Some(k) => match self.orient_replaced(c, k, p) {
                o if o > 0 => Conflict::Yes,
                o if o < 0 => Conflict::No,
                _ => self.finite_conflict(self.nbrs[c][k], p),
            },
        }
    }

    fn alloc(&mut self, cell: [usize; 4]) -> usize {
        if let Some(i) = self.free.pop() {
            self.cells[i] = cell;
            self.nbrs[i] = [NONE; 4];
            self.alive[i] = true;
            i
        } else {
            self.cells.push(cell);
            self.nbrs.push([NONE; 4]);
            self.alive.push(true);
            self.visit.push(0);
            self.cells.len() - 1
        }
    }

    fn facet_key(&self, c: usize, slot: usize) -> SmallVec<[usize; 3]> {
        let mut k: SmallVec<[usize; 3]> =
            (0..=self.d).filter(|&j| j != slot).map(|j| self.cells[c][j]).collect();
        k.sort_unstable();
        k
    }

    /// Pairs up facets among `cells` that share the same vertex set.
    fn link(&mut self, cells: &[usize], skip_slot: Option<&[usize]>) {
        let mut open: HashMap<SmallVec<[usize; 3]>, (usize, usize)> = HashMap::new();
        for (idx, &c) in cells.iter().enumerate() {
            for j in 0..=self.d {
                if skip_slot.is_some_and(|s| s[idx] == j) {
                    continue;
                }
                let key = self.facet_key(c, j);
                if let Some((o, oj)) = open.remove(&key) {
                    self.nbrs[c][j] = o;
                    self.nbrs[o][oj] = c;
                } else {
                    open.insert(key, (c, j));
                }
            }
        }
    }

    fn init(&mut self, simplex: &[usize]) {
        let d = self.d;
        let mut f = [NONE; 4];
        f[..=d].copy_from_slice(simplex);
        let pts: SmallVec<[&[f64]; 4]> = f[..=d].iter().map(|&v| self.coords(v)).collect();
        if orient_sign(&pts) < 0 {
            f.swap(0, 1);
        }
        let fc = self.alloc(f);
        let mut all = vec![fc];
        for i in 0..=d {
            let mut g = f;
            g[i] = INF;
            let (j, k) = match i {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            g.swap(j, k);
            all.push(self.alloc(g));
        }
        self.link(&all, None);
        self.last = fc;
    }

    /// Finds a cell in conflict with `p`, or reports a duplicate vertex.
    fn locate(&mut self, p: &[f64], id: usize) -> Result<usize> {
        let d = self.d;
        let mut c = self.last;
        if !self.alive[c] {
            c = (0..self.cells.len()).find(|&i| self.alive[i]).unwrap();
        }
        if let Some(k) = self.cells[c][..=d].iter().position(|&v| v == INF) {
            c = self.nbrs[c][k];
        }
        let limit = 4 * self.cells.len() + 64;
        'walk: for _ in 0..limit {
            if self.is_infinite(c) {
                if self.conflict(c, p) == Conflict::Yes {
                    return Ok(c);
                }
                break;
            }
            self.rot = self.rot.wrapping_add(1);
            for t in 0..=d {
                let i = (t + self.rot) % (d + 1);
                if self.orient_replaced(c, i, p) < 0 {
                    c = self.nbrs[c][i];
                    continue 'walk;
                }
            }
            for &v in &self.cells[c][..=d] {
                if self.coords(v) == p {
                    return Err(Error::DuplicatePoint { a: v, b: id });
                }
            }
            return Ok(c);
        }
        // The walk failed to settle; fall back to a scan.
        for i in 0..self.cells.len() {
            if self.alive[i] && self.conflict(i, p) == Conflict::Yes {
                return Ok(i);
            }
        }
        Err(Error::InvalidInput(format!("no cell conflicts with point {id}")))
    }

    fn insert(&mut self, v: usize) -> Result<()> {
        let d = self.d;
        let p = self.coords(v);
        let start = self.locate(p, v)?;
        self.stamp += 2;
        let (inside, outside) = (self.stamp, self.stamp + 1);
        let mut region = vec![start];
        self.visit[start] = inside;
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        let mut k = 0;
        while k < region.len() {
            let c = region[k];
            k += 1;
            for i in 0..=d {
                let n = self.nbrs[c][i];
                if self.visit[n] == inside {
                    continue;
                }
                if self.visit[n] != outside {
                    if self.conflict(n, p) == Conflict::Yes {
                        self.visit[n] = inside;
                        region.push(n);
                        continue;
                    }
                    self.visit[n] = outside;
                }
                horizon.push((c, i));
            }
        }
        let mut created = Vec::with_capacity(horizon.len());
        let mut slots = Vec::with_capacity(horizon.len());
        for &(c, i) in &horizon {
            let mut cell = self.cells[c];
            cell[i] = v;
            let n = self.nbrs[c][i];
            let nc = self.alloc(cell);
            self.nbrs[nc][i] = n;
            let back = (0..=d).find(|&j| self.nbrs[n][j] == c).expect("adjacency is symmetric");
            self.nbrs[n][back] = nc;
            created.push(nc);
            slots.push(i);
        }
        self.link(&created, Some(&slots));
        for &c in &region {
            self.alive[c] = false;
            self.free.push(c);
        }
        self.last = created.iter().copied().find(|&c| !self.is_infinite(c)).unwrap_or(created[0]);
        Ok(())
    }

    fn finite_cells(&self) -> Vec<Vec<usize>> {
        (0..self.cells.len())
            .filter(|&c| self.alive[c] && !self.is_infinite(c))
            .map(|c| self.cells[c][..=self.d].to_vec())
            .collect()
    }
}

/// Morton order of the points after quantizing to the bounding box.
fn spatial_order(points: &[Point], d: usize) -> Vec<usize> {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for j in 0..d {
            lo[j] = lo[j].min(p.coords[j]);
            hi[j] = hi[j].max(p.coords[j]);
        }
    }
    let bits = 63 / d as u32;
    let scale = (1u64 << bits) as f64 - 1.0;
    let key = |p: &Point| -> u64 {
        let q: SmallVec<[u64; 3]> = (0..d)
            .map(|j| {
                let w = hi[j] - lo[j];
                if w > 0.0 {
                    ((p.coords[j] - lo[j]) / w * scale) as u64
                } else {
                    0
                }
            })
            .collect();
        let mut k = 0u64;
        for b in (0..bits).rev() {
            for qj in &q {
                k = (k << 1) | ((qj >> b) & 1);
            }
        }
        k
    };
    let mut order: Vec<usize> = (0..points.len()).collect();
    let keys: Vec<u64> = points.iter().map(key).collect();
    order.sort_by_key(|&i| (keys[i], i));
    order
}

fn collinear3(a: &[f64], b: &[f64], c: &[f64]) -> bool {
    let proj = |i: usize, j: usize| orient_sign(&[[a[i], a[j]], [b[i], b[j]], [c[i], c[j]]]) == 0;
    proj(0, 1) && proj(0, 2) && proj(1, 2)
}

/// Picks d+1 affinely independent points, following the insertion order.
fn initial_simplex(points: &[Point], order: &[usize], d: usize) -> Result<Vec<usize>> {
    let c = |i: usize| points[i].coords.as_slice();
    let first = order[0];
    let second = order
        .iter()
        .copied()
        .find(|&i| c(i) != c(first))
        .ok_or(Error::Degenerate { ids: vec![first] })?;
    let mut s = vec![first, second];
    if d == 1 {
        return Ok(s);
    }
    let third = if d == 2 {
        order.iter().copied().find(|&i| orient_sign(&[c(first), c(second), c(i)]) != 0)
    } else {
        order.iter().copied().find(|&i| !collinear3(c(first), c(second), c(i)))
    }
    .ok_or(Error::Degenerate { ids: order.to_vec() })?;
    s.push(third);
    if d == 3 {
        let fourth = order
            .iter()
            .copied()
            .find(|&i| orient_sign(&[c(first), c(second), c(third), c(i)]) != 0)
            .ok_or(Error::Degenerate { ids: order.to_vec() })?;
        s.push(fourth);
    }
    Ok(s)
}

/// Builds the Delaunay triangulation and reports every interior facet whose two
/// opposite vertices are cospherical with it (each as the cell ids plus the
/// opposite vertex). The triangulation is valid either way.
pub fn delaunay_permissive(points: Vec<Point>) -> Result<(TriangulationComplex, Vec<Vec<usize>>)> {
    let d = points.first().map(|p| p.dim()).ok_or_else(|| Error::InvalidInput("no points".into()))?;
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    for (i, p) in points.iter().enumerate() {
        if p.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.dim() });
        }
        if p.id != i {
            return Err(Error::InvalidInput(format!("point at index {i} carries id {}", p.id)));
        }
        if p.coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id: i });
        }
    }
    if points.len() < d + 1 {
        return Err(Error::InvalidInput(format!("need at least {} points, got {}", d + 1, points.len())));
    }
    let order = spatial_order(&points, d);
    let simplex = initial_simplex(&points, &order, d)?;
    let mut b = Builder {
        d,
        pts: &points,
        cells: Vec::new(),
        nbrs: Vec::new(),
        alive: Vec::new(),
        free: Vec::new(),
        last: 0,
        visit: Vec::new(),
        stamp: 0,
        rot: 0,
    };
    b.init(&simplex);
    for &v in &order {
        if !simplex.contains(&v) {
            b.insert(v)?;
        }
    }
    let cells = b.finite_cells();
    let cx = build_complex(points, cells)?;
    let mut ties = Vec::new();
    for f in cx.interior_facets() {
        let inc = cx.incident_cells(&f).unwrap();
        let v2 = cx.opposite_vertex(inc[1], &f);
        if cx.cell_in_sphere(inc[0], v2) == InSphere::On {
            let mut ids = cx.cells()[inc[0]].to_vec();
            ids.push(v2);
            ties.push(ids);
        }
    }
    Ok((cx, ties))
}

/// Delaunay triangulation of a generic point set in the plane or space.
pub fn delaunay(points: Vec<Point>) -> Result<TriangulationComplex> {
    let (cx, ties) = delaunay_permissive(points)?;
    if let Some(ids) = ties.into_iter().next() {
        return Err(Error::NonGeneric { ids });
    }
    verify_empty(&cx, EXHAUSTIVE_EMPTINESS)?;
    Ok(cx)
}

/// Delaunay triangulation of a window, tagged with its radius and provenance.
pub fn delaunay_window(window: &PointSetWindow) -> Result<TriangulationComplex> {
    let mut cx = delaunay(window.points.clone())?;
    cx.window_radius = Some(window.window_radius);
    cx.provenance = serde_json::to_value(&window.generator)?;
    Ok(cx)
}

pub fn delaunay_2d(points: Vec<Point>) -> Result<TriangulationComplex> {
    match points.first().map(|p| p.dim()) {
        Some(2) => delaunay(points),
        Some(d) => Err(Error::DimensionMismatch { expected: 2, found: d }),
        None => Err(Error::InvalidInput("no points".into())),
    }
}

pub fn delaunay_3d(points: Vec<Point>) -> Result<TriangulationComplex> {
    match points.first().map(|p| p.dim()) {
        Some(3) => delaunay(points),
        Some(d) => Err(Error::DimensionMismatch { expected: 3, found: d }),
        None => Err(Error::InvalidInput("no points".into())),
    }
}

/// Checks that no point lies strictly inside the circumsphere of a cell.
/// Every cell is checked when the complex has at most `exhaustive` points;
/// otherwise an evenly spaced sample of cells is.
pub fn verify_empty(cx: &TriangulationComplex, exhaustive: usize) -> Result<()> {
    let n = cx.points().len();
    let m = cx.num_cells();
    let cells: Vec<usize> = if n <= exhaustive {
        (0..m).collect()
    } else {
        let k = exhaustive.min(m).max(1);
        (0..k).map(|i| i * m / k).collect()
    };
    for c in cells {
        let sphere = circumsphere_unchecked(&cx.cell_coords(c));
        let r2 = sphere.radius * sphere.radius * (1.0 + 1e-6) + 1e-300;
        let cell = &cx.cells()[c];
        for p in cx.points() {
            if cell.contains(&p.id) || dist2(&p.coords, &sphere.center) > r2 {
                continue;
            }
            if cx.cell_in_sphere(c, p.id) == InSphere::Inside {
                return Err(Error::NotEmpty { cell: cell.to_vec(), point: p.id });
            }
        }
    }
    Ok(())
}

/// Brute-force Delaunay cells: all empty non-degenerate simplices.
pub fn empty_simplices(points: &[Point]) -> Vec<Vec<usize>> {
    let n = points.len();
    let d = points.first().map_or(0, |p| p.dim());
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..=d).collect();
    if n < d + 1 {
        return out;
    }
    loop {
        let pts: SmallVec<[&[f64]; 4]> = idx.iter().map(|&i| points[i].coords.as_slice()).collect();
        let o = orient_sign(&pts);
        if o != 0 && (0..n).all(|q| idx.contains(&q) || in_sphere_with(&pts, &points[q].coords, o) == InSphere::Outside) {
            out.push(idx.clone());
        }
        // next combination
        let mut i = d as isize;
        while i >= 0 && idx[i as usize] == n - 1 - (d - i as usize) {
            i -= 1;
        }
        if i < 0 {
            break;
        }
        let i = i as usize;
        idx[i] += 1;
        for j in i + 1..=d {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

/// The two triangulations of `d+2` points in convex position: `D` from the lower
/// lifted facets (Delaunay) and `T` from the upper ones.
pub fn radon_two_triangulations(points: Vec<Point>) -> Result<(TriangulationComplex, TriangulationComplex)> {
    let d = points.first().map(|p| p.dim()).ok_or_else(|| Error::InvalidInput("no points".into()))?;
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if points.len() != d + 2 {
        return Err(Error::InvalidInput(format!("need exactly {} points, got {}", d + 2, points.len())));
    }
    if points.iter().any(|p| p.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: points.iter().map(|p| p.dim()).find(|&e| e != d).unwrap() });
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for omit in 0..d + 2 {
        let ids: Vec<usize> = (0..d + 2).filter(|&i| i != omit).collect();
        let pts: SmallVec<[&[f64]; 4]> = ids.iter().map(|&i| points[i].coords.as_slice()).collect();
        let o = orient_sign(&pts);
        if o == 0 {
            return Err(Error::NonGeneric { ids });
        }
        if point_in_closed_simplex(&pts, &points[omit].coords) {
            return Err(Error::PointInHull { id: omit });
        }
        match in_sphere_with(&pts, &points[omit].coords, o) {
            InSphere::Outside => lower.push(ids),
            InSphere::Inside => upper.push(ids),
            InSphere::On => return Err(Error::NonGeneric { ids: (0..d + 2).collect() }),
        }
    }
    let dl = build_complex(points.clone(), lower)?;
    let tu = build_complex(points, upper)?;
    Ok((dl, tu))
}

/// Closed point-in-simplex test with exact orientations.
pub fn point_in_closed_simplex<P: AsRef<[f64]>>(simplex: &[P], q: &[f64]) -> bool {
    let o = orient_sign(simplex);
    let mut pts: SmallVec<[&[f64]; 4]> = simplex.iter().map(|p| p.as_ref()).collect();
    for i in 0..pts.len() {
        let keep = pts[i];
        pts[i] = q;
        let s = orient_sign(&pts);
        pts[i] = keep;
        if s != 0 && s != o {
            return false;
        }
    }
    true
}
