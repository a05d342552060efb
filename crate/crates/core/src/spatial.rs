//! Uniform bucket grid for radius and nearest-neighbour queries in 2D and 3D.

use std::collections::HashMap;

use crate::geometry::dist2;

pub struct PointGrid {
    d: usize,
    h: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
    coords: Vec<Vec<f64>>,
}

impl PointGrid {
    pub fn new(d: usize, h: f64) -> Self {
        assert!(h > 0.0 && (1..=3).contains(&d));
        PointGrid { d, h, buckets: HashMap::new(), coords: Vec::new() }
    }

    pub fn from_points<'a>(d: usize, h: f64, pts: impl Iterator<Item = &'a [f64]>) -> Self {
        let mut g = PointGrid::new(d, h);
        for p in pts {
            g.insert(p);
        }
        g
    }

    fn key(&self, p: &[f64]) -> [i64; 3] {
        let mut k = [0i64; 3];
        for j in 0..self.d {
            k[j] = (p[j] / self.h).floor() as i64;
        }
        k
    }

    /// Inserts a point and returns its index in insertion order.
    pub fn insert(&mut self, p: &[f64]) -> usize {
        let id = self.coords.len();
        self.coords.push(p.to_vec());
        self.buckets.entry(self.key(p)).or_default().push(id);
        id
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn for_each_in_box(&self, p: &[f64], reach: i64, mut f: impl FnMut(usize)) {
        let k = self.key(p);
        let r = |j: usize| if j < self.d { -reach..=reach } else { 0..=0 };
        for a in r(0) {
            for b in r(1) {
                for c in r(2) {
                    if let Some(v) = self.buckets.get(&[k[0] + a, k[1] + b, k[2] + c]) {
                        v.iter().for_each(|&i| f(i));
                    }
                }
            }
        }
    }

    /// Indices of points within `radius` of `p` (closed ball).
    pub fn within(&self, p: &[f64], radius: f64) -> Vec<usize> {
        let reach = (radius / self.h).ceil() as i64;
        let r2 = radius * radius;
        let mut out = Vec::new();
        self.for_each_in_box(p, reach, |i| {
            if dist2(&self.coords[i], p) <= r2 {
                out.push(i);
            }
        });
        out
    }

    /// Nearest point within `max_radius`, excluding index `skip`.
    pub fn nearest(&self, p: &[f64], max_radius: f64, skip: Option<usize>) -> Option<(usize, f64)> {
        let reach = (max_radius / self.h).ceil() as i64;
        let mut best: Option<(usize, f64)> = None;
        self.for_each_in_box(p, reach, |i| {
            if Some(i) == skip {
                return;
            }
            let d2 = dist2(&self.coords[i], p);
            if d2 <= max_radius * max_radius && best.is_none_or(|(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        });
        best.map(|(i, d2)| (i, d2.sqrt()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_and_nearest_queries() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 2.5], [3.0, 3.0]];
        let g = PointGrid::from_points(2, 0.7, pts.iter().map(|p| p.as_slice()));
        let mut w = g.within(&[0.1, 0.1], 1.0);
        w.sort();
        assert_eq!(w, vec![0, 1]);
        assert_eq!(g.nearest(&[2.9, 2.0], 5.0, None).unwrap().0, 3);
        assert_eq!(g.nearest(&[0.0, 0.0], 5.0, Some(0)).unwrap().0, 1);
        assert!(g.nearest(&[10.0, 10.0], 1.0, None).is_none());
    }
}
