//! Delaunay tetrahedra of the distorted cubic lattice, cube by cube.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::complex::{sorted_cell, Cell};
use crate::delaunay::delaunay;
use crate::error::Result;
use crate::generators::{distorted_cubic_window, distortion, make_generic};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeRow {
    pub corner: [i64; 3],
    pub tetrahedra: usize,
    pub bottom_volume: Option<f64>,
    pub bottom_expected: f64,
    pub top_volume: Option<f64>,
    pub top_expected: f64,
    pub min_volume: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeReport {
    pub window_radius: f64,
    pub points: usize,
    pub cells: usize,
    pub jittered: usize,
    pub interior_cubes: usize,
    pub cubes_with_seven: usize,
    pub max_flat_volume_error: f64,
    pub min_interior_volume: f64,
    pub rows: Vec<CubeRow>,
}

/// Triangulates the distorted cubic window of radius `w` and inspects every interior
/// unit cube (all eight lattice corners within `w - 1` of the origin).
pub fn cube_report(w: f64, seed: u64) -> Result<CubeReport> {
    let (raw, index) = distorted_cubic_window(w)?;
    let window = make_generic(&raw, seed)?;
    let jittered: HashSet<usize> =
        window.generator.jitter.as_ref().map(|j| j.ids.iter().copied().collect()).unwrap_or_default();
    let cx = delaunay(window.points.clone())?;
    let at: HashMap<[i64; 3], usize> = index.iter().enumerate().map(|(i, z)| (*z, i)).collect();
    let mut by_cell: HashMap<Cell, usize> = HashMap::new();
    for (ci, c) in cx.cells().iter().enumerate() {
        by_cell.insert(c.clone(), ci);
    }
    let volume = |ids: &[usize]| by_cell.get(&sorted_cell(ids)).map(|&c| cx.cell_measure(c));
    let limit = (w - 1.0) * (w - 1.0);
    let inside = |z: &[i64; 3]| ((z[0] * z[0] + z[1] * z[1] + z[2] * z[2]) as f64) <= limit;
    let m = w.floor() as i64;
    let mut rows = Vec::new();
    let mut max_err: f64 = 0.0;
    let mut min_vol = f64::INFINITY;
    for i in -m..m {
        for j in -m..m {
            for k in -m..m {
                let corners: Vec<[i64; 3]> =
                    (0..8).map(|b| [i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1)]).collect();
                if !corners.iter().all(inside) {
                    continue;
                }
                let ids: Vec<usize> = corners.iter().map(|z| at[z]).collect();
                debug_assert!(ids.iter().all(|v| !jittered.contains(v)));
                let own: Vec<usize> = cx
                    .cells()
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.iter().all(|v| ids.contains(v)))
                    .map(|(ci, _)| ci)
                    .collect();
                let cube_min = own.iter().map(|&c| cx.cell_measure(c)).fold(f64::INFINITY, f64::min);
                let bottom_volume = volume(&ids[0..4]);
                let top_volume = volume(&ids[4..8]);
                let bottom_expected = 2.0 / 3.0 * distortion(k);
                let top_expected = 2.0 / 3.0 * distortion(k + 1);
                for (v, e) in [(bottom_volume, bottom_expected), (top_volume, top_expected)] {
                    max_err = max_err.max(v.map_or(f64::INFINITY, |v| (v - e).abs()));
                }
                min_vol = min_vol.min(cube_min);
                rows.push(CubeRow {
                    corner: [i, j, k],
                    tetrahedra: own.len(),
                    bottom_volume,
                    bottom_expected,
                    top_volume,
                    top_expected,
                    min_volume: cube_min,
                });
            }
        }
    }
    Ok(CubeReport {
        window_radius: w,
        points: window.points.len(),
        cells: cx.num_cells(),
        jittered: jittered.len(),
        interior_cubes: rows.len(),
        cubes_with_seven: rows.iter().filter(|r| r.tetrahedra == 7).count(),
        max_flat_volume_error: max_err,
        min_interior_volume: min_vol,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::measure;
    use crate::generators::distorted_position;

    #[test]
    fn flat_tetrahedron_volume_closed_form() {
        for k in [-3i64, 0, 2, 5] {
            let pts: Vec<[f64; 3]> =
                [(0, 0), (1, 0), (0, 1), (1, 1)].iter().map(|&(i, j)| distorted_position(i, j, k)).collect();
            let v = measure(&pts).unwrap();
            assert!((v - 2.0 / 3.0 * distortion(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn small_window_cubes_have_seven_tetrahedra() {
        let rep = cube_report(4.0, 1).unwrap();
        assert!(rep.interior_cubes > 0);
        assert_eq!(rep.cubes_with_seven, rep.interior_cubes);
        assert!(rep.max_flat_volume_error <= 1e-9);
    }
}
