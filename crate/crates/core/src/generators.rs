//! Finite windows of Delone sets: lattices, the distorted cubic lattice and
//! Poisson-disk samples, with parameter verification and genericity jitter.

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::delaunay::delaunay_permissive;
use crate::error::{Error, Result};
use crate::geometry::{norm2, Point, TAU_GEO};
use crate::rng::stream;
use crate::spatial::PointGrid;

/// Relative jitter magnitude: each jittered point moves by at most `JITTER_SCALE * r`.
pub const JITTER_SCALE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JitterRecord {
    pub magnitude: f64,
    pub seed: u64,
    pub ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub name: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub jitter: Option<JitterRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSetWindow {
    pub dimension: usize,
    pub points: Vec<Point>,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub window_radius: f64,
    pub generator: Provenance,
}

impl PointSetWindow {
    pub fn count_in_ball(&self, center: &[f64], alpha: f64) -> usize {
        let a2 = alpha * alpha;
        self.points.iter().filter(|p| crate::geometry::dist2(&p.coords, center) <= a2).count()
    }
}

/// Uniform sample from the ball of radius `rad` in `R^d`.
pub(crate) fn ball_sample<R: Rng>(rng: &mut R, d: usize, rad: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm2(&v);
        if n <= 1.0 {
            return v.into_iter().map(|x| x * rad).collect();
        }
    }
}

fn lattice_points(d: usize, w: f64) -> Vec<Vec<i64>> {
    let m = w.floor() as i64;
    let w2 = w * w;
    let mut out = Vec::new();
    let mut idx = vec![-m; d];
    loop {
        let n2: f64 = idx.iter().map(|&v| (v * v) as f64).sum();
        if n2 <= w2 {
            out.push(idx.clone());
        }
        let mut j = d;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if idx[j] < m {
                idx[j] += 1;
                break;
            }
            idx[j] = -m;
        }
    }
}

/// `Z^d` restricted to the closed ball `B_w`. With `jitter_seed`, every point is
/// moved uniformly within a ball of radius `1e-6 * r`.
pub fn lattice_window(d: usize, w: f64, jitter_seed: Option<u64>) -> Result<PointSetWindow> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::InvalidInput(format!("window radius {w} must be positive")));
    }
    let mut points: Vec<Point> = lattice_points(d, w)
        .into_iter()
        .enumerate()
        .map(|(i, z)| Point { id: i, coords: z.into_iter().map(|v| v as f64).collect() })
        .collect();
    let (mut r, mut big_r) = (0.5, (d as f64).sqrt() / 2.0);
    let mut jitter = None;
    if let Some(seed) = jitter_seed {
        let eta = JITTER_SCALE * r;
        let mut rng = stream(seed, "jitter");
        for p in &mut points {
            let v = ball_sample(&mut rng, d, eta);
            p.coords.iter_mut().zip(v).for_each(|(c, dv)| *c += dv);
        }
        r -= eta;
        big_r += eta;
        jitter = Some(JitterRecord { magnitude: eta, seed, ids: (0..points.len()).collect() });
    }
    Ok(PointSetWindow {
        dimension: d,
        points,
        r,
        big_r,
        window_radius: w,
        generator: Provenance { name: "lattice".into(), params: json!({ "d": d, "W": w }), seed: jitter_seed, jitter },
    })
}

/// Height offset `delta_l = 1 / (2 + |l|)` of the distorted cubic lattice.
pub fn distortion(l: i64) -> f64 {
    1.0 / (2.0 + l.unsigned_abs() as f64)
}

/// Lattice point `(i, j, k)` moved to `(i, j, k + (-1)^(i+j) delta_k)`.
pub fn distorted_position(i: i64, j: i64, k: i64) -> [f64; 3] {
    let s = if (i + j).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    [i as f64, j as f64, k as f64 + s * distortion(k)]
}

/// The distorted cubic lattice over `Z^3 ∩ B_w` (membership by the undistorted point).
/// Returns the window and the lattice index of each point.
pub fn distorted_cubic_window(w: f64) -> Result<(PointSetWindow, Vec<[i64; 3]>)> {
    if !(w >= 3.0 && w.is_finite()) {
        return Err(Error::InvalidInput(format!("window radius {w} must be at least 3")));
    }
    let lattice = lattice_points(3, w);
    let mut index = Vec::with_capacity(lattice.len());
    let points = lattice
        .into_iter()
        .enumerate()
        .map(|(id, z)| {
            index.push([z[0], z[1], z[2]]);
            Point { id, coords: distorted_position(z[0], z[1], z[2]).to_vec() }
        })
        .collect::<Vec<_>>();
    // Vertical neighbours share their sign, so they stay at least 1 - (1/2 - 1/3) = 5/6 apart;
    // every other pair is at least 1 apart horizontally.
    let window = PointSetWindow {
        dimension: 3,
        points,
        r: 5.0 / 12.0,
        big_r: 3f64.sqrt() / 2.0 + 0.5,
        window_radius: w,
        generator: Provenance {
            name: "distorted_cube".into(),
            params: json!({ "W": w, "delta": "1/(2+|k|)", "sign": "(-1)^(i+j)" }),
            seed: None,
            jitter: None,
        },
    };
    Ok((window, index))
}

/// Dart throwing with minimum spacing `2r` inside `B_w`, followed by hole filling
/// on a probe grid of spacing `R/4` over `B_{w-R}`.
pub fn poisson_delone_window(r: f64, big_r: f64, w: f64, d: usize, seed: u64) -> Result<PointSetWindow> {
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(r > 0.0 && big_r >= 2.0 * r) {
        return Err(Error::InvalidInput(format!("need R >= 2r > 0, got r = {r}, R = {big_r}")));
    }
    if !(w > 4.0 * big_r) {
        return Err(Error::InvalidInput(format!("need W > 4R, got W = {w}, R = {big_r}")));
    }
    let mut rng = stream(seed, "generator");
    let spacing = 2.0 * r;
    let mut grid = PointGrid::new(d, spacing);
    let w2 = w * w;
    let ok = |g: &PointGrid, p: &[f64]| norm2(p) <= w2 && g.nearest(p, spacing, None).is_none();
    let first = ball_sample(&mut rng, d, r);
    grid.insert(&first);
    let mut active = vec![0usize];
    let mut coords: Vec<Vec<f64>> = vec![first];
    while !active.is_empty() {
        let k = rng.gen_range(0..active.len());
        let base = coords[active[k]].clone();
        let mut placed = false;
        for _ in 0..30 {
            let dir = loop {
                let v = ball_sample(&mut rng, d, 1.0);
                let n = norm2(&v).sqrt();
                if n > 1e-3 {
                    break v.into_iter().map(|x| x / n).collect::<Vec<_>>();
                }
            };
            let rad = rng.gen_range(spacing..2.0 * spacing);
            let cand: Vec<f64> = base.iter().zip(&dir).map(|(b, u)| b + rad * u).collect();
            if ok(&grid, &cand) {
                grid.insert(&cand);
                active.push(coords.len());
                coords.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            active.swap_remove(k);
        }
    }
    let probes = probe_grid(d, w - big_r, big_r / 4.0);
    let mut filled = 0usize;
    for _ in 0..3 {
        let mut holes = 0;
        for c in &probes {
            let near = grid.nearest(c, big_r, None);
            if near.is_some() {
                continue;
            }
            holes += 1;
            let gap = grid.nearest(c, 4.0 * big_r, None).map_or(big_r, |(_, dd)| dd);
            let nudge = ball_sample(&mut rng, d, 0.25 * (gap - spacing).max(0.0));
            let p: Vec<f64> = c.iter().zip(&nudge).map(|(a, b)| a + b).collect();
            grid.insert(&p);
            coords.push(p);
            filled += 1;
        }
        if holes == 0 {
            break;
        }
    }
    let points: Vec<Point> = coords.into_iter().enumerate().map(|(id, coords)| Point { id, coords }).collect();
    let window = PointSetWindow {
        dimension: d,
        points,
        r,
        big_r,
        window_radius: w,
        generator: Provenance {
            name: "poisson".into(),
            params: json!({ "r": r, "R": big_r, "W": w, "d": d, "hole_fills": filled }),
            seed: Some(seed),
            jitter: None,
        },
    };
    let report = verify_delone_params(&window);
    if !report.pass {
        return Err(Error::CoveringFailed { holes: report.empty_probes, witness: report.hole_witness.unwrap_or_default() });
    }
    Ok(window)
}

/// Grid points of spacing `h` inside the closed ball `B_rad`.
pub(crate) fn probe_grid(d: usize, rad: f64, h: f64) -> Vec<Vec<f64>> {
    if rad < 0.0 {
        return Vec::new();
    }
    let m = (rad / h).floor() as i64;
    lattice_points(d, m as f64 + 1.0)
        .into_iter()
        .map(|z| z.into_iter().map(|v| v as f64 * h).collect::<Vec<f64>>())
        .filter(|p| norm2(p) <= rad * rad)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeloneReport {
    pub min_pairwise_distance: f64,
    pub max_hole_radius: f64,
    pub hole_witness: Option<Vec<f64>>,
    pub empty_probes: usize,
    pub pass: bool,
}

/// Measures spacing and covering of a window against its declared `(r, R)`.
pub fn verify_delone_params(window: &PointSetWindow) -> DeloneReport {
    let d = window.dimension;
    let n = window.points.len();
    let vol = window.window_radius.powi(d as i32).max(1.0);
    let h = (vol / n.max(1) as f64).powf(1.0 / d as f64).max(1e-9);
    let grid = PointGrid::from_points(d, h, window.points.iter().map(|p| p.coords.as_slice()));
    let mut min_d = f64::INFINITY;
    for (i, p) in window.points.iter().enumerate() {
        let mut rad = h;
        loop {
            if let Some((_, dd)) = grid.nearest(&p.coords, rad, Some(i)) {
                min_d = min_d.min(dd);
                break;
            }
            if rad > 2.0 * window.window_radius + 1.0 {
                break;
            }
            rad *= 2.0;
        }
    }
    let big_r = window.big_r;
    let probes = probe_grid(d, window.window_radius - big_r, big_r / 4.0);
    let mut max_hole: f64 = 0.0;
    let mut witness = None;
    let mut empty = 0;
    let reach = 2.0 * big_r;
    for c in &probes {
        let hole = grid.nearest(c, reach, None).map_or(reach, |(_, dd)| dd);
        if hole > big_r * (1.0 + TAU_GEO) {
            empty += 1;
        }
        if hole > max_hole {
            max_hole = hole;
            witness = Some(c.clone());
        }
    }
    let pass = min_d >= 2.0 * window.r * (1.0 - TAU_GEO) && empty == 0;
    DeloneReport { min_pairwise_distance: min_d, max_hole_radius: max_hole, hole_witness: witness, empty_probes: empty, pass }
}

/// Removes cospherical ties by jittering one point per tie (the one farthest from the
/// origin), rebuilding until the Delaunay triangulation has none. The jitter
/// magnitude is `1e-6 * r`; the declared `(r, R)` widen accordingly.
pub fn make_generic(window: &PointSetWindow, seed: u64) -> Result<PointSetWindow> {
    let eta = JITTER_SCALE * window.r;
    let mut out = window.clone();
    let mut rng = stream(seed, "jitter");
    let mut moved: Vec<usize> = Vec::new();
    for _ in 0..64 {
        let (_, ties) = delaunay_permissive(out.points.clone())?;
        if ties.is_empty() {
            if !moved.is_empty() {
                moved.sort_unstable();
                moved.dedup();
                out.r -= eta;
                out.big_r += eta;
                let mut ids = window.generator.jitter.as_ref().map(|j| j.ids.clone()).unwrap_or_default();
                ids.extend(&moved);
                ids.sort_unstable();
                ids.dedup();
                out.generator.jitter = Some(JitterRecord { magnitude: eta, seed, ids });
            }
            return Ok(out);
        }
        let mut pick: Vec<usize> = ties
            .iter()
            .map(|t| {
                *t.iter()
                    .max_by(|&&a, &&b| {
                        let (na, nb) = (norm2(&window.points[a].coords), norm2(&window.points[b].coords));
                        na.total_cmp(&nb).then(a.cmp(&b))
                    })
                    .unwrap()
            })
            .collect();
        pick.sort_unstable();
        pick.dedup();
        for id in pick {
            let v = ball_sample(&mut rng, window.dimension, eta);
            let base = &window.points[id].coords;
            out.points[id].coords = base.iter().zip(&v).map(|(b, dv)| b + dv).collect();
            moved.push(id);
        }
    }
    Err(Error::NonGeneric { ids: moved })
}
