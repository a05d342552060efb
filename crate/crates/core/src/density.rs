//! Windowed densities of functionals over triangulations, count certificates and
//! comparisons between Delaunay and perturbed triangulations.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clip::restrict_delaunay;
use crate::complex::{Facet, TriangulationComplex};
use crate::delaunay::delaunay_window;
use crate::error::{Error, Result};
use crate::flips::legalize_to_delaunay;
use crate::functionals::{eval, tolerance, FunctionalKind, FunctionalSpec};
use crate::generators::PointSetWindow;
use crate::geometry::{circumsphere, dist, norm2, unit_ball_volume};
use crate::rng::stream;

/// Fraction of the grid (from the top) whose minimum estimates the lower limit.
pub const TAIL_FRACTION: f64 = 0.25;

/// Geometric grid `min, min*ratio, ...` up to `max`.
pub fn alpha_grid(min: f64, max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && ratio > 1.0 && max.is_finite()) {
        return Err(Error::InvalidInput(format!("bad alpha grid: min {min}, max {max}, ratio {ratio}")));
    }
    let mut out = vec![];
    let mut a = min;
    while a <= max * (1.0 + 1e-12) {
        out.push(a);
        a *= ratio;
    }
    Ok(out)
}

/// Least-squares slope of `log y` against `log x`, skipping non-positive entries.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Cells ranked by a containment radius, with prefix sums of a per-cell value.
struct Ranked {
    keys: Vec<f64>,
    prefix: Vec<f64>,
    abs_prefix: Vec<f64>,
}

impl Ranked {
    fn new(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut prefix = Vec::with_capacity(pairs.len() + 1);
        let mut abs_prefix = Vec::with_capacity(pairs.len() + 1);
        let (mut s, mut sa) = (0.0, 0.0);
        prefix.push(0.0);
        abs_prefix.push(0.0);
        for &(_, v) in &pairs {
            s += v;
            sa += v.abs();
            prefix.push(s);
            abs_prefix.push(sa);
        }
        Ranked { keys: pairs.into_iter().map(|p| p.0).collect(), prefix, abs_prefix }
    }

    fn count(&self, a: f64) -> usize {
        self.keys.partition_point(|&k| k <= a)
    }

    fn sum(&self, a: f64) -> f64 {
        self.prefix[self.count(a)]
    }

    fn abs_between(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        self.abs_prefix[self.count(hi)] - self.abs_prefix[self.count(lo)]
    }
}

fn cell_values(cx: &TriangulationComplex, f: &FunctionalSpec) -> Result<Vec<f64>> {
    (0..cx.num_cells()).into_par_iter().map(|c| eval(f, &cx.cell_coords(c))).collect()
}

fn vertex_key(cx: &TriangulationComplex, c: usize, z: &[f64]) -> f64 {
    cx.cell_coords(c).iter().map(|p| dist(p, z)).fold(0.0, f64::max)
}

fn ball_key(cx: &TriangulationComplex, c: usize, z: &[f64]) -> f64 {
    let s = cx.cell_circumsphere(c);
    dist(&s.center, z) + s.radius
}

fn ranked(cx: &TriangulationComplex, values: &[f64], z: &[f64], ball: bool) -> Ranked {
    let pairs = (0..cx.num_cells())
        .into_par_iter()
        .map(|c| (if ball { ball_key(cx, c, z) } else { vertex_key(cx, c, z) }, values[c]))
        .collect();
    Ranked::new(pairs)
}

/// Largest `alpha` for which every cell in `B_alpha(z)` is unaffected by the
/// window boundary: `W - |z| - 2 q`, with `q` the largest circumradius among cells
/// whose circumball lies in the window. `None` for complexes without a window.
pub fn safe_max_alpha(cx: &TriangulationComplex, z: &[f64]) -> Option<f64> {
    let w = cx.window_radius?;
    Some(w - norm2(z).sqrt() - 2.0 * cx.interior_bound_q(w))
}

fn check_grid(cx: &TriangulationComplex, z: &[f64], grid: &[f64]) -> Result<()> {
    if z.len() != cx.dimension() {
        return Err(Error::DimensionMismatch { expected: cx.dimension(), found: z.len() });
    }
    if grid.is_empty() || grid.iter().any(|a| !(*a > 0.0)) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("alpha grid must be positive and increasing".into()));
    }
    if let Some(max_alpha) = safe_max_alpha(cx, z) {
        if *grid.last().unwrap() > max_alpha {
            return Err(Error::UnsafeGrid { max_alpha });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DensitySequence {
    pub functional: FunctionalSpec,
    pub center: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Cells with every vertex in `B_alpha(z)`.
    pub cell_counts: Vec<usize>,
    /// Cells whose circumball lies in `B_alpha(z)`.
    pub ball_counts: Vec<usize>,
    pub sums: Vec<f64>,
    pub ball_sums: Vec<f64>,
    pub values: Vec<f64>,
    pub ball_values: Vec<f64>,
    pub tail_fraction: f64,
    pub liminf_tail: f64,
}

fn tail_min(values: &[f64]) -> f64 {
    let k = ((values.len() as f64 * TAIL_FRACTION).ceil() as usize).max(1).min(values.len());
    values[values.len() - k..].iter().copied().fold(f64::INFINITY, f64::min)
}

/// `f(T, alpha) = sum of F over cells in B_alpha(z) / (V_d alpha^d)` on a grid.
pub fn density_sequence(cx: &TriangulationComplex, f: &FunctionalSpec, z: &[f64], grid: &[f64]) -> Result<DensitySequence> {
    check_grid(cx, z, grid)?;
    let values = cell_values(cx, f)?;
    density_from_values(cx, f, &values, z, grid)
}

fn density_from_values(cx: &TriangulationComplex, f: &FunctionalSpec, values: &[f64], z: &[f64], grid: &[f64]) -> Result<DensitySequence> {
    let vd = unit_ball_volume(cx.dimension());
    let d = cx.dimension() as i32;
    let vr = ranked(cx, values, z, false);
    let br = ranked(cx, values, z, true);
    let cell_counts: Vec<usize> = grid.iter().map(|&a| vr.count(a)).collect();
    let ball_counts: Vec<usize> = grid.iter().map(|&a| br.count(a)).collect();
    let sums: Vec<f64> = grid.iter().map(|&a| vr.sum(a)).collect();
    let ball_sums: Vec<f64> = grid.iter().map(|&a| br.sum(a)).collect();
    let values: Vec<f64> = sums.iter().zip(grid).map(|(s, a)| s / (vd * a.powi(d))).collect();
    let ball_values: Vec<f64> = ball_sums.iter().zip(grid).map(|(s, a)| s / (vd * a.powi(d))).collect();
    Ok(DensitySequence {
        functional: *f,
        center: z.to_vec(),
        alphas: grid.to_vec(),
        cell_counts,
        ball_counts,
        sums,
        ball_sums,
        liminf_tail: tail_min(&values),
        values,
        ball_values,
        tail_fraction: TAIL_FRACTION,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub center: Vec<f64>,
    pub origin: DensitySequence,
    pub shifted: DensitySequence,
    pub gap: Vec<f64>,
    /// Sum of `|F|` over cells in `B_{alpha+|z|}` but not `B_{alpha-|z|}`, over `V_d alpha^d`.
    pub annulus_bound: Vec<f64>,
    pub bound_ok: bool,
    pub first_quartile_max: f64,
    pub last_quartile_max: f64,
    pub pass: bool,
}

/// `|f(T, alpha) - f_z(T, alpha)|` along the grid, with its annulus bound.
pub fn center_invariance_gap(cx: &TriangulationComplex, f: &FunctionalSpec, z: &[f64], grid: &[f64]) -> Result<GapReport> {
    check_grid(cx, z, grid)?;
    let values = cell_values(cx, f)?;
    let origin_z = vec![0.0; cx.dimension()];
    let origin = density_from_values(cx, f, &values, &origin_z, grid)?;
    let shifted = density_from_values(cx, f, &values, z, grid)?;
    let gap: Vec<f64> = origin.values.iter().zip(&shifted.values).map(|(a, b)| (a - b).abs()).collect();
    let shift = norm2(z).sqrt();
    let vr = ranked(cx, &values, &origin_z, false);
    let vd = unit_ball_volume(cx.dimension());
    let annulus_bound: Vec<f64> = grid
        .iter()
        .map(|&a| vr.abs_between(a - shift, a + shift) / (vd * a.powi(cx.dimension() as i32)))
        .collect();
    let bound_ok = gap.iter().zip(&annulus_bound).all(|(g, b)| *g <= b + tolerance(*g, *b));
    let k = (grid.len() as f64 / 4.0).ceil().max(1.0) as usize;
    let first_quartile_max = gap[..k].iter().copied().fold(0.0, f64::max);
    let last_quartile_max = gap[gap.len() - k..].iter().copied().fold(0.0, f64::max);
    Ok(GapReport {
        center: z.to_vec(),
        origin,
        shifted,
        pass: last_quartile_max < first_quartile_max,
        gap,
        annulus_bound,
        bound_ok,
        first_quartile_max,
        last_quartile_max,
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Constants from the packing and covering arguments. Count bounds are checked in
/// their exact finite-`alpha` forms, listed in `notes`.
#[derive(Clone, Debug, Serialize)]
pub struct TheoreticalBounds {
    /// Lower bound on triangle area, `2 r^3 / q` (planar only).
    pub v: Option<f64>,
    /// Upper bound on cell measure, `(2q)^d`.
    #[serde(rename = "V")]
    pub big_v: f64,
    pub p: f64,
    #[serde(rename = "P")]
    pub big_p: f64,
    #[serde(rename = "P_prime")]
    pub big_p_prime: f64,
    pub s: f64,
    #[serde(rename = "S")]
    pub big_s: f64,
    #[serde(rename = "S_prime")]
    pub big_s_prime: f64,
    #[serde(rename = "S_second")]
    pub big_s_second: f64,
    pub notes: Vec<String>,
}

impl TheoreticalBounds {
    /// `C = E * S`: upper bound on the density of a functional bounded by `E`.
    pub fn density_upper(&self, big_e: f64) -> f64 {
        big_e * self.big_s
    }

    /// `e * s`: lower bound on the density of a functional bounded below by `e >= 0`.
    pub fn density_lower(&self, e: f64) -> f64 {
        e * self.s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub alpha: f64,
    pub points: usize,
    pub points_lower: f64,
    pub points_upper: f64,
    pub annulus_points: usize,
    pub annulus_points_upper: f64,
    pub cells: Option<usize>,
    pub cells_lower: Option<f64>,
    pub cells_upper: Option<f64>,
    pub annulus_cells: Option<usize>,
    pub annulus_cells_upper: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalCounts {
    pub min_cell_measure: f64,
    pub max_cell_measure: f64,
    pub max_vertex_degree: usize,
    pub rows: Vec<CountRow>,
    pub point_exponent: f64,
    pub cell_exponent: f64,
    pub annulus_point_exponent: f64,
    pub annulus_cell_exponent: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsCertificate {
    pub dimension: usize,
    /// Number of points in the window.
    pub points: usize,
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub window_radius: f64,
    /// Largest circumradius over cells whose circumball lies in the window.
    pub q: f64,
    pub theoretical: TheoreticalBounds,
    pub empirical: EmpiricalCounts,
    pub area_ok: bool,
    pub volume_ok: bool,
    pub counts_ok: bool,
    pub degree_ok: bool,
    pub pass: bool,
}

/// Number of grid radii used for the growth-exponent fits.
pub const FIT_POINTS: usize = 24;

/// Theoretical constants and measured counts for a window and its triangulation.
pub fn count_certificate(window: &PointSetWindow, cx: &TriangulationComplex) -> Result<BoundsCertificate> {
    let d = window.dimension;
    if cx.dimension() != d {
        return Err(Error::DimensionMismatch { expected: d, found: cx.dimension() });
    }
    let di = d as i32;
    let (r, big_r, w) = (window.r, window.big_r, window.window_radius);
    let q = cx.interior_bound_q(w);
    let vd = unit_ball_volume(d);
    let neighbours = (((2.0 * q + r) / r).powi(di)).floor() as u64;
    let s_second = binomial(neighbours.saturating_sub(1), d as u64);
    let big_p = (2.0 / r).powi(di);
    let big_p_prime = d as f64 * (1.0 + 2.0 * r) * (2.0 + r).powi(di - 1) / r.powi(di);
    let theoretical = TheoreticalBounds {
        v: (d == 2).then(|| 2.0 * r.powi(3) / q),
        big_v: (2.0 * q).powi(di),
        p: (1.0 / (2.0 * big_r)).powi(di),
        big_p,
        big_p_prime,
        s: vd / (2.0 * q).powi(di),
        big_s: big_p * s_second,
        big_s_prime: s_second * d as f64 * (1.0 + 2.0 * q + 2.0 * r) * (2.0 + r).powi(di - 1) / r.powi(di),
        big_s_second: s_second,
        notes: vec![
            "points in B_a <= ((a + r) / r)^d <= P a^d for a >= r (disjoint r-balls)".into(),
            "points in B_a >= ((a - R) / (2R))^d for a >= R (maximal R-packing covers B_{a-R})".into(),
            "points in B_{a+1} - B_a <= ((a + 1 + r)^d - (a - r)^d) / r^d <= P' a^(d-1) for a >= 1".into(),
            "cells at a vertex <= C(N, d), N = points within 2q other than the vertex".into(),
            "cells in B_a <= S'' * points in B_a <= S a^d".into(),
            "cells in B_a >= V_d (a - 2q)^d / (2q)^d, since they cover B_{a-2q}".into(),
            "cells in B_{a+1} - B_a <= S'' * points in B_{a+1} - B_{a-2q}".into(),
            "q is the measured circumradius bound of cells whose circumball lies in the window".into(),
        ],
    };

    let interior: Vec<usize> = (0..cx.num_cells())
        .filter(|&c| {
            let s = cx.cell_circumsphere(c);
            norm2(&s.center).sqrt() + s.radius <= w
        })
        .collect();
    let measures: Vec<f64> = interior.iter().map(|&c| cx.cell_measure(c)).collect();
    let min_cell_measure = measures.iter().copied().fold(f64::INFINITY, f64::min);
    let max_cell_measure = measures.iter().copied().fold(0.0, f64::max);
    let mut degree = vec![0usize; cx.points().len()];
    let safe_cells = w - 2.0 * q;
    for c in cx.cells() {
        for &v in c {
            degree[v] += 1;
        }
    }
    let max_vertex_degree = (0..cx.points().len())
        .filter(|&v| norm2(cx.coords(v)).sqrt() <= safe_cells - 2.0 * q)
        .map(|v| degree[v])
        .max()
        .unwrap_or(0);

    let mut radii: Vec<f64> = window.points.iter().map(|p| norm2(&p.coords).sqrt()).collect();
    radii.sort_by(f64::total_cmp);
    let points_upto = |a: f64| radii.partition_point(|&x| x <= a);
    let origin = vec![0.0; d];
    let ones = vec![1.0; cx.num_cells()];
    let cells = ranked(cx, &ones, &origin, false);

    let lo = w / 8.0;
    let point_max = w - 1.0;
    let cell_max = safe_cells - 1.0;
    let mut rows = Vec::new();
    let fit = |max: f64| -> Vec<f64> {
        if max <= lo {
            return vec![];
        }
        (0..FIT_POINTS).map(|j| lo * (max / lo).powf(j as f64 / (FIT_POINTS - 1) as f64)).collect()
    };
    let point_grid = fit(point_max);
    let cell_grid = fit(cell_max);
    let mut counts_ok = true;
    for &a in &point_grid {
        let pts = points_upto(a);
        let ann = points_upto(a + 1.0) - pts;
        let points_lower = if a >= big_r { ((a - big_r) / (2.0 * big_r)).powi(di) } else { 0.0 };
        let points_upper = ((a + r) / r).powi(di);
        let annulus_points_upper = ((a + 1.0 + r).powi(di) - (a - r).max(0.0).powi(di)) / r.powi(di);
        counts_ok &= (pts as f64) >= points_lower && (pts as f64) <= points_upper && (ann as f64) <= annulus_points_upper;
        rows.push(CountRow {
            alpha: a,
            points: pts,
            points_lower,
            points_upper,
            annulus_points: ann,
            annulus_points_upper,
            cells: None,
            cells_lower: None,
            cells_upper: None,
            annulus_cells: None,
            annulus_cells_upper: None,
        });
    }
    let mut cell_rows = Vec::new();
    for &a in &cell_grid {
        let pts = points_upto(a);
        let n = cells.count(a);
        let ann = cells.count(a + 1.0) - n;
        let cells_lower = if a > 2.0 * q { vd * (a - 2.0 * q).powi(di) / (2.0 * q).powi(di) } else { 0.0 };
        let cells_upper = s_second * pts as f64;
        let wide_ann = points_upto(a + 1.0) - points_upto(a - 2.0 * q);
        let annulus_cells_upper = s_second * wide_ann as f64;
        counts_ok &= (n as f64) >= cells_lower && (n as f64) <= cells_upper && (ann as f64) <= annulus_cells_upper;
        cell_rows.push(CountRow {
            alpha: a,
            points: pts,
            points_lower: if a >= big_r { ((a - big_r) / (2.0 * big_r)).powi(di) } else { 0.0 },
            points_upper: ((a + r) / r).powi(di),
            annulus_points: points_upto(a + 1.0) - pts,
            annulus_points_upper: ((a + 1.0 + r).powi(di) - (a - r).max(0.0).powi(di)) / r.powi(di),
            cells: Some(n),
            cells_lower: Some(cells_lower),
            cells_upper: Some(cells_upper),
            annulus_cells: Some(ann),
            annulus_cells_upper: Some(annulus_cells_upper),
        });
    }
    let xs: Vec<f64> = point_grid.clone();
    let point_exponent = loglog_slope(&xs, &rows.iter().map(|r| r.points as f64).collect::<Vec<_>>());
    let annulus_point_exponent = loglog_slope(&xs, &rows.iter().map(|r| r.annulus_points as f64).collect::<Vec<_>>());
    let cell_exponent = loglog_slope(&cell_grid, &cell_rows.iter().map(|r| r.cells.unwrap() as f64).collect::<Vec<_>>());
    let annulus_cell_exponent =
        loglog_slope(&cell_grid, &cell_rows.iter().map(|r| r.annulus_cells.unwrap() as f64).collect::<Vec<_>>());
    rows.extend(cell_rows);

    let area_ok = theoretical.v.is_none_or(|v| min_cell_measure >= v * (1.0 - 1e-9));
    let volume_ok = max_cell_measure <= theoretical.big_v * (1.0 + 1e-9);
    let degree_ok = (max_vertex_degree as f64) <= s_second;
    Ok(BoundsCertificate {
        dimension: d,
        points: window.points.len(),
        r,
        big_r,
        window_radius: w,
        q,
        theoretical,
        empirical: EmpiricalCounts {
            min_cell_measure,
            max_cell_measure,
            max_vertex_degree,
            rows,
            point_exponent,
            cell_exponent,
            annulus_point_exponent,
            annulus_cell_exponent,
        },
        area_ok,
        volume_ok,
        counts_ok,
        degree_ok,
        pass: area_ok && volume_ok && counts_ok && degree_ok,
    })
}

/// Applies up to `n` reverse flips: each picks, uniformly among interior edges
/// that are locally Delaunay, have a convex quadrilateral and whose four vertices
/// lie within `inner` of the origin, one edge and swaps its diagonal. Swaps that
/// would create a triangle of circumradius above `max_radius` are skipped.
pub fn reverse_flips(
    cx: &TriangulationComplex,
    n: usize,
    seed: u64,
    inner: f64,
    max_radius: f64,
) -> Result<(TriangulationComplex, Vec<Facet>)> {
    if cx.dimension() != 2 {
        return Err(Error::UnsupportedDimension(cx.dimension()));
    }
    let mut t = cx.clone();
    let mut rng = stream(seed, "perturbation");
    let mut done = Vec::with_capacity(n);
    for _ in 0..n {
        let mut eligible = Vec::new();
        for f in t.interior_facets() {
            let inc = t.incident_cells(&f).unwrap();
            let quad_inside = inc
                .iter()
                .flat_map(|&c| t.cells()[c].iter().copied())
                .all(|v| norm2(t.coords(v)).sqrt() <= inner);
            if quad_inside && t.is_flippable(&f) && t.is_locally_delaunay(&f)? && swap_radius(&t, &f, inc) <= max_radius {
                eligible.push(f);
            }
        }
        if eligible.is_empty() {
            return Err(Error::NoReverseFlip);
        }
        let f = eligible.swap_remove(rng.gen_range(0..eligible.len()));
        let new = t.flip_any(&f)?;
        done.push(new);
    }
    Ok((t, done))
}

fn swap_radius(t: &TriangulationComplex, f: &[usize], inc: &[usize]) -> f64 {
    let (a, b) = (t.opposite_vertex(inc[0], f), t.opposite_vertex(inc[1], f));
    f.iter()
        .map(|&v| circumsphere(&[t.coords(a), t.coords(b), t.coords(v)]).map_or(f64::INFINITY, |s| s.radius))
        .fold(0.0, f64::max)
}

/// Cap on circumradii created by reverse flips, as a multiple of the Delaunay `q`.
pub const REVERSE_FLIP_RADIUS_FACTOR: f64 = 2.0;

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub alpha: f64,
    pub f_delaunay: f64,
    pub f_perturbed: f64,
    pub strict_ok: bool,
    /// Boundary allowance: `|F|` summed over both complexes' cells with vertex radius
    /// in `(alpha - 2q, alpha]`, over `V_d alpha^d`.
    pub slack: f64,
    pub slack_ok: bool,
    pub sigma_t: f64,
    pub sigma_d_restricted: f64,
    pub sigma_d: f64,
    /// `sigma_t - sigma_d_restricted`.
    pub first_bracket: f64,
    /// `sigma_d_restricted - sigma_d`.
    pub second_bracket: f64,
    pub first_bracket_ok: bool,
    /// Whether `D(alpha - 6q)` lies in the legalized `T(alpha)`; `None` when `alpha <= 6q`.
    pub containment_ok: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub functional: FunctionalSpec,
    pub seed: u64,
    pub window_radius: f64,
    pub flips_requested: usize,
    pub flipped_edges: Vec<Vec<usize>>,
    pub q_delaunay: f64,
    pub q_perturbed: f64,
    pub rows: Vec<ComparisonRow>,
    pub strict_pass: bool,
    pub slack_pass: bool,
    pub first_bracket_pass: bool,
    pub containment_pass: bool,
    /// Slack inequality and containment; the first bracket too for functionals
    /// whose restricted inequality is asserted (FR, FE, AREA).
    pub pass: bool,
}

/// Compares the Delaunay triangulation of a planar window with a copy perturbed
/// by `n` reverse flips, along `grid` (default: ratio 1.1 from `8q` to the safe limit).
pub fn main_theorem_comparison(
    window: &PointSetWindow,
    f: &FunctionalSpec,
    n: usize,
    seed: u64,
    grid: Option<Vec<f64>>,
) -> Result<ComparisonReport> {
    if window.dimension != 2 {
        return Err(Error::UnsupportedDimension(window.dimension));
    }
    let w = window.window_radius;
    let dl = delaunay_window(window)?;
    let q_d = dl.interior_bound_q(w);
    let (t, flipped) = reverse_flips(&dl, n, seed, w - 2.0 * q_d, REVERSE_FLIP_RADIUS_FACTOR * q_d)?;
    let d_cells = dl.cell_set();
    let q_t = (0..t.num_cells())
        .filter(|&c| !d_cells.contains(&t.cells()[c]))
        .map(|c| t.cell_circumsphere(c).radius)
        .fold(q_d, f64::max);
    let q = q_d.max(q_t);
    let max_alpha = w - 2.0 * q;
    let grid = match grid {
        Some(g) => g,
        None => alpha_grid(8.0 * q, max_alpha, 1.1)?,
    };
    let origin = [0.0, 0.0];
    check_grid(&dl, &origin, &grid)?;
    if grid.last().is_some_and(|&a| a > max_alpha) {
        return Err(Error::UnsafeGrid { max_alpha });
    }
    let vd = unit_ball_volume(2);
    let vals_d = cell_values(&dl, f)?;
    let vals_t = cell_values(&t, f)?;
    let rd = ranked(&dl, &vals_d, &origin, false);
    let rt = ranked(&t, &vals_t, &origin, false);
    let assert_first = matches!(f.kind, FunctionalKind::FR | FunctionalKind::FE | FunctionalKind::AREA);
    let rows: Vec<ComparisonRow> = grid
        .par_iter()
        .map(|&a| -> Result<ComparisonRow> {
            let norm = vd * a * a;
            let (sd, st) = (rd.sum(a), rt.sum(a));
            let (fd, ft) = (sd / norm, st / norm);
            let slack = (rd.abs_between(a - 2.0 * q, a) + rt.abs_between(a - 2.0 * q, a)) / norm;
            let t_alpha = t.subcomplex(|c| vertex_key(&t, c, &origin) <= a);
            let d_restricted = restrict_delaunay(&dl, &t_alpha)?;
            let sdr: f64 = (0..d_restricted.num_cells()).map(|c| eval(f, &d_restricted.cell_coords(c))).sum::<Result<f64>>()?;
            let containment_ok = if a > 6.0 * q {
                let (legal, _) = legalize_to_delaunay(t_alpha.clone())?;
                let cells = legal.cell_set();
                let inner = a - 6.0 * q;
                Some((0..dl.num_cells()).filter(|&c| vertex_key(&dl, c, &origin) <= inner).all(|c| cells.contains(&dl.cells()[c])))
            } else {
                None
            };
            Ok(ComparisonRow {
                alpha: a,
                f_delaunay: fd,
                f_perturbed: ft,
                strict_ok: fd <= ft + tolerance(fd, ft),
                slack,
                slack_ok: fd <= ft + slack + tolerance(fd, ft),
                sigma_t: st,
                sigma_d_restricted: sdr,
                sigma_d: sd,
                first_bracket: st - sdr,
                second_bracket: sdr - sd,
                first_bracket_ok: st - sdr >= -tolerance(st, sdr),
                containment_ok,
            })
        })
        .collect::<Result<_>>()?;
    let strict_pass = rows.iter().all(|r| r.strict_ok);
    let slack_pass = rows.iter().all(|r| r.slack_ok);
    let first_bracket_pass = rows.iter().all(|r| r.first_bracket_ok);
    let containment_pass = rows.iter().all(|r| r.containment_ok != Some(false));
    Ok(ComparisonReport {
        functional: *f,
        seed,
        window_radius: w,
        flips_requested: n,
        flipped_edges: flipped.iter().map(|e| e.to_vec()).collect(),
        q_delaunay: q_d,
        q_perturbed: q_t,
        rows,
        strict_pass,
        slack_pass,
        first_bracket_pass,
        containment_pass,
        pass: slack_pass && containment_pass && (!assert_first || first_bracket_pass),
    })
}
