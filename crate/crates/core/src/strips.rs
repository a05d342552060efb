//! Strips of congruent isosceles triangles stacked into blocks, with closed-form
//! counts of the triangles inside centered disks.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::complex::{build_subcomplex, TriangulationComplex};
use crate::error::{Error, Result};
use crate::functionals::{eval, tolerance, FunctionalSpec};
use crate::generators::{PointSetWindow, Provenance};
use crate::geometry::{circumradius, Point};

/// Interior angles of a triangle given by side lengths; angle `i` is opposite side `i`.
pub fn angles(sides: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| {
        let (a, b, c) = (sides[i], sides[(i + 1) % 3], sides[(i + 2) % 3]);
        ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
    })
}

fn valid_triangle(s: [f64; 3]) -> bool {
    s.iter().all(|v| v.is_finite() && *v > 0.0) && s[0] < s[1] + s[2] && s[1] < s[0] + s[2] && s[2] < s[0] + s[1]
}

/// Two triangles are compatible along a shared edge of length `shared` when the
/// angles opposite it sum to less than pi and the other four angles are acute.
pub fn compatible(t1: [f64; 3], t2: [f64; 3], shared: f64) -> bool {
    if !valid_triangle(t1) || !valid_triangle(t2) {
        return false;
    }
    let find = |t: [f64; 3]| t.iter().position(|&s| (s - shared).abs() <= 1e-12 * shared);
    let (Some(i), Some(j)) = (find(t1), find(t2)) else {
        return false;
    };
    let (a1, a2) = (angles(t1), angles(t2));
    let right = PI / 2.0;
    a1[i] + a2[j] < PI
        && (0..3).filter(|&k| k != i).all(|k| a1[k] < right)
        && (0..3).filter(|&k| k != j).all(|k| a2[k] < right)
}

/// `max{a / (2 cos phi), c / (2 cos psi)}`.
pub fn isoceles_threshold(a: f64, phi: f64, c: f64, psi: f64) -> f64 {
    (a / (2.0 * phi.cos())).max(c / (2.0 * psi.cos()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsocelesPair {
    /// Sides `(L, L, a)`.
    pub delta: [f64; 3],
    /// Sides `(L, L, c)`.
    pub top: [f64; 3],
    #[serde(rename = "L")]
    pub l: f64,
}

/// Isosceles triangles `(L, L, a)` and `(L, L, c)` sharing a leg of length `L`.
///
/// `L` is 1.05 times the larger of the angle threshold and `max(a, c) / sqrt 2`;
/// the second term keeps both apex angles acute.
pub fn compatible_isoceles(a: f64, phi: f64, c: f64, psi: f64) -> Result<IsocelesPair> {
    let quarter = PI / 4.0;
    if !(a > 0.0 && c > 0.0 && a.is_finite() && c.is_finite()) {
        return Err(Error::InvalidInput(format!("edge lengths must be positive, got a = {a}, c = {c}")));
    }
    if !(phi > 0.0 && phi <= quarter && psi > 0.0 && psi <= quarter) {
        return Err(Error::InvalidInput(format!("angles must lie in (0, pi/4], got {phi}, {psi}")));
    }
    let l = 1.05 * isoceles_threshold(a, phi, c, psi).max(a.max(c) / 2f64.sqrt());
    let pair = IsocelesPair { delta: [l, l, a], top: [l, l, c], l };
    if !compatible(pair.delta, pair.top, l) {
        return Err(Error::InvalidInput(format!("triangles (L, L, {a}) and (L, L, {c}) are not compatible")));
    }
    Ok(pair)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StripKind {
    Wide,
    Narrow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripConfig {
    pub pair: IsocelesPair,
    /// Odd block sizes `m_1, m_2, ...`.
    pub blocks: Vec<usize>,
    /// Base edges per strip on each side of the vertical axis; derived from the
    /// window when absent.
    pub extent: Option<usize>,
}

impl StripConfig {
    pub fn validate(&self) -> Result<()> {
        let p = &self.pair;
        if !compatible(p.delta, p.top, p.l) {
            return Err(Error::InvalidInput("strip triangles are not compatible".into()));
        }
        if self.blocks.is_empty() || self.blocks.iter().any(|m| m % 2 == 0) {
            return Err(Error::InvalidInput(format!("block sizes must be odd and non-empty, got {:?}", self.blocks)));
        }
        Ok(())
    }
}

/// Placement of one strip kind: triangles have a leg of length `L` on each
/// boundary line and apex offset `p` along the line.
#[derive(Clone, Copy, Debug)]
struct Shape {
    p: f64,
    h: f64,
}

fn shape(l: f64, base: f64) -> Shape {
    let p = l - base * base / (2.0 * l);
    Shape { p, h: (l * l - p * p).sqrt() }
}

#[derive(Clone, Debug)]
struct Strip {
    kind: StripKind,
    y0: f64,
    x0: f64,
}

/// Strips of the first `k` blocks listed bottom to top, with the center line of
/// block 1 at `y = 0`.
#[derive(Clone, Debug)]
pub struct StripLayout {
    l: f64,
    wide: Shape,
    narrow: Shape,
    strips: Vec<Strip>,
    /// `alpha_i`: half the total width of the first `2i - 1` blocks.
    pub alphas: Vec<f64>,
}

fn block_kinds(i: usize, m: usize) -> impl Iterator<Item = StripKind> {
    (0..m).map(move |s| if i % 2 == 0 && s % 2 == 0 { StripKind::Narrow } else { StripKind::Wide })
}

impl StripLayout {
    pub fn new(pair: &IsocelesPair, blocks: &[usize]) -> Self {
        let wide = shape(pair.l, pair.delta[2]);
        let narrow = shape(pair.l, pair.top[2]);
        let height = |k: StripKind| if k == StripKind::Wide { wide.h } else { narrow.h };
        let mut side: Vec<StripKind> = Vec::new();
        for (i, &m) in blocks.iter().enumerate().skip(1) {
            side.extend(block_kinds(i + 1, m));
        }
        let centre: Vec<StripKind> = block_kinds(1, blocks[0]).collect();
        let mut kinds: Vec<StripKind> = side.iter().rev().copied().collect();
        kinds.extend(&centre);
        kinds.extend(&side);
        let below: f64 = side.iter().map(|&k| height(k)).sum::<f64>() + centre.iter().map(|&k| height(k)).sum::<f64>() / 2.0;
        let mut y = -below;
        let mut x = 0.0;
        let mut strips = Vec::with_capacity(kinds.len());
        for kind in kinds {
            let s = if kind == StripKind::Wide { wide } else { narrow };
            strips.push(Strip { kind, y0: y, x0: x });
            y += s.h;
            x = (x + s.p).rem_euclid(pair.l);
        }
        let mut alphas = Vec::with_capacity(blocks.len());
        let mut a = centre.iter().map(|&k| height(k)).sum::<f64>() / 2.0;
        alphas.push(a);
        for (i, &m) in blocks.iter().enumerate().skip(1) {
            a += block_kinds(i + 1, m).map(height).sum::<f64>();
            alphas.push(a);
        }
        StripLayout { l: pair.l, wide, narrow, strips, alphas }
    }

    fn shape_of(&self, k: StripKind) -> Shape {
        if k == StripKind::Wide {
            self.wide
        } else {
            self.narrow
        }
    }

    pub fn kinds(&self) -> Vec<StripKind> {
        self.strips.iter().map(|s| s.kind).collect()
    }

    /// Numbers of wide and narrow triangles with all vertices in the closed disk
    /// of radius `alpha` about the origin.
    pub fn counts_in_disk(&self, alpha: f64) -> (u64, u64) {
        let l = self.l;
        let range = |y: f64, off: f64| -> Option<(i64, i64)> {
            let s = alpha * alpha - y * y;
            if s < 0.0 {
                return None;
            }
            let sx = s.sqrt();
            let lo = ((-sx - off) / l).ceil() as i64;
            let hi = ((sx - off) / l).floor() as i64;
            (lo <= hi).then_some((lo, hi))
        };
        let count = |lo: i64, hi: i64| if hi >= lo { (hi - lo + 1) as u64 } else { 0 };
        let (mut wide, mut narrow) = (0, 0);
        for s in &self.strips {
            let sh = self.shape_of(s.kind);
            let (Some((a0, b0)), Some((a1, b1))) = (range(s.y0, s.x0), range(s.y0 + sh.h, s.x0 + sh.p)) else {
                continue;
            };
            let up = count(a0.max(a1), (b0 - 1).min(b1));
            let down = count(a1.max(a0 - 1), (b1 - 1).min(b0 - 1));
            match s.kind {
                StripKind::Wide => wide += up + down,
                StripKind::Narrow => narrow += up + down,
            }
        }
        (wide, narrow)
    }

    /// Explicit vertices and triangles over `|j| <= extent` base edges per line.
    fn triangulate(&self, extent: i64) -> (Vec<Vec<f64>>, Vec<Vec<usize>>, Vec<StripKind>) {
        let per_line = (2 * extent + 1) as usize;
        let mut pts = Vec::with_capacity((self.strips.len() + 1) * per_line);
        let mut lines = Vec::with_capacity(self.strips.len() + 1);
        for s in &self.strips {
            lines.push((s.y0, s.x0));
        }
        let last = self.strips.last().unwrap();
        let sh = self.shape_of(last.kind);
        lines.push((last.y0 + sh.h, (last.x0 + sh.p).rem_euclid(self.l)));
        for &(y, x) in &lines {
            for j in -extent..=extent {
                pts.push(vec![x + j as f64 * self.l, y]);
            }
        }
        let id = |line: usize, j: i64| line * per_line + (j + extent) as usize;
        let mut cells = Vec::new();
        let mut kinds = Vec::new();
        let inside = |j: i64| (-extent..=extent).contains(&j);
        for (si, s) in self.strips.iter().enumerate() {
            let t = ((s.x0 + self.shape_of(s.kind).p - lines[si + 1].1) / self.l).round() as i64;
            for j in -extent..extent {
                if inside(j + t) {
                    cells.push(vec![id(si, j), id(si, j + 1), id(si + 1, j + t)]);
                    kinds.push(s.kind);
                }
                if inside(j + t) && inside(j + t + 1) {
                    cells.push(vec![id(si + 1, j + t), id(si + 1, j + t + 1), id(si, j + 1)]);
                    kinds.push(s.kind);
                }
            }
        }
        (pts, cells, kinds)
    }
}

fn triangle_coords(l: f64, base: f64) -> [[f64; 2]; 3] {
    let s = shape(l, base);
    [[0.0, 0.0], [l, 0.0], [s.p, s.h]]
}

/// Explicit strip triangulation of the first `k` blocks, with the radii `alpha_i`.
pub fn strip_block_triangulation(cfg: &StripConfig, k: usize) -> Result<(PointSetWindow, TriangulationComplex, Vec<f64>)> {
    cfg.validate()?;
    if k == 0 || k > cfg.blocks.len() {
        return Err(Error::InvalidInput(format!("need 1 <= k <= {}, got {k}", cfg.blocks.len())));
    }
    let layout = StripLayout::new(&cfg.pair, &cfg.blocks[..k]);
    let alpha = *layout.alphas.last().unwrap();
    let extent = cfg.extent.map(|e| e as i64).unwrap_or_else(|| (alpha / cfg.pair.l).ceil() as i64 + 3);
    let (coords, cells, _) = layout.triangulate(extent);
    let points: Vec<Point> = coords.into_iter().enumerate().map(|(i, c)| Point::new(i, c)).collect::<Result<_>>()?;
    let mut cx = build_subcomplex(points.clone(), cells)?;
    for f in cx.interior_facets() {
        if !cx.is_locally_delaunay(&f)? {
            return Err(Error::InvalidInput(format!("strip edge {f:?} is not locally Delaunay")));
        }
    }
    let p = &cfg.pair;
    let q = circumradius(&triangle_coords(p.l, p.delta[2]))?.max(circumradius(&triangle_coords(p.l, p.top[2]))?);
    let min_edge = p.l.min(p.delta[2]).min(p.top[2]);
    let window = PointSetWindow {
        dimension: 2,
        points,
        r: min_edge / 2.0,
        big_r: q,
        window_radius: alpha,
        generator: Provenance {
            name: "strips".into(),
            params: json!({ "pair": p, "blocks": &cfg.blocks[..k], "extent": extent }),
            seed: None,
            jitter: None,
        },
    };
    cx.window_radius = Some(alpha);
    cx.provenance = serde_json::to_value(&window.generator)?;
    Ok((window, cx, layout.alphas))
}

/// Shape quantities of a strip configuration under one functional.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StripRatios {
    pub f_delta: f64,
    pub f_top: f64,
    pub a_delta: f64,
    pub a_top: f64,
    pub q_delta: f64,
    pub q_top: f64,
    pub q: f64,
    /// `|Q_delta - Q|`.
    pub gap: f64,
    /// Larger circumradius of the two triangles.
    pub circumradius: f64,
}

impl StripRatios {
    pub fn new(pair: &IsocelesPair, f: &FunctionalSpec) -> Result<Self> {
        let td = triangle_coords(pair.l, pair.delta[2]);
        let tt = triangle_coords(pair.l, pair.top[2]);
        let area = "AREA".parse::<FunctionalSpec>()?;
        let (f_delta, f_top) = (eval(f, &td)?, eval(f, &tt)?);
        let (a_delta, a_top) = (eval(&area, &td)?, eval(&area, &tt)?);
        let q = (f_delta + f_top) / (a_delta + a_top);
        let q_delta = f_delta / a_delta;
        Ok(StripRatios {
            f_delta,
            f_top,
            a_delta,
            a_top,
            q_delta,
            q_top: f_top / a_top,
            q,
            gap: (q_delta - q).abs(),
            circumradius: circumradius(&td)?.max(circumradius(&tt)?),
        })
    }

    pub fn degenerate(&self) -> bool {
        (self.q_delta - self.q_top).abs() <= tolerance(self.q_delta, self.q_top)
    }

    pub fn g(&self, wide: u64, narrow: u64) -> f64 {
        let (k, l) = (wide as f64, narrow as f64);
        (k * self.f_delta + l * self.f_top) / (k * self.a_delta + l * self.a_top)
    }

    pub fn f(&self, wide: u64, narrow: u64, alpha: f64) -> f64 {
        let (k, l) = (wide as f64, narrow as f64);
        (k * self.f_delta + l * self.f_top) / (PI * alpha * alpha)
    }

    fn target(&self, i: usize) -> f64 {
        if i % 2 == 1 {
            self.q_delta
        } else {
            self.q
        }
    }
}

/// Grows each block size through `1, 3, 7, 15, ...` until `g_i` is within
/// `gap_fraction * gap` of `Q_delta` (odd `i`) or `Q` (even `i`). The first block has
/// three strips.
pub fn choose_block_sizes(pair: &IsocelesPair, f: &FunctionalSpec, k: usize, gap_fraction: f64) -> Result<Vec<usize>> {
    let ratios = StripRatios::new(pair, f)?;
    if ratios.degenerate() {
        return Err(Error::DegenerateStrip);
    }
    let mut blocks = vec![3usize];
    for i in 2..=k {
        let mut m = 1usize;
        loop {
            blocks.push(m);
            let layout = StripLayout::new(pair, &blocks);
            let alpha = *layout.alphas.last().unwrap();
            let (w, n) = layout.counts_in_disk(alpha);
            if (ratios.g(w, n) - ratios.target(i)).abs() < gap_fraction * ratios.gap {
                break;
            }
            blocks.pop();
            if m > 1 << 24 {
                return Err(Error::InvalidInput(format!("block {i} did not reach its target")));
            }
            m = 2 * m + 1;
        }
    }
    Ok(blocks)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct StripSequence {
    pub functional: FunctionalSpec,
    pub blocks: Vec<usize>,
    pub alphas: Vec<f64>,
    pub wide_counts: Vec<u64>,
    pub narrow_counts: Vec<u64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub ratios: StripRatios,
    /// Smallest distance between an odd-index and an even-index `g` value.
    pub separation: Option<f64>,
    pub odd_within: bool,
    pub even_within: bool,
    pub verdict: Verdict,
}

/// `f_i` and `g_i` on the disks `B_{alpha_i}`, `i = 1..=k`, from closed-form counts.
pub fn strip_gi_sequence(cfg: &StripConfig, f: &FunctionalSpec, k: usize) -> Result<StripSequence> {
    cfg.validate()?;
    if k == 0 || k > cfg.blocks.len() {
        return Err(Error::InvalidInput(format!("need 1 <= k <= {}, got {k}", cfg.blocks.len())));
    }
    let ratios = StripRatios::new(&cfg.pair, f)?;
    let layout = StripLayout::new(&cfg.pair, &cfg.blocks[..k]);
    let (mut wc, mut nc, mut fs, mut gs) = (vec![], vec![], vec![], vec![]);
    for &alpha in &layout.alphas {
        let (w, n) = layout.counts_in_disk(alpha);
        wc.push(w);
        nc.push(n);
        fs.push(ratios.f(w, n, alpha));
        gs.push(ratios.g(w, n));
    }
    let third = ratios.gap / 3.0;
    let odd: Vec<f64> = gs.iter().step_by(2).copied().collect();
    let even: Vec<f64> = gs.iter().skip(1).step_by(2).copied().collect();
    let odd_within = odd.iter().all(|g| (g - ratios.q_delta).abs() < third);
    let even_within = even.iter().all(|g| (g - ratios.q).abs() < third);
    let separation = odd
        .iter()
        .flat_map(|a| even.iter().map(move |b| (a - b).abs()))
        .reduce(f64::min);
    let verdict = if ratios.degenerate() {
        Verdict::Degenerate
    } else if odd_within && even_within && separation.is_none_or(|s| s >= third) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(StripSequence {
        functional: *f,
        blocks: cfg.blocks[..k].to_vec(),
        alphas: layout.alphas,
        wide_counts: wc,
        narrow_counts: nc,
        f: fs,
        g: gs,
        ratios,
        separation,
        odd_within,
        even_within,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist;

    fn pair() -> IsocelesPair {
        compatible_isoceles(1.0, PI / 6.0, 1.6, PI / 5.0).unwrap()
    }

    #[test]
    fn threshold_value() {
        let t = isoceles_threshold(1.0, PI / 6.0, 0.1, PI / 6.0);
        assert!((t - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        let p = compatible_isoceles(1.0, PI / 6.0, 1.0, PI / 6.0).unwrap();
        assert_eq!(p.delta, p.top);
    }

    #[test]
    fn compatibility_predicate() {
        let p = pair();
        assert!(compatible(p.delta, p.top, p.l));
        assert!(!compatible([1.0, 1.0, 1.9], [1.0, 1.0, 1.0], 1.0));
        assert!(!compatible([1.0, 1.0, 1.0], [2.0, 2.0, 2.0], 1.0));
    }

    #[test]
    fn single_wide_block() {
        let cfg = StripConfig { pair: pair(), blocks: vec![3], extent: Some(6) };
        let (_, cx, alphas) = strip_block_triangulation(&cfg, 1).unwrap();
        assert_eq!(alphas.len(), 1);
        let area = cfg.pair.l * shape(cfg.pair.l, 1.0).h / 2.0;
        for c in 0..cx.num_cells() {
            assert!((cx.cell_measure(c) - area).abs() < 1e-12);
        }
        let seq = strip_gi_sequence(&cfg, &"F1".parse().unwrap(), 1).unwrap();
        assert_eq!(seq.g[0], seq.ratios.q_delta);
    }

    #[test]
    fn closed_form_counts_match_explicit_triangulation() {
        let cfg = StripConfig { pair: pair(), blocks: vec![3, 5, 3], extent: None };
        let (_, cx, alphas) = strip_block_triangulation(&cfg, 3).unwrap();
        let layout = StripLayout::new(&cfg.pair, &cfg.blocks);
        let a_delta = cfg.pair.l * shape(cfg.pair.l, cfg.pair.delta[2]).h / 2.0;
        for alpha in alphas.iter().copied().chain([2.3, 4.71, 6.05]) {
            let (mut w, mut n) = (0u64, 0u64);
            for c in 0..cx.num_cells() {
                if cx.cell_coords(c).iter().all(|p| dist(p, &[0.0, 0.0]) <= alpha) {
                    if (cx.cell_measure(c) - a_delta).abs() < 1e-9 {
                        w += 1;
                    } else {
                        n += 1;
                    }
                }
            }
            assert_eq!(layout.counts_in_disk(alpha), (w, n), "alpha = {alpha}");
        }
    }

    #[test]
    fn narrow_strips_never_adjacent() {
        let layout = StripLayout::new(&pair(), &[3, 9, 5, 7]);
        let kinds = layout.kinds();
        assert!(kinds.windows(2).all(|w| !(w[0] == StripKind::Narrow && w[1] == StripKind::Narrow)));
        assert!(kinds.contains(&StripKind::Narrow));
    }

    #[test]
    fn area_is_degenerate() {
        let cfg = StripConfig { pair: pair(), blocks: vec![3, 7, 5], extent: None };
        let seq = strip_gi_sequence(&cfg, &"AREA".parse().unwrap(), 3).unwrap();
        assert_eq!(seq.verdict, Verdict::Degenerate);
        assert!(seq.g.iter().all(|g| (g - 1.0).abs() < 1e-12));
        assert!(matches!(choose_block_sizes(&cfg.pair, &"AREA".parse().unwrap(), 3, 1.0 / 3.0), Err(Error::DegenerateStrip)));
    }
}
