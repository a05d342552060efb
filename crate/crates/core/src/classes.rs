//! Empirical membership checks for the functional classes E, F and G.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clip::restrict_delaunay;
use crate::complex::TriangulationComplex;
use crate::delaunay::{delaunay, radon_two_triangulations};
use crate::error::{Error, Result};
use crate::functionals::{eval, sum_over, tolerance, FunctionalSpec};
use crate::geometry::{edge_lengths_sq, Point};
use crate::oracle::enumerate_triangulations_2d;
use crate::rng::substream;

/// Outcome of one `left <= right` comparison of functional sums.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub pass: bool,
    pub left: f64,
    pub right: f64,
    /// `right - left`; negative margins beyond the tolerance are violations.
    pub margin: f64,
    pub tolerance: f64,
}

impl InequalityCheck {
    pub fn new(left: f64, right: f64) -> Self {
        let tol = tolerance(left, right);
        InequalityCheck { pass: left <= right + tol, left, right, margin: right - left, tolerance: tol }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassReport {
    pub functional: FunctionalSpec,
    pub class: String,
    pub trials: usize,
    pub checks: usize,
    pub violations: usize,
    pub witness: Option<Vec<Vec<f64>>>,
    pub worst_margin: Option<f64>,
    pub e_hat: Option<f64>,
    #[serde(rename = "E_hat")]
    pub big_e_hat: Option<f64>,
}

impl ClassReport {
    pub fn pass(&self) -> bool {
        self.violations == 0
    }
}

fn unit_sphere<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n: f64 = v.iter().map(|x| x * x).sum();
        if n > 1e-6 && n <= 1.0 {
            let n = n.sqrt();
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Samples simplices with all edges at least `2r` and circumradius at most `q`
/// (vertices placed on a random circumsphere) and reports the observed range of `f`.
pub fn check_ecal_bounds(f: &FunctionalSpec, r: f64, q: f64, d: usize, samples: usize, seed: u64) -> Result<ClassReport> {
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if !(2..=3).contains(&d) {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(r > 0.0 && q > 0.0) {
        return Err(Error::InvalidInput(format!("need r, q > 0, got r = {r}, q = {q}")));
    }
    let mut rng = substream(seed, "ecal", 0);
    let max_tries = samples.saturating_mul(1000).max(10_000);
    let mut tries = 0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut violations = 0;
    let mut witness = None;
    let mut accepted = 0;
    while accepted < samples {
        tries += 1;
        if tries > max_tries {
            return Err(Error::SamplerStarved { tries: max_tries });
        }
        let rho = rng.gen_range(r..=q);
        let simplex: Vec<Vec<f64>> = (0..=d).map(|_| unit_sphere(&mut rng, d).into_iter().map(|x| x * rho).collect()).collect();
        if edge_lengths_sq(&simplex).iter().any(|&e| e < 4.0 * r * r) {
            continue;
        }
        accepted += 1;
        match eval(f, &simplex) {
            Ok(v) if v.is_finite() => {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            _ => {
                violations += 1;
                witness.get_or_insert(simplex);
            }
        }
    }
    Ok(ClassReport {
        functional: *f,
        class: "E".into(),
        trials: samples,
        checks: samples,
        violations,
        witness,
        worst_margin: None,
        e_hat: lo.is_finite().then_some(lo),
        big_e_hat: hi.is_finite().then_some(hi),
    })
}

/// Compares the sums of `f` over the two triangulations of `d+2` points.
pub fn check_flip_inequality(f: &FunctionalSpec, points: &[Point]) -> Result<InequalityCheck> {
    let (dl, other) = radon_two_triangulations(points.to_vec())?;
    Ok(InequalityCheck::new(sum_over(f, &dl)?, sum_over(f, &other)?))
}

/// Compares the sum over the Delaunay cells of `y` lying in `t_prime` with the sum
/// over `t_prime`.
pub fn check_g_inequality(f: &FunctionalSpec, t_prime: &TriangulationComplex, y: &[Point]) -> Result<InequalityCheck> {
    let dl = delaunay(y.to_vec())?;
    check_g_against(f, t_prime, &dl)
}

fn check_g_against(f: &FunctionalSpec, t_prime: &TriangulationComplex, dl: &TriangulationComplex) -> Result<InequalityCheck> {
    let restricted = restrict_delaunay(dl, t_prime)?;
    Ok(InequalityCheck::new(sum_over(f, &restricted)?, sum_over(f, t_prime)?))
}

fn random_points<R: Rng>(rng: &mut R, n: usize, d: usize) -> Vec<Point> {
    (0..n).map(|i| Point::new(i, (0..d).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap()).collect()
}

/// A random set of `d+2` points in convex position, by rejection.
pub fn random_radon_configuration<R: Rng>(rng: &mut R, d: usize) -> Vec<Point> {
    loop {
        let pts = random_points(rng, d + 2, d);
        match radon_two_triangulations(pts.clone()) {
            Ok(_) => return pts,
            Err(_) => continue,
        }
    }
}

struct Tally {
    checks: usize,
    violations: usize,
    witness: Option<Vec<Vec<f64>>>,
    worst: f64,
    lo: f64,
    hi: f64,
}

impl Tally {
    fn empty() -> Self {
        Tally { checks: 0, violations: 0, witness: None, worst: f64::INFINITY, lo: f64::INFINITY, hi: f64::NEG_INFINITY }
    }

    fn add(&mut self, c: &InequalityCheck, pts: &[Point]) {
        self.checks += 1;
        self.worst = self.worst.min(c.margin);
        if !c.pass {
            self.violations += 1;
            if self.witness.is_none() {
                self.witness = Some(pts.iter().map(|p| p.coords.clone()).collect());
            }
        }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.checks += o.checks;
        self.violations += o.violations;
        self.witness = self.witness.or(o.witness);
        self.worst = self.worst.min(o.worst);
        self.lo = self.lo.min(o.lo);
        self.hi = self.hi.max(o.hi);
        self
    }

    fn report(self, f: &FunctionalSpec, class: &str, trials: usize) -> ClassReport {
        ClassReport {
            functional: *f,
            class: class.into(),
            trials,
            checks: self.checks,
            violations: self.violations,
            witness: self.witness,
            worst_margin: self.worst.is_finite().then_some(self.worst),
            e_hat: self.lo.is_finite().then_some(self.lo),
            big_e_hat: self.hi.is_finite().then_some(self.hi),
        }
    }
}

fn observe(t: &mut Tally, f: &FunctionalSpec, cx: &TriangulationComplex) -> Result<()> {
    for c in 0..cx.num_cells() {
        let v = eval(f, &cx.cell_coords(c))?;
        t.lo = t.lo.min(v);
        t.hi = t.hi.max(v);
    }
    Ok(())
}

/// Flip inequality on `trials` random configurations of `d+2` points in convex
/// position in the unit cube.
pub fn flip_class_report(f: &FunctionalSpec, trials: usize, seed: u64, d: usize) -> Result<ClassReport> {
    if !f.kind.supports(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let mut rng = substream(seed, "flipcheck", i as u64);
            let pts = random_radon_configuration(&mut rng, d);
            let (dl, other) = radon_two_triangulations(pts.clone())?;
            let mut t = Tally::empty();
            observe(&mut t, f, &dl)?;
            observe(&mut t, f, &other)?;
            t.add(&InequalityCheck::new(sum_over(f, &dl)?, sum_over(f, &other)?), &pts);
            Ok(t)
        })
        .try_reduce(Tally::empty, |a, b| Ok(a.merge(b)))?;
    Ok(tally.report(f, "F", trials))
}

/// Candidate complexes `T'` for one point set: every triangulation and, for each
/// non-Delaunay one, the subcomplex of its non-Delaunay cells.
fn g_candidates(points: &[Point], d: usize) -> Result<(TriangulationComplex, Vec<TriangulationComplex>)> {
    if d == 2 {
        let all = enumerate_triangulations_2d(points)?;
        let dl = all[0].clone();
        let dset = dl.cell_set();
        let mut out = Vec::new();
        for t in all {
            let foreign = t.subcomplex(|c| !dset.contains(&t.cells()[c]));
            if foreign.num_cells() > 0 && foreign.num_cells() < t.num_cells() {
                out.push(foreign);
            }
            out.push(t);
        }
        Ok((dl, out))
    } else {
        let (dl, other) = radon_two_triangulations(points.to_vec())?;
        let mut out = vec![dl.clone()];
        let m = other.num_cells();
        for mask in 1u32..(1 << m) {
            out.push(other.subcomplex(|c| mask & (1 << c) != 0));
        }
        Ok((dl, out))
    }
}

/// G-class inequality over all enumerable `T'` for random point sets: planar sets
/// with `n` drawn from `n_range`, or 5-point sets in convex position for `d = 3`.
pub fn g_class_report(f: &FunctionalSpec, trials: usize, n_range: (usize, usize), seed: u64, d: usize) -> Result<ClassReport> {
    if !f.kind.supports(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let (lo, hi) = n_range;
    if d == 2 && (lo < 3 || hi < lo) {
        return Err(Error::InvalidInput(format!("bad point-count range {lo}..{hi}")));
    }
    let tally = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<Tally> {
            let mut rng = substream(seed, "gcheck", i as u64);
            let pts = if d == 2 {
                let n = rng.gen_range(lo..=hi);
                random_points(&mut rng, n, 2)
            } else {
                random_radon_configuration(&mut rng, 3)
            };
            let (dl, candidates) = g_candidates(&pts, d)?;
            let mut t = Tally::empty();
            observe(&mut t, f, &dl)?;
            for cand in &candidates {
                t.add(&check_g_against(f, cand, &dl)?, &pts);
            }
            Ok(t)
        })
        .try_reduce(Tally::empty, |a, b| Ok(a.merge(b)))?;
    Ok(tally.report(f, "G", trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> FunctionalSpec {
        s.parse().unwrap()
    }

    #[test]
    fn area_ecal_bounds() {
        let rep = check_ecal_bounds(&spec("AREA"), 0.5, 1.0, 2, 2000, 3).unwrap();
        assert!(rep.e_hat.unwrap() >= 0.25);
        assert!(rep.big_e_hat.unwrap() <= 4.0);
        let rep = check_ecal_bounds(&spec("F1"), 0.5, 1.0, 2, 500, 3).unwrap();
        assert!(rep.big_e_hat.unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn starved_sampler() {
        assert!(matches!(check_ecal_bounds(&spec("AREA"), 1.0, 1.0, 2, 10, 0), Err(Error::SamplerStarved { .. })));
    }

    #[test]
    fn area_flip_margin_is_zero() {
        let pts: Vec<Point> = [[0.0, 0.0], [3.0, 0.0], [3.0, 1.0], [0.0, 1.02]]
            .iter()
            .enumerate()
            .map(|(i, p)| Point::new(i, p.to_vec()).unwrap())
            .collect();
        let c = check_flip_inequality(&spec("AREA"), &pts).unwrap();
        assert!(c.pass && c.margin.abs() < 1e-12);
        assert!(check_flip_inequality(&spec("F5"), &pts).unwrap().pass);
    }

    #[test]
    fn g_inequality_on_delaunay_itself() {
        let pts: Vec<Point> = [[0.0, 0.0], [3.0, 0.1], [3.2, 2.0], [0.1, 2.1], [1.6, 1.0]]
            .iter()
            .enumerate()
            .map(|(i, p)| Point::new(i, p.to_vec()).unwrap())
            .collect();
        let dl = delaunay(pts.clone()).unwrap();
        let c = check_g_inequality(&spec("FE"), &dl, &pts).unwrap();
        assert!(c.pass && c.margin.abs() < 1e-12);
    }

    #[test]
    fn small_batches_pass() {
        for s in ["F1", "F5", "FR"] {
            assert!(flip_class_report(&spec(s), 50, 9, 2).unwrap().pass());
        }
        assert!(flip_class_report(&spec("FE"), 30, 9, 3).unwrap().pass());
        assert!(g_class_report(&spec("FR"), 10, (5, 7), 2, 2).unwrap().pass());
        assert!(g_class_report(&spec("FE"), 10, (5, 5), 2, 3).unwrap().pass());
    }
}
