//! Points, circumspheres, simplex measures and the paraboloid lift.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::predicates::orient_sign;

/// Relative tolerance for metric (non-predicate) quantities.
pub const TAU_GEO: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub id: usize,
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(id: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id });
        }
        Ok(Point { id, coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circumsphere {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedPoint {
    pub coords: Vec<f64>,
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

pub(crate) fn check<P: AsRef<[f64]>>(simplex: &[P]) -> Result<usize> {
    if simplex.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let d = simplex.len() - 1;
    for p in simplex {
        let p = p.as_ref();
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id: usize::MAX });
        }
    }
    Ok(d)
}

pub(crate) fn degenerate(d: usize) -> Error {
    Error::Degenerate { ids: (0..=d).collect() }
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        if a[p][k] == 0.0 {
            return None;
        }
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some(x)
}

pub fn circumsphere<P: AsRef<[f64]>>(simplex: &[P]) -> Result<Circumsphere> {
    let d = check(simplex)?;
    if orient_sign(simplex) == 0 {
        return Err(degenerate(d));
    }
    Ok(circumsphere_unchecked(simplex))
}

/// Circumsphere of a simplex already known to be non-degenerate.
pub(crate) fn circumsphere_unchecked<P: AsRef<[f64]>>(simplex: &[P]) -> Circumsphere {
    let d = simplex.len() - 1;
    let x0 = simplex[0].as_ref();
    if d == 2 {
        let (ax, ay) = (simplex[1].as_ref()[0] - x0[0], simplex[1].as_ref()[1] - x0[1]);
        let (bx, by) = (simplex[2].as_ref()[0] - x0[0], simplex[2].as_ref()[1] - x0[1]);
        let den = 2.0 * (ax * by - ay * bx);
        let a2 = ax * ax + ay * ay;
        let b2 = bx * bx + by * by;
        let ux = (by * a2 - ay * b2) / den;
        let uy = (ax * b2 - bx * a2) / den;
        return Circumsphere { center: vec![x0[0] + ux, x0[1] + uy], radius: ux.hypot(uy) };
    }
    let mut a = Vec::with_capacity(d);
    let mut b = Vec::with_capacity(d);
    for p in &simplex[1..] {
        let row: Vec<f64> = p.as_ref().iter().zip(x0).map(|(x, o)| x - o).collect();
        b.push(norm2(&row));
        a.push(row.iter().map(|v| 2.0 * v).collect());
    }
    let u = solve(a, b).unwrap_or_else(|| vec![f64::INFINITY; d]);
    let radius = norm2(&u).sqrt();
    Circumsphere { center: u.iter().zip(x0).map(|(v, o)| v + o).collect(), radius }
}

pub fn circumradius<P: AsRef<[f64]>>(simplex: &[P]) -> Result<f64> {
    circumsphere(simplex).map(|c| c.radius)
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// Signed `det[x_i - x_0]` in floating point.
pub(crate) fn signed_det<P: AsRef<[f64]>>(simplex: &[P]) -> f64 {
    let d = simplex.len() - 1;
    let x0 = simplex[0].as_ref();
    let e = |i: usize, j: usize| simplex[i + 1].as_ref()[j] - x0[j];
    match d {
        1 => e(0, 0),
        2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
        3 => {
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => {
            let mut a: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| e(i, j)).collect()).collect();
            let mut det = 1.0;
            for k in 0..d {
                let p = (k..d).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
                if a[p][k] == 0.0 {
                    return 0.0;
                }
                if p != k {
                    a.swap(p, k);
                    det = -det;
                }
                det *= a[k][k];
                for i in k + 1..d {
                    let f = a[i][k] / a[k][k];
                    for j in k..d {
                        a[i][j] -= f * a[k][j];
                    }
                }
            }
            det
        }
    }
}

/// d-dimensional volume; exactly 0 for affinely degenerate simplices.
pub fn measure<P: AsRef<[f64]>>(simplex: &[P]) -> Result<f64> {
    let d = check(simplex)?;
    if orient_sign(simplex) == 0 {
        return Ok(0.0);
    }
    Ok(signed_det(simplex).abs() / factorial(d))
}

pub(crate) fn measure_unchecked<P: AsRef<[f64]>>(simplex: &[P]) -> f64 {
    signed_det(simplex).abs() / factorial(simplex.len() - 1)
}

/// Triangle area from side lengths and circumradius, `abc / (4 rho)`.
pub fn area_via_circumradius(a: f64, b: f64, c: f64, rho: f64) -> Result<f64> {
    let bad = || Error::InvalidTriangle { a, b, c, rho };
    if ![a, b, c, rho].iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(bad());
    }
    if a >= b + c || b >= a + c || c >= a + b {
        return Err(bad());
    }
    Ok(a * b * c / (4.0 * rho))
}

pub fn lift<P: AsRef<[f64]>>(p: &P) -> LiftedPoint {
    let p = p.as_ref();
    let mut coords = p.to_vec();
    coords.push(norm2(p));
    LiftedPoint { coords }
}

/// Squared edge lengths in lexicographic vertex-pair order.
pub fn edge_lengths_sq<P: AsRef<[f64]>>(simplex: &[P]) -> Vec<f64> {
    let mut out = Vec::with_capacity(simplex.len() * (simplex.len() - 1) / 2);
    for i in 0..simplex.len() {
        for j in i + 1..simplex.len() {
            out.push(dist2(simplex[i].as_ref(), simplex[j].as_ref()));
        }
    }
    out
}

pub fn inradius_2d<P: AsRef<[f64]>>(triangle: &[P]) -> Result<f64> {
    let d = check(triangle)?;
    if d != 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let area = measure(triangle)?;
    if area == 0.0 {
        return Err(degenerate(d));
    }
    let s: f64 = edge_lengths_sq(triangle).iter().map(|v| v.sqrt()).sum::<f64>() / 2.0;
    Ok(area / s)
}

pub fn centroid<P: AsRef<[f64]>>(simplex: &[P]) -> Vec<f64> {
    let d = simplex[0].as_ref().len();
    let n = simplex.len() as f64;
    (0..d).map(|j| simplex.iter().map(|p| p.as_ref()[j]).sum::<f64>() / n).collect()
}

/// Volume of the unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const T345: [[f64; 2]; 3] = [[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]];

    #[test]
    fn circumsphere_examples() {
        let c = circumsphere(&T345).unwrap();
        assert_relative_eq!(c.center[0], 2.0, max_relative = 1e-12);
        assert_relative_eq!(c.center[1], 1.5, max_relative = 1e-12);
        assert_relative_eq!(c.radius, 2.5, max_relative = 1e-12);

        let eq = [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
        assert_relative_eq!(circumradius(&eq).unwrap(), 1.0 / 3f64.sqrt(), max_relative = 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let tet = [[s, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s], [s, s, s]];
        assert_relative_eq!(circumradius(&tet).unwrap(), (3.0f64 / 8.0).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn circumsphere_of_flat_simplex_errors() {
        assert!(circumsphere(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn measure_examples() {
        assert_eq!(measure(&T345).unwrap(), 6.0);
        let tet = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_relative_eq!(measure(&tet).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        assert_eq!(measure(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap(), 0.0);
    }

    #[test]
    fn area_identity_examples() {
        assert!((area_via_circumradius(5.0, 4.0, 3.0, 2.5).unwrap() - 6.0).abs() <= 1e-12);
        let eq = area_via_circumradius(1.0, 1.0, 1.0, 1.0 / 3f64.sqrt()).unwrap();
        assert_relative_eq!(eq, 3f64.sqrt() / 4.0, max_relative = 1e-12);
        assert!(area_via_circumradius(1.0, 1.0, 3.0, 1.0).is_err());
        assert!(area_via_circumradius(3.0, 4.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn lift_examples() {
        assert_eq!(lift(&[1.0, 2.0]).coords, vec![1.0, 2.0, 5.0]);
        assert_eq!(lift(&[0.0, 0.0]).coords, vec![0.0, 0.0, 0.0]);
        assert_eq!(lift(&[3.0, 4.0]).coords, vec![3.0, 4.0, 25.0]);
    }

    #[test]
    fn inradius_and_centroid() {
        assert_relative_eq!(inradius_2d(&T345).unwrap(), 1.0, max_relative = 1e-12);
        let c = centroid(&T345);
        assert_relative_eq!(c[0], 4.0 / 3.0, max_relative = 1e-15);
        assert_eq!(c[1], 1.0);
        let eq = [[0.0, 0.0], [1.0, 0.0], [0.5, 3f64.sqrt() / 2.0]];
        let cs = circumsphere(&eq).unwrap();
        assert!(dist(&centroid(&eq), &cs.center) < 1e-12);
        assert!(inradius_2d(&[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]).is_err());
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(4), std::f64::consts::PI.powi(2) / 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0);
    }
}
