//! Orientation and in-sphere signs.
//!
//! Each predicate first evaluates its determinant in floating point together with
//! a forward error bound. If the bound cannot certify the sign, the determinant is
//! recomputed exactly over big integers (every finite `f64` is a dyadic rational).

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    Negative,
    Degenerate,
    Positive,
}

impl Orientation {
    pub fn from_sign(s: i8) -> Self {
        match s {
            s if s > 0 => Orientation::Positive,
            0 => Orientation::Degenerate,
            _ => Orientation::Negative,
        }
    }

    pub fn sign(self) -> i8 {
        match self {
            Orientation::Negative => -1,
            Orientation::Degenerate => 0,
            Orientation::Positive => 1,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sign())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InSphere {
    Inside,
    On,
    Outside,
}

impl fmt::Display for InSphere {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InSphere::Inside => write!(f, "INSIDE"),
            InSphere::On => write!(f, "ON"),
            InSphere::Outside => write!(f, "OUTSIDE"),
        }
    }
}

/// Sign of `det[x_1 - x_0, ..., x_d - x_0]` for `d+1` points in `R^d`.
pub fn orientation<P: AsRef<[f64]>>(points: &[P]) -> Result<Orientation> {
    check_simplex(points)?;
    Ok(Orientation::from_sign(orient_sign(points)))
}

/// Position of `query` relative to the circumsphere of a non-degenerate simplex.
pub fn in_sphere<P: AsRef<[f64]>>(simplex: &[P], query: &[f64]) -> Result<InSphere> {
    check_simplex(simplex)?;
    let d = simplex.len() - 1;
    if query.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: query.len() });
    }
    if query.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { id: usize::MAX });
    }
    let o = orient_sign(simplex);
    if o == 0 {
        return Err(Error::Degenerate { ids: (0..=d).collect() });
    }
    Ok(in_sphere_with(simplex, query, o))
}

/// In-sphere classification when the simplex orientation sign `o` (non-zero) is known.
pub(crate) fn in_sphere_with<P: AsRef<[f64]>>(simplex: &[P], query: &[f64], o: i8) -> InSphere {
    let d = simplex.len() - 1;
    let s = lifted_sign(simplex, query) * o * if d % 2 == 0 { 1 } else { -1 };
    match s {
        s if s > 0 => InSphere::Inside,
        0 => InSphere::On,
        _ => InSphere::Outside,
    }
}

fn check_simplex<P: AsRef<[f64]>>(points: &[P]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::DimensionMismatch { expected: 1, found: 0 });
    }
    let d = points.len() - 1;
    for (i, p) in points.iter().enumerate() {
        let p = p.as_ref();
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id: i });
        }
    }
    Ok(())
}

const EPS: f64 = f64::EPSILON * 0.5;
const MAX_FILTER: usize = 5;

/// Unchecked orientation sign. Inputs must be `d+1` finite points of dimension `d`.
pub(crate) fn orient_sign<P: AsRef<[f64]>>(points: &[P]) -> i8 {
    let d = points.len() - 1;
    let x0 = points[0].as_ref();
    match d {
        1 => {
            let v = points[1].as_ref()[0] - x0[0];
            if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                0
            }
        }
        2 => {
            let a = points[1].as_ref();
            let b = points[2].as_ref();
            let t1 = (a[0] - x0[0]) * (b[1] - x0[1]);
            let t2 = (a[1] - x0[1]) * (b[0] - x0[0]);
            let det = t1 - t2;
            let bound = 8.0 * EPS * (t1.abs() + t2.abs());
            if filter_ok(det, bound) {
                return sgn(det);
            }
            orient_exact(points)
        }
        _ if d <= MAX_FILTER => {
            let mut m = [[0.0f64; MAX_FILTER]; MAX_FILTER];
            for i in 0..d {
                let xi = points[i + 1].as_ref();
                for j in 0..d {
                    m[i][j] = xi[j] - x0[j];
                }
            }
            let (det, perm) = laplace(&m, d, 0, 0);
            if filter_ok(det, 64.0 * EPS * perm) {
                return sgn(det);
            }
            orient_exact(points)
        }
        _ => orient_exact(points),
    }
}

/// Sign of `det[[x_i - q, |x_i - q|^2]]_{i=0..d}`.
pub(crate) fn lifted_sign<P: AsRef<[f64]>>(simplex: &[P], q: &[f64]) -> i8 {
    let d = simplex.len() - 1;
    let n = d + 1;
    if n <= MAX_FILTER {
        let mut m = [[0.0f64; MAX_FILTER]; MAX_FILTER];
        for (i, p) in simplex.iter().enumerate() {
            let p = p.as_ref();
            let mut s = 0.0;
            for j in 0..d {
                let v = p[j] - q[j];
                m[i][j] = v;
                s += v * v;
            }
            m[i][d] = s;
        }
        let (det, perm) = laplace(&m, n, 0, 0);
        if filter_ok(det, 64.0 * EPS * perm) {
            return sgn(det);
        }
    }
    lifted_exact(simplex, q)
}

fn filter_ok(det: f64, bound: f64) -> bool {
    det.is_finite() && bound.is_finite() && bound > 1e-280 && bound < 1e280 && det.abs() > bound
        || (det == 0.0 && bound == 0.0)
}

fn sgn(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Laplace expansion along rows, returning the determinant and the permanent of
/// absolute values (the scale for the rounding error bound).
fn laplace(m: &[[f64; MAX_FILTER]; MAX_FILTER], n: usize, row: usize, used: u32) -> (f64, f64) {
    if row + 1 == n {
        let col = (0..n).find(|c| used & (1 << c) == 0).unwrap();
        let v = m[row][col];
        return (v, v.abs());
    }
    let mut det = 0.0;
    let mut perm = 0.0;
    let mut sign = 1.0;
    for c in 0..n {
        if used & (1 << c) != 0 {
            continue;
        }
        let a = m[row][c];
        if a != 0.0 {
            let (d, p) = laplace(m, n, row + 1, used | (1 << c));
            det += sign * a * d;
            perm += a.abs() * p;
        }
        sign = -sign;
    }
    (det, perm)
}

/// `x = mantissa * 2^exponent` exactly; zero yields `None`.
fn decompose(x: f64) -> Option<(i64, i32)> {
    if x == 0.0 {
        return None;
    }
    let bits = x.to_bits();
    let negative = bits >> 63 == 1;
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & ((1u64 << 52) - 1)) as i64;
    let (m, e) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1i64 << 52), exp_bits - 1075)
    };
    Some((if negative { -m } else { m }, e))
}

/// Converts a collection of coordinates to integers sharing one power-of-two scale.
struct Scaled {
    min_exp: i32,
}

impl Scaled {
    fn new<'a>(values: impl Iterator<Item = &'a f64>) -> Self {
        let min_exp = values.filter_map(|&v| decompose(v)).map(|(_, e)| e).min().unwrap_or(0);
        Scaled { min_exp }
    }

    fn int(&self, v: f64) -> BigInt {
        match decompose(v) {
            None => BigInt::zero(),
            Some((m, e)) => BigInt::from(m) << ((e - self.min_exp) as usize),
        }
    }
}

fn orient_exact<P: AsRef<[f64]>>(points: &[P]) -> i8 {
    let d = points.len() - 1;
    let scale = Scaled::new(points.iter().flat_map(|p| p.as_ref().iter()));
    let x0: Vec<BigInt> = points[0].as_ref().iter().map(|&v| scale.int(v)).collect();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(d);
    for p in &points[1..] {
        m.push(p.as_ref().iter().zip(&x0).map(|(&v, o)| scale.int(v) - o).collect());
    }
    bareiss_sign(m)
}

fn lifted_exact<P: AsRef<[f64]>>(simplex: &[P], q: &[f64]) -> i8 {
    let d = simplex.len() - 1;
    let scale = Scaled::new(simplex.iter().flat_map(|p| p.as_ref().iter()).chain(q.iter()));
    let qi: Vec<BigInt> = q.iter().map(|&v| scale.int(v)).collect();
    let mut m: Vec<Vec<BigInt>> = Vec::with_capacity(d + 1);
    for p in simplex {
        let mut row: Vec<BigInt> = p.as_ref().iter().zip(&qi).map(|(&v, o)| scale.int(v) - o).collect();
        let norm = row.iter().fold(BigInt::zero(), |acc, v| acc + v * v);
        row.push(norm);
        m.push(row);
    }
    bareiss_sign(m)
}

/// Sign of an integer determinant by fraction-free elimination.
pub(crate) fn bareiss_sign(mut m: Vec<Vec<BigInt>>) -> i8 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut sign: i8 = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&i| !m[i][k].is_zero()) {
                Some(i) => {
                    m.swap(i, k);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
        }
        prev = m[k][k].clone();
    }
    let last = &m[n - 1][n - 1];
    if last.is_zero() {
        0
    } else if last.is_positive() {
        sign
    } else {
        -sign
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orientation_examples() {
        let t = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(orientation(&t).unwrap(), Orientation::Positive);
        let c = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert_eq!(orientation(&c).unwrap(), Orientation::Degenerate);
        let s = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(orientation(&s).unwrap(), Orientation::Positive);
    }

    #[test]
    fn in_sphere_examples() {
        let t = [[0.0, 0.0], [4.0, 0.0], [0.0, 3.0]];
        assert_eq!(in_sphere(&t, &[1.0, 1.0]).unwrap(), InSphere::Inside);
        assert_eq!(in_sphere(&t, &[10.0, 10.0]).unwrap(), InSphere::Outside);
        let u = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(in_sphere(&u, &[1.0, 1.0]).unwrap(), InSphere::On);
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let c = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(in_sphere(&c, &[0.0, 1.0]), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn dimension_mismatch() {
        let bad: [&[f64]; 3] = [&[0.0, 0.0], &[1.0], &[0.0, 1.0]];
        assert!(orientation(&bad).is_err());
    }

    #[test]
    fn nearly_collinear_resolved_exactly() {
        // Points on y = x with a one-ulp perturbation of the middle point.
        let x = 0.5f64;
        let y = f64::from_bits(x.to_bits() + 1);
        let p = [[0.1, 0.1], [x, y], [0.9, 0.9]];
        // The middle point sits above the line through the others, so the turn is clockwise.
        assert_eq!(orient_sign(&p), -1);
        assert_eq!(orient_exact(&p), -1);
    }

    #[test]
    fn decompose_round_trips() {
        for v in [1.0, -3.75, 1e-300, 6.02e23, 0.1] {
            let (m, e) = decompose(v).unwrap();
            assert_eq!(m as f64 * 2f64.powi(e), v);
        }
    }
}
