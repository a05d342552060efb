//! Simplex functionals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    centroid, check, circumsphere, degenerate, dist2, edge_lengths_sq, inradius_2d, measure, norm2,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalKind {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    FR,
    FE,
    AREA,
}

impl FunctionalKind {
    pub const ALL: [FunctionalKind; 9] = [
        FunctionalKind::F1,
        FunctionalKind::F2,
        FunctionalKind::F3,
        FunctionalKind::F4,
        FunctionalKind::F5,
        FunctionalKind::F6,
        FunctionalKind::FR,
        FunctionalKind::FE,
        FunctionalKind::AREA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::F1 => "F1",
            FunctionalKind::F2 => "F2",
            FunctionalKind::F3 => "F3",
            FunctionalKind::F4 => "F4",
            FunctionalKind::F5 => "F5",
            FunctionalKind::F6 => "F6",
            FunctionalKind::FR => "FR",
            FunctionalKind::FE => "FE",
            FunctionalKind::AREA => "AREA",
        }
    }

    /// Whether the functional is defined on d-simplices.
    pub fn supports(self, d: usize) -> bool {
        match self {
            FunctionalKind::F3 | FunctionalKind::F4 | FunctionalKind::F5 | FunctionalKind::F6 => d == 2,
            _ => d == 2 || d == 3,
        }
    }
}

/// A functional together with its exponents. Serializes as its string form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FunctionalSpec {
    pub kind: FunctionalKind,
    pub c1: f64,
    pub c2: f64,
}

impl FunctionalSpec {
    pub fn new(kind: FunctionalKind) -> Self {
        FunctionalSpec { kind, c1: 1.0, c2: 1.0 }
    }

    pub fn f1(c1: f64) -> Result<Self> {
        Self { kind: FunctionalKind::F1, c1, c2: 1.0 }.validated()
    }

    pub fn f2(c2: f64) -> Result<Self> {
        Self { kind: FunctionalKind::F2, c1: 1.0, c2 }.validated()
    }

    fn validated(self) -> Result<Self> {
        if !(self.c1.is_finite() && self.c1 > 0.0) {
            return Err(Error::Parse(format!("c1 must be positive, got {}", self.c1)));
        }
        if !(self.c2.is_finite() && self.c2 >= 1.0) {
            return Err(Error::Parse(format!("c2 must be at least 1, got {}", self.c2)));
        }
        Ok(self)
    }
}

impl fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FunctionalKind::F1 => write!(f, "F1:c1={}", self.c1),
            FunctionalKind::F2 => write!(f, "F2:c2={}", self.c2),
            k => f.write_str(k.name()),
        }
    }
}

impl FromStr for FunctionalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, params) = match s.split_once(':') {
            Some((h, p)) => (h, Some(p)),
            None => (s, None),
        };
        let kind = FunctionalKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(head))
            .ok_or_else(|| Error::Parse(format!("unknown functional '{head}'")))?;
        let mut spec = FunctionalSpec::new(kind);
        if let Some(params) = params {
            for kv in params.split(',') {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key=value, got '{kv}'")))?;
                let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("bad number '{v}'")))?;
                match (kind, k.trim()) {
                    (FunctionalKind::F1, "c1") => spec.c1 = v,
                    (FunctionalKind::F2, "c2") => spec.c2 = v,
                    (_, k) => return Err(Error::Parse(format!("parameter '{k}' not accepted by {}", kind.name()))),
                }
            }
        }
        spec.validated()
    }
}

impl TryFrom<String> for FunctionalSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FunctionalSpec> for String {
    fn from(f: FunctionalSpec) -> String {
        f.to_string()
    }
}

/// Evaluates `f` on a simplex given by its vertex coordinates.
pub fn eval<P: AsRef<[f64]>>(f: &FunctionalSpec, simplex: &[P]) -> Result<f64> {
    let d = check(simplex)?;
    if !f.kind.supports(d) {
        return Err(Error::UnsupportedDimension(d));
    }
    let sum_sq = || edge_lengths_sq(simplex).iter().sum::<f64>();
    Ok(match f.kind {
        FunctionalKind::F1 => circumsphere(simplex)?.radius.powf(f.c1),
        FunctionalKind::F2 => circumsphere(simplex)?.radius.powf(f.c2) * measure(simplex)?,
        FunctionalKind::F3 => -inradius_2d(simplex)?,
        FunctionalKind::F4 => {
            let a = measure(simplex)?;
            if a == 0.0 {
                return Err(degenerate(d));
            }
            sum_sq() / a
        }
        FunctionalKind::F5 | FunctionalKind::FR => sum_sq() * measure(simplex)?,
        FunctionalKind::F6 => {
            let c = circumsphere(simplex)?;
            dist2(&centroid(simplex), &c.center) * measure(simplex)?
        }
        FunctionalKind::FE => fe_lifted_volume(simplex)?,
        FunctionalKind::AREA => measure(simplex)?,
    })
}

/// Slack allowed when comparing two functional sums.
pub fn tolerance(left: f64, right: f64) -> f64 {
    (left.abs() + right.abs() + 1.0) * 1e-9
}

/// Sum of `f` over all cells of a complex.
pub fn sum_over(f: &FunctionalSpec, cx: &crate::complex::TriangulationComplex) -> Result<f64> {
    (0..cx.num_cells()).map(|c| eval(f, &cx.cell_coords(c))).sum()
}

/// Volume between the lifted-vertex hyperplane and the paraboloid over the simplex.
pub fn fe_lifted_volume<P: AsRef<[f64]>>(simplex: &[P]) -> Result<f64> {
    let d = check(simplex)?;
    let vol = measure(simplex)?;
    if vol == 0.0 {
        return Err(degenerate(d));
    }
    let c = centroid(simplex);
    let v: Vec<Vec<f64>> =
        simplex.iter().map(|p| p.as_ref().iter().zip(&c).map(|(x, m)| x - m).collect()).collect();
    let n = (d + 1) as f64;
    let norms: Vec<f64> = v.iter().map(|p| norm2(p)).collect();
    let mean_lift = norms.iter().sum::<f64>() / n;
    let denom = n * (n + 1.0);
    let mut quad = (2.0 - d as f64) / denom * norms.iter().sum::<f64>();
    for i in 0..=d {
        for j in i + 1..=d {
            let mid: Vec<f64> = v[i].iter().zip(&v[j]).map(|(a, b)| (a + b) / 2.0).collect();
            quad += 4.0 / denom * norm2(&mid);
        }
    }
    Ok(vol * (mean_lift - quad))
}
