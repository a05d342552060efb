//! Triangulations of finite windows of Delone sets, simplex functionals, and
//! windowed density experiments.

pub mod classes;
pub mod clip;
pub mod complex;
pub mod cube;
pub mod delaunay;
pub mod density;
pub mod error;
pub mod flips;
pub mod functionals;
pub mod generators;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod predicates;
pub mod prefix;
pub mod rng;
pub mod spatial;
pub mod strips;

pub use complex::{build_complex, build_subcomplex, Cell, Facet, TriangulationComplex};
pub use error::{Error, Result};
pub use geometry::{Circumsphere, LiftedPoint, Point, TAU_GEO};
pub use predicates::{in_sphere, orientation, InSphere, Orientation};
