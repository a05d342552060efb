use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("point {id} has a non-finite coordinate")]
    NonFinite { id: usize },

    #[error("degenerate simplex {ids:?}")]
    Degenerate { ids: Vec<usize> },

    #[error("non-generic input: points {ids:?} are cospherical; jitter the input")]
    NonGeneric { ids: Vec<usize> },

    #[error("duplicate points {a} and {b}")]
    DuplicatePoint { a: usize, b: usize },

    #[error("invalid triangle with sides {a}, {b}, {c} and circumradius {rho}")]
    InvalidTriangle { a: f64, b: f64, c: f64, rho: f64 },

    #[error("cell {cell} references point {id}, which does not exist")]
    InvalidId { cell: usize, id: usize },

    #[error("facet {facet:?} is shared by {count} cells")]
    NonManifold { facet: Vec<usize>, count: usize },

    #[error("cell {cell:?} has point {point} strictly inside its circumsphere")]
    NotEmpty { cell: Vec<usize>, point: usize },

    #[error("coverage mismatch: {0}")]
    Coverage(String),

    #[error("facet {facet:?} is a boundary facet")]
    BoundaryFacet { facet: Vec<usize> },

    #[error("facet {facet:?} is not in the complex")]
    MissingFacet { facet: Vec<usize> },

    #[error("facet {facet:?} is already locally Delaunay")]
    LocallyDelaunay { facet: Vec<usize> },

    #[error("quadrilateral around facet {facet:?} is not convex")]
    NonConvex { facet: Vec<usize> },

    #[error("point {id} lies inside the convex hull of the others")]
    PointInHull { id: usize },

    #[error("window exhausted: {0}")]
    WindowExhausted(String),

    #[error("alpha grid exceeds the safe window; largest admissible alpha is {max_alpha}")]
    UnsafeGrid { max_alpha: f64 },

    #[error("Q_delta equals Q; the strip sequence cannot oscillate")]
    DegenerateStrip,

    #[error("rejection sampler starved after {tries} tries")]
    SamplerStarved { tries: usize },

    #[error("covering failed: {holes} empty probes remain, worst at {witness:?}")]
    CoveringFailed { holes: usize, witness: Vec<f64> },

    #[error("instance too large: {n} points, limit {max}")]
    TooLarge { n: usize, max: usize },

    #[error("no reverse flip available")]
    NoReverseFlip,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::NonFinite { .. } => "non_finite",
            Error::Degenerate { .. } => "degenerate",
            Error::NonGeneric { .. } => "non_generic",
            Error::DuplicatePoint { .. } => "duplicate_point",
            Error::InvalidTriangle { .. } => "invalid_triangle",
            Error::InvalidId { .. } => "invalid_id",
            Error::NonManifold { .. } => "non_manifold",
            Error::NotEmpty { .. } => "not_empty",
            Error::Coverage(_) => "coverage",
            Error::BoundaryFacet { .. } => "boundary_facet",
            Error::MissingFacet { .. } => "missing_facet",
            Error::LocallyDelaunay { .. } => "locally_delaunay",
            Error::NonConvex { .. } => "non_convex",
            Error::PointInHull { .. } => "point_in_hull",
            Error::WindowExhausted(_) => "window_exhausted",
            Error::UnsafeGrid { .. } => "unsafe_grid",
            Error::DegenerateStrip => "degenerate_strip",
            Error::SamplerStarved { .. } => "sampler_starved",
            Error::CoveringFailed { .. } => "covering_failed",
            Error::TooLarge { .. } => "too_large",
            Error::NoReverseFlip => "no_reverse_flip",
            Error::InvalidInput(_) => "invalid_input",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
