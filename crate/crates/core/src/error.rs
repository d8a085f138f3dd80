use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown root system family `{0}`")]
    UnknownFamily(String),

    #[error("multiplicity for `{label}` must be positive, got {value}")]
    NonPositiveMultiplicity { label: String, value: i64 },

    #[error("multiplicity map has no entry for the root orbit of `{0}`")]
    MissingMultiplicity(String),

    #[error("multiplicity map has an entry `{0}` that matches no root of the family")]
    UnknownRootLabel(String),

    #[error("conflicting multiplicities on one Weyl orbit: {0}")]
    ConflictingMultiplicity(String),

    #[error("invalid root system: {0}")]
    InvalidRootSystem(String),

    #[error("expected a rank-{expected} input, got rank {got}")]
    RankMismatch { expected: usize, got: usize },

    #[error("point {point:?} lies on the wall of root #{root}")]
    OnWall { point: Vec<f64>, root: usize },

    #[error("point {0:?} is outside the domain of the function")]
    OutsideDomain(Vec<f64>),

    #[error("grid function is not discretely convex at node {node:?} (second difference {second_difference:e})")]
    NotConvex { node: Vec<usize>, second_difference: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("gradient image {image:?} escapes the gradient-space bounds {bounds:?}")]
    ImageOutOfBounds {
        image: (Vec<f64>, Vec<f64>),
        bounds: (Vec<f64>, Vec<f64>),
    },

    #[error("operation not supported for this function: {0}")]
    Unsupported(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("singular linear system at pivot {0}")]
    SingularMatrix(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
