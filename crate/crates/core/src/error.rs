use crate::mesh::Point2;

/// Errors produced by mesh construction, coefficient evaluation, assembly
/// and the spectral routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("evaluation error in `{expr}`: {msg}")]
    Eval { expr: String, msg: String },

    #[error("nonpositive coefficient sample {value} on triangle {triangle} at ({x}, {y})")]
    NonpositiveCoefficient {
        triangle: usize,
        x: f64,
        y: f64,
        value: f64,
    },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty region")]
    EmptyRegion,

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("field length {got} does not match mesh triangle count {expected}")]
    FieldMeshMismatch { got: usize, expected: usize },

    #[error("eliminating all {0} nodes leaves an empty system")]
    EmptySystem(usize),

    #[error("B not positive definite; deflate or check coercivity")]
    NotPositiveDefinite,

    #[error("matrix does not annihilate the constant vector (residual {0:.3e}); not a Neumann pencil")]
    NotDeflatable(f64),

    #[error("shift coincides with eigenvalue {0}; resolvent norm is infinite")]
    ShiftOnSpectrum(f64),

    #[error("vector has zero B-norm")]
    ZeroBNorm,

    #[error("count mismatch: {left} eigenvalues vs {right} intervals")]
    CountMismatch { left: usize, right: usize },

    #[error("disc of radius {0} contains no interior node with support inside it; refine the mesh")]
    InsufficientResolution(f64),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed mesh file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn nonpositive(triangle: usize, p: Point2, value: f64) -> Self {
        Error::NonpositiveCoefficient {
            triangle,
            x: p.x,
            y: p.y,
            value,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
