use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("zero divisor: {0} has a vanishing idempotent component")]
    ZeroDivisor(String),

    #[error("degenerate domain: {0}")]
    DegenerateDomain(String),

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("point {point} lies {distance:.3e} from the boundary (minimum {minimum:.3e})")]
    PointTooCloseToBoundary {
        point: Complex64,
        distance: f64,
        minimum: f64,
    },

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    SolverDivergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular system: smallest singular value {smallest:.3e} vs largest {largest:.3e}")]
    SingularSystem { smallest: f64, largest: f64 },

    #[error("test function is nonzero within {margin:.3e} of the boundary")]
    SupportViolation { margin: f64 },

    #[error("every candidate was dropped during orthonormalisation")]
    EmptyBasis,

    #[error("point {0} is not inside any grid cell")]
    NodeNotOnGrid(Complex64),

    #[error("wrong coefficients: {0}")]
    WrongCoefficients(String),

    #[error("conductivity is not proper: {0}")]
    NotProper(String),

    #[error("domain is not star-shaped with respect to the origin")]
    NotStarShaped,

    #[error("field has a nonzero vector part")]
    NotScalar,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
