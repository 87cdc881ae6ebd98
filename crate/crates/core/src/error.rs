use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spheroid: c = {c} must exceed the focal distance {focal}")]
    InvalidSpheroid { c: f64, focal: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point is not a stationary point of the broken path (tangential residual {0:.3e})")]
    NonStationary(f64),

    #[error("shift s = {s} outside the admissible range [0, {max})")]
    ShiftOutOfRange { s: f64, max: f64 },

    #[error("segment between the source and receiver centres meets the obstacle")]
    Shadow,

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("first reflector is a degenerate band ({0} clusters)")]
    DegenerateReflector(usize),

    #[error("non-positive curvature determinant {0:.3e}: spheroid and obstacle are not strictly separated at the reflection point")]
    DegenerateDeterminant(f64),

    #[error("shape-operator fit failed: {0}")]
    FitFailed(String),

    #[error("quadrature did not converge: achieved relative change {achieved:.3e}, wanted {wanted:.3e}")]
    Quadrature { achieved: f64, wanted: f64 },

    #[error("decay fit failed: {0}")]
    DecayFit(String),

    #[error("ill-conditioned system: {0}")]
    IllConditioned(String),

    #[error("simulation: {0}")]
    Simulation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
