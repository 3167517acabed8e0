use thiserror::Error;

/// Errors raised by the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("state not normalized: norm^2 = {0}")]
    Norm(f64),

    #[error("inverse mass {value:e} below floor {floor:e} at q = {q}")]
    MassFloor { q: f64, value: f64, floor: f64 },

    #[error("step error: energy drift {drift:e} in one step exceeds {limit:e}")]
    Step { drift: f64, limit: f64 },

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("unsupported order n = {0} (only n <= 2)")]
    Order(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
