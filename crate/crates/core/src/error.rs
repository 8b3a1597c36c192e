use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("mass mismatch: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("tolerance {0} not achievable")]
    Tolerance(f64),
    #[error("dispersion curve does not cover t = {0}")]
    CurveCoverage(f64),
    #[error("non-finite value at t = {t}")]
    NonFinite { t: f64 },
    #[error("boundary mass {ratio:e} of total at t = {t}")]
    BoundaryMass { t: f64, ratio: f64 },
    #[error("resampling would alias: {0}")]
    Aliasing(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
