use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unknown source profile `{0}`")]
    UnknownProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resonant forcing: omega = {omega} is within {tolerance:e} of mode {mode} (k*pi)")]
    Resonance { omega: f64, mode: usize, tolerance: f64 },

    #[error("{n_modes} modes requested on a grid with {nx} cells (aliasing)")]
    Aliasing { n_modes: usize, nx: usize },

    #[error("index {index} out of range 0..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("state mismatch: {0}")]
    StateMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual });
    }
    Ok(())
}
