use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the toolkit can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cut-off {0} rad/sample is outside (0, pi]")]
    BadCutoff(f64),

    #[error("matrix is not symmetric (entry ({row}, {col}) differs by {diff:e})")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("ill-conditioned design: {0}")]
    IllConditioned(String),

    #[error("pole on the unit circle at omega = {omega}")]
    PoleOnGridPoint { omega: f64 },

    #[error("pole on the unit circle (|p| = {magnitude})")]
    PoleOnUnitCircle { magnitude: f64 },

    #[error("half-order {requested} exceeds the supported maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },

    #[error("transfer function vanishes at dc")]
    ZeroAtDc,

    #[error("constellation needs at least 2 symbols, got {0}")]
    BadSymbolCount(usize),

    #[error("symbol {symbol} at position {position} is outside [0, {count})")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        count: usize,
    },

    #[error("sub-channels {a} and {b} overlap: |<h_a, h_b>| = {value:e} exceeds {limit:e}")]
    OrthogonalityFailure {
        a: isize,
        b: isize,
        value: f64,
        limit: f64,
    },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("bad block shape: {0}")]
    BadBlockShape(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
