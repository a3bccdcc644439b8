use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid resolution {0}: the number of modes must be a power of two and at least 2")]
    InvalidResolution(usize),

    #[error("grid mismatch: {left} modes vs {right} modes")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite coefficient at wavenumber {wavenumber}")]
    NonFiniteCoefficient { wavenumber: i64 },

    #[error("unsupported regularity gamma = {0}: expected 0 < gamma <= 2")]
    UnsupportedRegularity(f64),

    #[error("infeasible step: tau * N = {product} exceeds 1 (tau = {tau}, N = {cutoff})")]
    InfeasibleStep { tau: f64, cutoff: usize, product: f64 },

    #[error("cutoff N = {cutoff} exceeds M/8 = {limit} for a grid of {modes} modes")]
    UnderResolved { cutoff: usize, limit: usize, modes: usize },

    #[error("wavenumber {wavenumber} is out of band for a grid of {modes} modes")]
    OutOfBand { wavenumber: i64, modes: usize },

    #[error("non-finite field after step {step} (t = {time})")]
    NonFinite { step: usize, time: f64 },

    #[error(
        "unreliable reference: cross-check disagreement {disagreement:e} exceeds {threshold:e}"
    )]
    UnreliableReference { disagreement: f64, threshold: f64 },

    #[error("insufficient data for a slope fit: {usable} usable rows, need at least 4")]
    InsufficientData { usable: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("snapshot line {line}: {message}")]
    Snapshot { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
