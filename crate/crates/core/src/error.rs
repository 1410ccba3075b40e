use std::path::PathBuf;

/// Errors raised across the simulation and analysis pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is incomplete or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violates a structural requirement (e.g. ordering).
    #[error("data error: {0}")]
    Data(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// No statistically significant cross-correlation peak was found.
    #[error("no correlation: peak {peak} counts vs background {background:.2} ± {sigma:.2}")]
    NoCorrelation { peak: u64, background: f64, sigma: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("fit error: {0}")]
    Fit(String),

    /// A required signal speed is unbounded (non-positive time separation).
    #[error("unbounded signal speed: Δx = {distance_m} m with Δt = {dt_s} s")]
    UnboundedSpeed { distance_m: f64, dt_s: f64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
