use thiserror::Error;

/// Errors raised by the dynamical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outside the admissible region: {0}")]
    Domain(String),

    #[error("kepler solver did not converge (e = {e}, mean anomaly = {mean_anomaly})")]
    KeplerNonConvergence { e: f64, mean_anomaly: f64 },

    #[error("integration failed at t = {time}: {reason}")]
    Integration { time: f64, reason: String },

    #[error("degenerate section: {0}")]
    DegenerateSection(String),

    #[error("seed (g = {g}, G = {big_g}) is inadmissible: {reason}")]
    Inadmissible { g: f64, big_g: f64, reason: String },

    #[error("no return to the section within t = {t_max}")]
    NoReturn { t_max: f64 },

    #[error("iterate {index} failed: {source}")]
    Iterate {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("newton iteration failed: {0}")]
    Newton(String),

    #[error("fixed point is not hyperbolic")]
    NotHyperbolic,

    #[error("degenerate h-set: {0}")]
    DegenerateHSet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
