// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("site index {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("coupling array `{name}` has length {got}, expected {expected}")]
    CouplingLength {
        name: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("operator is not Hermitian (max |A - A†| = {0:e})")]
    NotHermitian(f64),

    #[error("matrix dimension {0} is not a power of two")]
    BadDimension(usize),

    #[error("state is not normalized (norm = {0})")]
    Unnormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "periodic stepper not converged: |Δψ| = {diff:e} at step {step} (tolerance {tolerance:e})"
    )]
    NotConverged {
        step: f64,
        diff: f64,
        tolerance: f64,
    },

    #[error("realization {realization}: maximum capability vanishes after {attempts} attempts")]
    VanishingCapability { realization: u64, attempts: u32 },

    #[error("records do not share a common time grid")]
    GridMismatch,

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
