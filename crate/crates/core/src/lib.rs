//! Numerical tools for the free Dirac flow with unit mass.
//!
//! * [`spinor`]: Dirac matrices, the symbol `α·ξ + β` and its spectral projections.
//! * [`fourier`]: periodic spinor fields, the Dirac and half Klein–Gordon
//!   propagators, Sobolev norms.
//! * [`kernel`]: the kernel `K_γ` of `⟨D⟩^{-γ} e^{it⟨D⟩}` and its dyadic blocks.
//! * [`amalgam`]: Wiener amalgam norms, weak Lorentz norms, mixed space-time norms.
//! * [`experiments`]: admissibility checks, decay fits and Strichartz sweeps.

pub mod amalgam;
pub mod config;
pub mod experiments;
pub mod fourier;
pub mod kernel;
pub mod quadrature;
pub mod spinor;
pub mod stats;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("divergent quantity: {0}")]
    Divergent(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("field format: {0}")]
    Format(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
