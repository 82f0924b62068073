//! Spectral statistics of chaotic spectra with missing levels.
//!
//! - [`rmt`] samples GUE and GSE matrices and unfolds their spectra.
//! - [`qgraph`] builds quantum graphs, including the symplectic doubling
//!   with circulators, and solves their secular equation.
//! - [`spectra`] holds level sequences, unfolding, decimation and the
//!   estimators `P(n; s)`, `I(s)`, `Σ²(L)`, `Δ₃(L)`, `S(τ)`.
//! - [`theory`] evaluates the matching curves for complete and incomplete
//!   spectra and fits the observed fraction `Φ`.
//! - [`cli`] drives everything from the command line.

pub mod cli;
pub mod error;
pub mod qgraph;
mod quad;
pub mod rmt;
mod special;
pub mod spectra;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use rmt::{RandomMatrixSpec, Sampler, SpacingFit};
pub use spectra::{CurveWithErrors, LevelSequence, SpectralEnsemble, Unit};
pub use theory::EnsembleClass;

/// Quadrature used internally, exposed for independent checks.
pub mod numerics {
    pub use crate::quad::{integrate, integrate_panels};
    pub use crate::special::{sinc, sine_integral};
}
