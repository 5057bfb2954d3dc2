//! Simulation and verification laboratory for the almost-sure behavior of
//! the periodogram of stationary sequences.
//!
//! The crate generates stationary processes (linear filters and their
//! functionals, autoregressive Lipschitz models, intermittent-map Markov
//! chains, independent Metropolis–Hastings chains), computes finite Fourier
//! transforms and periodograms in batch, streaming and fast-grid form,
//! tracks the law-of-the-iterated-logarithm statistic
//! `I_n(t) / ln ln n` against the spectral density, and evaluates the
//! projective / series conditions that govern when the LIL holds.
//!
//! Modules:
//!
//! - [`core`]: frequencies, checkpoint schedules, LIL normalizers and
//!   deterministic seed-stream derivation.
//! - [`processes`]: seeded generators for every supported process family.
//! - [`transform`]: finite Fourier transform `S_n(t)`, periodogram
//!   `I_n(t) = |S_n(t)|^2 / (2 pi n)` and the LIL checkpoint tracker.
//! - [`spectral`]: analytic linear densities, Fejér reconstruction from
//!   autocovariances, smoothed-periodogram estimation and `sigma_t^2`.
//! - [`diagnostics`]: series-condition checkers, the martingale
//!   decomposition `S_n = M_n + R_n`, transfer-operator machinery for
//!   intermittent maps, alpha-dependence coefficients and appendix-level
//!   checks.
//! - [`config`] / [`runner`]: the experiment configuration format and the
//!   reproducible batch runner behind the `periodolil` binary.

pub mod config;
pub mod core;
pub mod diagnostics;
pub mod error;
pub mod processes;
pub mod runner;
pub mod spectral;
pub mod transform;

pub use error::{Error, Result};
