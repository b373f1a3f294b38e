//! Quantum Cramér-Rao limits on measuring the temperature of a filtered
//! thermal source.
//!
//! The crate covers the whole chain from source physics to estimator
//! benchmarks:
//!
//! - [`physics`]: occupation numbers, the first-order correlation kernel,
//!   coherence time and temporal mode counting.
//! - [`modal`]: the Fourier-series mode set of an observation window, the
//!   exact modal covariance double integral and its `n0·rect·δ` asymptote,
//!   and a classical Gaussian-field synthesizer used as an independent check.
//! - [`gaussian_state`]: truncated Fock-space thermal states, phase-space
//!   descriptors and the Gaussian characteristic function.
//! - [`qcrb`]: symmetric logarithmic derivative, quantum Fisher information
//!   and the resulting sensitivity bounds, plus the closed-form competitor
//!   sensitivity curves.
//! - [`estimators`]: Monte Carlo photon counting, heterodyne radiometry and a
//!   two-detector intensity-correlation scheme, with bootstrap error bars.
//! - [`cli`]: the batch commands behind the `qcrb` binary.

pub mod cli;
pub mod eigen;
pub mod error;
pub mod estimators;
pub mod gaussian_state;
pub mod modal;
pub mod physics;
pub mod qcrb;
pub mod quadrature;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use physics::SourceSpec;
