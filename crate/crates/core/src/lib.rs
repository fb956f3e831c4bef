//! Spectral functions of spectral triples: direct summation, residue-driven
//! asymptotic expansions and matrix-scale checks.

pub mod accumulate;
pub mod asymptotics;
pub mod cutoffs;
pub mod error;
pub mod finite_triples;
pub mod io;
pub mod laurent;
pub mod oracles;
pub mod quadrature;
pub mod scalar;
pub mod series_engine;
pub mod special_fn;
pub mod spectra;
pub mod summation;

pub use error::{Result, SalError};
pub use scalar::Real;

/// Exact scalar used for Bernoulli numbers, expansion coefficients and fluctuation polynomials.
pub type Exact = num_rational::BigRational;
pub type Report32 = series_engine::TruncationReport<f32>;
pub type Report64 = series_engine::TruncationReport<f64>;
pub type ZetaReport64 = series_engine::TruncationReport<num_complex::Complex64>;
pub type Entry32 = spectra::SpectrumEntry<f32>;
pub type Entry64 = spectra::SpectrumEntry<f64>;

