//! Numerical laboratory for the microscopic eigenvalue statistics of randomly
//! perturbed nonselfadjoint semiclassical operators in one dimension, and for
//! the zero processes of Gaussian analytic functions that describe their
//! limits.
//!
//! Modules, bottom-up:
//! - [`symbols`]: classical symbols, energy shells, Poisson brackets, phase-space volumes.
//! - [`operators`]: matrix discretizations and random perturbations.
//! - [`eigensolver`]: dense complex nonsymmetric eigenvalues.
//! - [`gaf`]: Gaussian analytic functions and their zero sets.
//! - [`limits`]: closed-form limiting densities and correlation functions.
//! - [`pointprocess`]: rescaled spectra and empirical statistics.

pub mod eigensolver;
pub mod error;
pub mod gaf;
pub mod limits;
pub mod matching;
pub mod matrix;
pub mod operators;
pub mod pointprocess;
pub mod rng;
pub mod symbols;

pub use error::{Error, Result};
pub use matrix::{CMatrix, C64};
