//! Spectral analysis of `Lu = u'' - q(x)u` on `(0,1)` with two-point boundary
//! conditions whose coefficients are arbitrary complex numbers.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod basis;
pub mod boundary;
pub mod config;
pub mod error;
pub mod extended;
pub mod fundsol;
pub mod ode;
pub mod potential;
pub mod quad;
pub mod roots;
pub mod spectrum;

pub use num_complex::Complex64;

pub use boundary::{BoundaryMatrix, CaseTag, Classification, Minors};
pub use config::SolverConfig;
pub use error::{Error, Result};
pub use fundsol::FundamentalSolution;
pub use potential::Potential;
pub use spectrum::{SpectralPoint, Spectrum};
