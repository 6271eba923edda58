//! Pseudo-spectral toolkit for the fast-rotating anisotropic MHD system
//! with vanishing horizontal viscosity.
//!
//! Module map:
//! - [`grid`], [`field`], [`fft`], [`ops`], [`norms`]: periodic spectral core.
//! - [`linear`]: the 6×6 symbol, its eigen-decomposition and exact propagator.
//! - [`lp`]: Littlewood–Paley blocks, Bony paraproducts, inequality harness.
//! - [`cutoff`]: the frequency cutoff `Ψ` and the parameter schedule.
//! - [`solver`]: integrating-factor time stepping and diagnostics.
//! - [`dispersion`]: phase functions, kernel quadrature, Strichartz norms.

pub mod cutoff;
pub mod dispersion;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod init;
pub mod linear;
pub mod lp;
pub mod norms;
pub mod ops;
pub mod solver;

pub use error::{Error, Result};
pub use fft::Fft3;
pub use field::{PhysicalField, SpectralField, SpectralScalar, StateVector, C64};
pub use grid::Grid;
