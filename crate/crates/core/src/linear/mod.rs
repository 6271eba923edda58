//! Linearized rotating MHD system: symbol, eigen-structure and propagator.

pub mod expm;
pub mod params;
pub mod propagator;
pub mod symbol;

pub use expm::expm_oracle;
pub use params::{ModelParams, SystemMode};
pub use propagator::{eigen_propagator, expm_propagator, mode_propagator, propagate_exact, PropagatorSet, Route};
pub use symbol::{
    assemble_symbol, char_poly_p, cramer_coefficients, cramer_matrix, det_d_closed_form, dispersion_factors,
    eigenvalues, eigenvectors, is_degenerate, Mat4, Mat6, ModeEigenSystem, Vec6,
};
