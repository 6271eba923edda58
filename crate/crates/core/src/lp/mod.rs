//! Littlewood–Paley theory on the periodic grid.

pub mod bony;
pub mod bump;
pub mod dyadic;
pub mod harness;

pub use bony::{bony_decompose, BonyPieces};
pub use bump::{block_multiplier, chi, low_pass_multiplier, phi, psi, smooth_step};
pub use dyadic::{direction_magnitude, double_block, dyadic_block, dyadic_sobolev_norm, low_pass, q_max, Direction, DyadicLadder};
pub use harness::{
    check_bernstein, check_energy_lemma, check_product_law, energy_sweep, random_ring_scalar, random_scalar, BernsteinDirection,
    BernsteinReport, EnergyInputs, EnergyLemma, EnergyReport, EnergySweep, ProductLaw, ProductReport,
};
