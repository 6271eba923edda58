//! Time integration of the rotating MHD system.
//!
//! The stiff linear part `𝔹` (Coriolis, `∂₃` coupling, horizontal
//! dissipation) is propagated exactly mode by mode; only the dealiased
//! quadratic terms go through the Runge–Kutta stages.

pub mod config;
pub mod diagnostics;
pub mod rhs;
pub mod run;
pub mod stepper;

pub use config::{DealiasRule, Integrator, RunMode, SolverConfig};
pub use diagnostics::{vertical_block_energies, BlockTracker, DiagnosticsRecord};
pub use rhs::{dissipation_rate, full_rhs, linear_rhs, nonlinear_rhs};
pub use run::{cfl_number, run, twin_run_divergence, RunResult, RunStatus, TwinReport, TwinSample};
pub use stepper::{StepOutput, Stepper};
