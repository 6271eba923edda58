//! Continuum-frequency experiments on the dispersive part of the linear
//! flow: phase functions, the kernels `K^{A,B}_±`, their decay, and
//! Strichartz norms of the damped semigroup.
//!
//! Everything here is computed by quadrature in `ℝ³_ξ`, not on the torus.

pub mod kernel;
pub mod phase;
pub mod quad;
pub mod strichartz;

pub use kernel::{
    kernel, kernel_decay_fit, kernel_sup, kernel_tau_fit, kernel_tensor_adaptive, kernel_tensor_gl, DecayFit, KernelSpec, KernelValue,
    SupSample, SupSearch, TauFit, KERNEL_RTOL,
};
pub use phase::{empirical_gamma_bounds, gamma, gamma_derivative, phase, Branch, GammaBounds, Sign};
pub use strichartz::{
    predicted_eps_exponent, semigroup_strichartz_norm, strichartz_profile, strichartz_scaling_sweep, LpNorm, Profile, ScalingFit,
    ScalingPoint, ScalingSweep, SliceNorm, StrichartzConfig, TimeProfile,
};

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
