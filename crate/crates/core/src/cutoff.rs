//! Frequency cutoff `Ψ`, the split `U₀ = Ū₀ + Ũ₀` and the `(ε, α) ↦ (r, R)`
//! schedule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::StateVector;
use crate::grid::Grid;
use crate::lp::bump::chi;
use crate::norms::{h0s_state, y_norm_state};

/// `Ψ(ξ) = χ(|ξ|/R)[1 − χ(2|ξ_h|/r)][1 − χ(2|ξ₃|/r)]`: 1 on
/// `{r ≤ |ξ_h|, r ≤ |ξ₃|, |ξ| ≤ R}` and 0 off `{r/2 ≤ |ξ_h|, r/2 ≤ |ξ₃|, |ξ| ≤ 2R}`.
#[inline]
pub fn psi_cutoff(xi: [f64; 3], r: f64, big_r: f64) -> f64 {
    let h = xi[0].hypot(xi[1]);
    let v = xi[2].abs();
    let n = (h * h + v * v).sqrt();
    chi(n / big_r) * (1.0 - chi(2.0 * h / r)) * (1.0 - chi(2.0 * v / r))
}

/// Whether `ξ ∈ 𝒞_{r,R}`.
pub fn in_truncation_set(xi: [f64; 3], r: f64, big_r: f64) -> bool {
    let h = xi[0].hypot(xi[1]);
    let v = xi[2].abs();
    h >= r && v >= r && (h * h + v * v).sqrt() <= big_r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffParams {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub beta: f64,
    pub eta: f64,
    pub s: f64,
    pub eps: f64,
    pub alpha: f64,
    /// The product `8CC₀` used by the schedule.
    pub c_product: f64,
    pub alpha0: f64,
    /// `α ≤ α₀`.
    pub alpha_admissible: bool,
    /// `1/4 − α(3/4 + (7+8β+s)/(βη)) > 0`.
    pub condition_low: bool,
    /// `1/4 − α(7/4 + (11+13β+2s)/(βη)) > 0`.
    pub condition_high: bool,
}

/// `α₀ = βη / (11βη + 44 + 52β + 8s)`.
pub fn alpha0(beta: f64, eta: f64, s: f64) -> f64 {
    beta * eta / (11.0 * beta * eta + 44.0 + 52.0 * beta + 8.0 * s)
}

/// The two exponents of `ε` that must stay positive.
pub fn schedule_exponents(alpha: f64, beta: f64, eta: f64, s: f64) -> (f64, f64) {
    let be = beta * eta;
    (
        0.25 - alpha * (0.75 + (7.0 + 8.0 * beta + s) / be),
        0.25 - alpha * (1.75 + (11.0 + 13.0 * beta + 2.0 * s) / be),
    )
}

impl CutoffParams {
    /// Explicit radii, outside the schedule.
    pub fn fixed(r: f64, big_r: f64) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(Error::Parameter(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
        }
        Ok(Self {
            r,
            big_r,
            beta: (1.0 / r).ln() / big_r.ln(),
            eta: f64::NAN,
            s: f64::NAN,
            eps: f64::NAN,
            alpha: f64::NAN,
            c_product: f64::NAN,
            alpha0: f64::NAN,
            alpha_admissible: false,
            condition_low: false,
            condition_high: false,
        })
    }

    pub fn psi(&self, xi: [f64; 3]) -> f64 {
        psi_cutoff(xi, self.r, self.big_r)
    }

    /// The transition annulus `r/2 ≤ |ξ_dir| ≤ r` must hold several grid
    /// frequencies: `2π/box ≤ r/4` on both axes.
    pub fn check_resolution(&self, grid: &Grid) -> Result<()> {
        for axis in [0, 2] {
            let dk = grid.frequency_step(axis);
            if dk > self.r / 4.0 {
                return Err(Error::Config(format!(
                    "frequency step {dk:.4} exceeds r/4 = {:.4}; enlarge the box",
                    self.r / 4.0
                )));
            }
        }
        Ok(())
    }
}

/// `R = (8CC₀)^{1/(βη)} ε^{−α/(βη)}`, `r = R^{−β}`.
pub fn schedule_parameters(eps: f64, alpha: f64, beta: f64, eta: f64, s: f64, c_product: f64) -> Result<CutoffParams> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Parameter(format!("ε must lie in (0, 1), got {eps}")));
    }
    if !(beta >= 1.0) {
        return Err(Error::Parameter(format!("β must be ≥ 1, got {beta}")));
    }
    if !(eta > 0.0) {
        return Err(Error::Parameter(format!("η must be positive, got {eta}")));
    }
    if !(s > 0.5) {
        return Err(Error::Parameter(format!("s must exceed 1/2, got {s}")));
    }
    if !(alpha > 0.0) || !(c_product > 0.0) {
        return Err(Error::Parameter(format!("α and 8CC₀ must be positive, got {alpha}, {c_product}")));
    }
    let be = beta * eta;
    let big_r = c_product.powf(1.0 / be) * eps.powf(-alpha / be);
    let r = big_r.powf(-beta);
    if !(r < big_r) {
        return Err(Error::Parameter(format!(
            "schedule gives R = {big_r} ≤ 1, so r = R^(−β) is not below R; decrease ε or raise 8CC₀"
        )));
    }
    let a0 = alpha0(beta, eta, s);
    let (e1, e2) = schedule_exponents(alpha, beta, eta, s);
    Ok(CutoffParams {
        r,
        big_r,
        beta,
        eta,
        s,
        eps,
        alpha,
        c_product,
        alpha0: a0,
        alpha_admissible: alpha <= a0,
        condition_low: e1 > 0.0,
        condition_high: e2 > 0.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    /// `‖Ũ₀‖_{H^{0,s}}`
    pub remainder_h0s: f64,
    /// `‖U₀‖_{Y_{s,η}}`
    pub y_norm: f64,
    /// `R^{−βη}`
    pub decay: f64,
    /// `‖Ũ₀‖_{H^{0,s}} / (‖U₀‖_Y R^{−βη})`
    pub empirical_cbar: f64,
}

/// `(Ū₀, Ũ₀) = (Ψ(D)U₀, U₀ − Ψ(D)U₀)`.
pub fn split_initial_data(u0: &StateVector, c: &CutoffParams) -> (StateVector, StateVector) {
    let g = *u0.grid();
    let bar = u0.apply_multiplier(|idx| c.psi(g.xi(idx)));
    let tilde = u0.sub(&bar);
    (bar, tilde)
}

/// Size of the remainder against the bound `C̄ ‖U₀‖_Y R^{−βη}`; `s` and `η`
/// are taken from `c`, which must come from the schedule.
pub fn split_report(u0: &StateVector, tilde: &StateVector, c: &CutoffParams) -> SplitReport {
    let remainder_h0s = h0s_state(tilde, c.s);
    let y = y_norm_state(u0, c.s, c.eta);
    let decay = c.big_r.powf(-c.beta * c.eta);
    SplitReport {
        remainder_h0s,
        y_norm: y,
        decay,
        empirical_cbar: remainder_h0s / (y * decay),
    }
}
