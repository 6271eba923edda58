//! Dispersive phases `Γ_A = A(|ξ|)ξ₃`, `Γ_B = B(|ξ|)ξ₃` and their `ξ₂`
//! derivatives `γ = −∂_{ξ₂}Γ`, `∂_{ξ₂}γ`.

use serde::{Deserialize, Serialize};

use crate::linear::symbol::{dispersion_b_stable, dispersion_factors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    A,
    B,
}

/// `Plus` selects `K_+` (phase `e^{−iθΓ}`), `Minus` selects `K_−`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Coefficient `σ` in `e^{iσθΓ}`.
    pub fn phase_factor(self) -> f64 {
        match self {
            Sign::Plus => -1.0,
            Sign::Minus => 1.0,
        }
    }
}

#[inline]
fn modulus(xi: [f64; 3]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
}

/// `A(k)` or `B(k)`.
#[inline]
pub fn factor(branch: Branch, k: f64) -> f64 {
    match branch {
        Branch::A => dispersion_factors(k).0,
        Branch::B => dispersion_b_stable(k),
    }
}

/// `dA/dk = −(1 + 1/q)/(2k²)`, `dB/dk = (1 − 1/q)/(2k²)` with `q = √(4k²+1)`.
#[inline]
pub fn factor_derivative(branch: Branch, k: f64) -> f64 {
    let q = (4.0 * k * k + 1.0).sqrt();
    match branch {
        Branch::A => -(1.0 + 1.0 / q) / (2.0 * k * k),
        // 1 − 1/q = 4k²/(q(q+1))
        Branch::B => 2.0 / (q * (q + 1.0)),
    }
}

pub fn phase(branch: Branch, xi: [f64; 3]) -> f64 {
    factor(branch, modulus(xi)) * xi[2]
}

/// `Γ` as a function of `ρ = |ξ_h|` and `ξ₃`.
#[inline]
pub fn phase_radial(branch: Branch, rho: f64, xi3: f64) -> f64 {
    factor(branch, rho.hypot(xi3)) * xi3
}

/// `∂_ρ Γ(ρ, ξ₃)`.
#[inline]
pub fn phase_radial_rate(branch: Branch, rho: f64, xi3: f64) -> f64 {
    let k = rho.hypot(xi3);
    factor_derivative(branch, k) * rho / k * xi3
}

/// `γ/ξ₂ = ξ₃(1 ± q)/(2k³q)`, finite at `ξ₂ = 0`.
fn gamma_over_xi2(branch: Branch, xi: [f64; 3]) -> f64 {
    let k = modulus(xi);
    let q = (4.0 * k * k + 1.0).sqrt();
    let num = match branch {
        Branch::A => 1.0 + q,
        Branch::B => -4.0 * k * k / (1.0 + q),
    };
    xi[2] * num / (2.0 * k.powi(3) * q)
}

/// `γ = −∂_{ξ₂}Γ`.
pub fn gamma(branch: Branch, xi: [f64; 3]) -> f64 {
    xi[1] * gamma_over_xi2(branch, xi)
}

/// `∂_{ξ₂}γ`.
pub fn gamma_derivative(branch: Branch, xi: [f64; 3]) -> f64 {
    let k = modulus(xi);
    let k2 = k * k;
    let q = (4.0 * k2 + 1.0).sqrt();
    let k5 = k2 * k2 * k;
    let tail = 3.0 / (2.0 * k5);
    let tail = match branch {
        Branch::A => tail,
        Branch::B => -tail,
    };
    gamma_over_xi2(branch, xi) - xi[1] * xi[1] * xi[2] * ((16.0 * k2 + 3.0) / (2.0 * k5 * q.powi(3)) + tail)
}

/// Smallest constants making the `γ` bounds hold on a sample:
/// `C⁻¹R^{−3−β}|ξ₂| ≤ |γ| ≤ C R^β` and `|∂_{ξ₂}γ| ≤ C R^{2β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaBounds {
    pub c_lower: f64,
    pub c_upper: f64,
    pub c_derivative: f64,
    pub samples: usize,
}

impl GammaBounds {
    pub fn c_beta(&self) -> f64 {
        self.c_lower.max(self.c_upper).max(self.c_derivative)
    }
}

pub fn empirical_gamma_bounds(branch: Branch, big_r: f64, beta: f64, points: &[[f64; 3]]) -> GammaBounds {
    let mut b = GammaBounds {
        c_lower: 0.0,
        c_upper: 0.0,
        c_derivative: 0.0,
        samples: points.len(),
    };
    for &xi in points {
        let g = gamma(branch, xi).abs();
        b.c_upper = b.c_upper.max(g / big_r.powf(beta));
        if xi[1] != 0.0 {
            b.c_lower = b.c_lower.max(big_r.powf(-3.0 - beta) * xi[1].abs() / g);
        }
        b.c_derivative = b.c_derivative.max(gamma_derivative(branch, xi).abs() / big_r.powf(2.0 * beta));
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phases_multiply_to_xi3_squared() {
        for xi in [[0.3, -0.2, 0.9], [2.0, 1.0, -0.4], [0.01, 0.0, 0.02]] {
            let p = phase(Branch::A, xi) * phase(Branch::B, xi);
            assert!((p - xi[2] * xi[2]).abs() < 1e-13 * xi[2] * xi[2]);
        }
    }

    #[test]
    fn radial_rate_matches_difference() {
        for br in [Branch::A, Branch::B] {
            let (rho, x3, h) = (0.7, 0.4, 1e-6);
            let fd = (phase_radial(br, rho + h, x3) - phase_radial(br, rho - h, x3)) / (2.0 * h);
            assert!((fd - phase_radial_rate(br, rho, x3)).abs() < 1e-8);
        }
    }
}
