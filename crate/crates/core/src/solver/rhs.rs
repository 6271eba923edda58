//! Tendencies of the nonlinear system.

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{SpectralField, StateVector, C64};
use crate::linear::{assemble_symbol, ModelParams};
use crate::ops::{grad_h_norm_sq, project_leray_in_place, quadratic_tensors, sym_slot, ANTI_PAIRS};

const I: C64 = C64::new(0.0, 1.0);

/// Quadratic part of the tendency in divergence form:
///
/// `∂_t u ∋ −P div(u⊗u − b⊗b)`, `∂_t b ∋ −div(b⊗u − u⊗b)`.
///
/// Products are pseudo-spectral and 2/3-dealiased, so on dealiased
/// divergence-free input both energy cancellations hold exactly on the
/// retained modes.
pub fn nonlinear_rhs(fft: &Fft3, s: &StateVector) -> Result<StateVector> {
    let g = *fft.grid();
    let q = quadratic_tensors(fft, s)?;
    let mut nu = SpectralField::zeros(&g);
    let mut nb = SpectralField::zeros(&g);
    // G_ij = u_i b_j − b_i u_j; the b tendency is Σ_j iξ_j G_ij
    let anti = |i: usize, j: usize, idx: usize| -> C64 {
        if i == j {
            return C64::new(0.0, 0.0);
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        let k = ANTI_PAIRS.iter().position(|&p| p == (a, b)).unwrap();
        q.g[k][idx] * sign
    };
    for idx in 0..g.len() {
        if !g.is_retained(idx) {
            continue;
        }
        let xi = g.xi_op(idx);
        for i in 0..3 {
            let mut au = C64::new(0.0, 0.0);
            let mut ab = C64::new(0.0, 0.0);
            for (j, &x) in xi.iter().enumerate() {
                au -= I * x * q.s[sym_slot(i, j)][idx];
                ab += I * x * anti(i, j, idx);
            }
            nu.c[i][idx] = au;
            nb.c[i][idx] = ab;
        }
    }
    project_leray_in_place(&mut nu);
    project_leray_in_place(&mut nb);
    let out = StateVector { u: nu, b: nb };
    if !out.is_finite() {
        return Err(Error::BlowUp {
            t: f64::NAN,
            reason: "non-finite nonlinear tendency".into(),
        });
    }
    Ok(out)
}

/// `𝔹(D)U`, mode by mode.
pub fn linear_rhs(s: &StateVector, p: &ModelParams) -> Result<StateVector> {
    let g = *s.grid();
    let mut out = StateVector::zeros(&g);
    for idx in 1..g.len() {
        let xi = g.xi_op(idx);
        if xi == [0.0; 3] {
            continue;
        }
        let m = assemble_symbol(xi, p)?;
        let v = s.mode6(idx);
        let mut w = [C64::new(0.0, 0.0); 6];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = (0..6).map(|j| m[(i, j)] * v[j]).sum();
        }
        out.set_mode6(idx, &w);
    }
    Ok(out)
}

/// Full tendency `𝔹U + N(U)`.
pub fn full_rhs(fft: &Fft3, s: &StateVector, p: &ModelParams) -> Result<StateVector> {
    Ok(linear_rhs(s, p)?.add(&nonlinear_rhs(fft, s)?))
}

/// Energy dissipation rate `ν‖∇_h u‖² + ν′‖∇_h b‖²`.
pub fn dissipation_rate(s: &StateVector, p: &ModelParams) -> f64 {
    p.nu * grad_h_norm_sq(&s.u) + p.nu_b * grad_h_norm_sq(&s.b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::init::random_state;

    #[test]
    fn energy_identities() {
        let g = Grid::new(16, 16, 5.0, 7.0).unwrap();
        let fft = Fft3::new(&g);
        let mut s = random_state(&g, 9, 0.8, false, 5).unwrap();
        s.dealias();
        let n = nonlinear_rhs(&fft, &s).unwrap();
        let scale = s.norm_l2().powi(3) / g.volume().sqrt();
        assert!(n.inner(&s).abs() < 1e-10 * scale.max(n.norm_l2() * s.norm_l2()));
        let p = ModelParams::scaled(0.1, 0.5).unwrap();
        let f = full_rhs(&fft, &s, &p).unwrap();
        let want = -dissipation_rate(&s, &p);
        assert!((f.inner(&s) - want).abs() < 1e-9 * want.abs(), "{} vs {want}", f.inner(&s));
    }
}
