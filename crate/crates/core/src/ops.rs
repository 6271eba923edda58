//! Differential operators, Leray projection, pressure and dealiased products.
//!
//! Multipliers that are odd in `ξ` use [`Grid::xi_op`] so that Hermitian
//! symmetry survives on the Nyquist planes.

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{PhysicalField, SpectralField, SpectralScalar, StateVector, C64};
use crate::grid::Grid;

const I: C64 = C64::new(0.0, 1.0);

/// Divergence-free tolerance applied to inputs of operations that require it.
pub const DIV_FREE_TOL: f64 = 1e-10;

#[inline]
fn norm2(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

/// Mode-wise `û ← û − ξ(ξ·û)/|ξ|²`. The zero mode is left untouched.
pub fn project_leray(v: &SpectralField) -> SpectralField {
    let mut out = v.clone();
    project_leray_in_place(&mut out);
    out
}

pub fn project_leray_in_place(v: &mut SpectralField) {
    let g = v.grid;
    for idx in 0..g.len() {
        let xi = g.xi_op(idx);
        let k2 = norm2(xi);
        if k2 == 0.0 {
            continue;
        }
        let m = v.mode(idx);
        let d = (m[0] * xi[0] + m[1] * xi[1] + m[2] * xi[2]) / k2;
        v.set_mode(idx, [m[0] - d * xi[0], m[1] - d * xi[1], m[2] - d * xi[2]]);
    }
}

pub fn project_leray_state(u: &StateVector) -> StateVector {
    StateVector {
        u: project_leray(&u.u),
        b: project_leray(&u.b),
    }
}

/// `∂_axis` of a vector field.
pub fn partial(v: &SpectralField, axis: usize) -> SpectralField {
    let g = v.grid;
    let mut out = v.clone();
    for comp in &mut out.c {
        for (idx, x) in comp.iter_mut().enumerate() {
            *x *= I * g.xi_op(idx)[axis];
        }
    }
    out
}

pub fn divergence(v: &SpectralField) -> SpectralScalar {
    let g = v.grid;
    let mut out = SpectralScalar::zeros(&g);
    for idx in 0..g.len() {
        let xi = g.xi_op(idx);
        let m = v.mode(idx);
        out.c[idx] = I * (m[0] * xi[0] + m[1] * xi[1] + m[2] * xi[2]);
    }
    out
}

pub fn gradient(p: &SpectralScalar) -> SpectralField {
    let g = p.grid;
    let mut out = SpectralField::zeros(&g);
    for idx in 0..g.len() {
        let xi = g.xi_op(idx);
        let c = I * p.c[idx];
        out.set_mode(idx, [c * xi[0], c * xi[1], c * xi[2]]);
    }
    out
}

/// `u ∧ e₃ = (u₂, −u₁, 0)`.
pub fn wedge_e3(v: &SpectralField) -> SpectralField {
    let mut out = SpectralField::zeros(&v.grid);
    out.c[0] = v.c[1].clone();
    out.c[1] = v.c[0].iter().map(|x| -x).collect();
    out
}

/// `‖∇_h v‖²_{L²}`.
pub fn grad_h_norm_sq(v: &SpectralField) -> f64 {
    let g = v.grid;
    let mut s = 0.0;
    for idx in 0..g.len() {
        let xi = g.xi(idx);
        let w = xi[0] * xi[0] + xi[1] * xi[1];
        if w == 0.0 {
            continue;
        }
        s += w * v.mode(idx).iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    g.parseval_factor() * s
}

pub fn grad_h_norm_sq_state(u: &StateVector) -> f64 {
    grad_h_norm_sq(&u.u) + grad_h_norm_sq(&u.b)
}

/// Quadratic tensors of a state, transformed and dealiased.
///
/// `s` holds the symmetric `S_ij = u_i u_j − b_i b_j` in the order
/// `(00, 01, 02, 11, 12, 22)`; `g` holds the antisymmetric
/// `G_ij = u_i b_j − b_i u_j` in the order `(01, 02, 12)`.
#[derive(Debug, Clone)]
pub struct QuadraticTensors {
    pub s: [Vec<C64>; 6],
    pub g: [Vec<C64>; 3],
}

pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
pub const ANTI_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[inline]
pub fn sym_slot(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Physical samples of `u` and `b`.
pub fn to_physical(fft: &Fft3, s: &StateVector) -> Result<(PhysicalField, PhysicalField)> {
    let v = fft.inverse_many(&[
        &s.u.c[0], &s.u.c[1], &s.u.c[2], &s.b.c[0], &s.b.c[1], &s.b.c[2],
    ])?;
    let mut it = v.into_iter();
    let mut next = || it.next().unwrap();
    let u = PhysicalField::from_components(fft.grid(), [next(), next(), next()])?;
    let b = PhysicalField::from_components(fft.grid(), [next(), next(), next()])?;
    Ok((u, b))
}

pub fn quadratic_tensors(fft: &Fft3, s: &StateVector) -> Result<QuadraticTensors> {
    let (u, b) = to_physical(fft, s)?;
    let n = fft.grid().len();
    let mut arrays: Vec<Vec<f64>> = Vec::with_capacity(9);
    for &(i, j) in &SYM_PAIRS {
        arrays.push((0..n).map(|k| u.v[i][k] * u.v[j][k] - b.v[i][k] * b.v[j][k]).collect());
    }
    for &(i, j) in &ANTI_PAIRS {
        arrays.push((0..n).map(|k| u.v[i][k] * b.v[j][k] - b.v[i][k] * u.v[j][k]).collect());
    }
    let refs: Vec<&[f64]> = arrays.iter().map(|a| a.as_slice()).collect();
    let mut spec = fft.forward_many(&refs)?;
    let g = fft.grid();
    for a in &mut spec {
        dealias_vec(g, a);
    }
    let mut it = spec.into_iter();
    let mut next = || it.next().unwrap();
    Ok(QuadraticTensors {
        s: [next(), next(), next(), next(), next(), next()],
        g: [next(), next(), next()],
    })
}

pub fn dealias_vec(g: &Grid, a: &mut [C64]) {
    for (idx, x) in a.iter_mut().enumerate() {
        if !g.is_retained(idx) {
            *x = C64::new(0.0, 0.0);
        }
    }
}

/// Dealiased pseudo-spectral product of two real scalar fields.
pub fn product(fft: &Fft3, a: &[C64], b: &[C64]) -> Result<Vec<C64>> {
    let (pa, pb) = fft.inverse_pair(a, b)?;
    let prod: Vec<f64> = pa.iter().zip(&pb).map(|(x, y)| x * y).collect();
    let mut out = fft.forward_scalar(&prod)?.c;
    dealias_vec(fft.grid(), &mut out);
    Ok(out)
}

/// Dealiased `(u·∇)v` in non-divergence form.
pub fn advect(fft: &Fft3, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    let g = fft.grid();
    let up = fft.inverse(u)?;
    let n = g.len();
    let mut acc = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    for j in 0..3 {
        let dv = fft.inverse(&partial(v, j))?;
        for i in 0..3 {
            for k in 0..n {
                acc[i][k] += up.v[j][k] * dv.v[i][k];
            }
        }
    }
    let mut out = fft.forward(&PhysicalField::from_components(g, acc)?)?;
    out.dealias();
    Ok(out)
}

/// Pressure of the rotating MHD system at Rossby number `eps`:
///
/// `p̂ = |ξ|⁻² [ −Σ ξ_i ξ_j (u_i u_j − b_i b_j)^ + (i/ε)(ξ₂û₁ − ξ₁û₂) ]`,
///
/// so that `∇p` is exactly the gradient part of
/// `−div(u⊗u − b⊗b) + (u∧e₃)/ε`. Mode zero is set to zero.
pub fn pressure_from_state(fft: &Fft3, s: &StateVector, eps: f64) -> Result<SpectralScalar> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    let d = s.u.divergence_defect().max(s.b.divergence_defect());
    if d > DIV_FREE_TOL {
        return Err(Error::InvariantViolation(format!(
            "pressure needs divergence-free input (defect {d:e})"
        )));
    }
    let q = quadratic_tensors(fft, s)?;
    let g = *fft.grid();
    let mut p = SpectralScalar::zeros(&g);
    for idx in 0..g.len() {
        let xi = g.xi_op(idx);
        let k2 = norm2(xi);
        if k2 == 0.0 {
            continue;
        }
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                acc -= xi[i] * xi[j] * q.s[sym_slot(i, j)][idx];
            }
        }
        let u = s.u.mode(idx);
        acc += I * (xi[1] * u[0] - xi[0] * u[1]) / eps;
        p.c[idx] = acc / k2;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::random_state;

    #[test]
    fn leray_kills_gradients_and_is_idempotent() {
        let g = Grid::new(8, 8, 3.0, 5.0).unwrap();
        let s = random_state(&g, 5, 1.0, false, 3).unwrap();
        let mut v = s.u.clone();
        // add a gradient
        let mut phi = SpectralScalar::zeros(&g);
        phi.c[g.mode_index([1, 2, -1]).unwrap()] = C64::new(1.0, 0.5);
        phi.c[g.mode_index([-1, -2, 1]).unwrap()] = C64::new(1.0, -0.5);
        let grad = gradient(&phi);
        assert!(project_leray(&grad).max_abs_coeff() < 1e-14);
        v.axpy(1.0, &grad);
        let p = project_leray(&v);
        assert!(p.sub(&s.u).norm_l2() < 1e-12 * s.u.norm_l2());
        assert!(project_leray(&p).sub(&p).norm_l2() < 1e-12 * p.norm_l2());
    }
}
