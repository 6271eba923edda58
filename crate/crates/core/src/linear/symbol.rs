//! The 6×6 Fourier symbol of the linear system and its closed-form
//! eigen-decomposition.
//!
//! Sign convention: the symbol encodes
//! `∂_t û = ν Δ_h û + P(û ∧ e₃)/ε − iμξ₃ b̂` (and the mirror coupling for
//! `b̂`), which is the convention under which the displayed eigenvectors
//! are eigenvectors.

use nalgebra::{SMatrix, SVector};

use crate::error::{Error, Result};
use crate::field::C64;
use crate::linear::params::ModelParams;

pub type Mat6 = SMatrix<C64, 6, 6>;
pub type Vec6 = SVector<C64, 6>;
pub type Mat4 = SMatrix<C64, 4, 4>;

const I: C64 = C64::new(0.0, 1.0);

#[inline]
fn norm2(xi: [f64; 3]) -> f64 {
    xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
}

fn require_nonzero(xi: [f64; 3]) -> Result<()> {
    if norm2(xi) == 0.0 {
        return Err(Error::DegenerateMode {
            xi,
            reason: "zero frequency: the symbol is the zero matrix, propagate by identity",
        });
    }
    Ok(())
}

fn require_scaled(p: &ModelParams) -> Result<()> {
    if !p.is_scaled() {
        return Err(Error::Parameter(
            "closed-form eigen-decomposition needs the scaled system (nu = nu' = eps^alpha, mu = 1/eps)".into(),
        ));
    }
    Ok(())
}

/// `det(D) = 0` exactly on `ξ₃ = 0` or `ξ₁ = ξ₃ = 0`.
pub fn is_degenerate(xi: [f64; 3]) -> bool {
    xi[2] == 0.0 || xi[0] * xi[0] + xi[2] * xi[2] == 0.0
}

pub fn assemble_symbol(xi: [f64; 3], p: &ModelParams) -> Result<Mat6> {
    require_nonzero(xi)?;
    let k2 = norm2(xi);
    let kh2 = xi[0] * xi[0] + xi[1] * xi[1];
    let c = p.inv_eps() / k2;
    let z = -I * p.mu * xi[2];
    let dv = -p.nu * kh2;
    let db = -p.nu_b * kh2;
    let r = |x: f64| C64::new(x, 0.0);
    let (x1, x2, x3) = (xi[0], xi[1], xi[2]);
    let mut m = Mat6::zeros();
    m[(0, 0)] = r(dv + x1 * x2 * c);
    m[(0, 1)] = r((x2 * x2 + x3 * x3) * c);
    m[(1, 0)] = r(-(x1 * x1 + x3 * x3) * c);
    m[(1, 1)] = r(dv - x1 * x2 * c);
    m[(2, 0)] = r(x2 * x3 * c);
    m[(2, 1)] = r(-x1 * x3 * c);
    m[(2, 2)] = r(dv);
    for k in 0..3 {
        m[(k, k + 3)] = z;
        m[(k + 3, k)] = z;
        m[(k + 3, k + 3)] = r(db);
    }
    Ok(m)
}

/// Dispersion factors `(A, B)` at `|ξ|`.
pub fn dispersion_factors(k: f64) -> (f64, f64) {
    let q = (4.0 * k * k + 1.0).sqrt();
    ((1.0 + q) / (2.0 * k), (q - 1.0) / (2.0 * k))
}

/// `B` evaluated without cancellation: `2|ξ| / (1 + √(4|ξ|²+1))`.
pub fn dispersion_b_stable(k: f64) -> f64 {
    2.0 * k / (1.0 + (4.0 * k * k + 1.0).sqrt())
}

pub fn eigenvalues(xi: [f64; 3], p: &ModelParams) -> Result<[C64; 6]> {
    require_nonzero(xi)?;
    require_scaled(p)?;
    let k = norm2(xi).sqrt();
    let (a, _) = dispersion_factors(k);
    let b = dispersion_b_stable(k);
    let re = -p.nu * (xi[0] * xi[0] + xi[1] * xi[1]);
    let w = xi[2] / p.eps;
    Ok([
        C64::new(re, w),
        C64::new(re, -w),
        C64::new(re, w * a),
        C64::new(re, -w * a),
        C64::new(re, w * b),
        C64::new(re, -w * b),
    ])
}

/// The unnormalized eigenvectors `W₁ … W₆` with the displayed components.
pub fn eigenvectors(xi: [f64; 3], p: &ModelParams) -> Result<[Vec6; 6]> {
    require_nonzero(xi)?;
    require_scaled(p)?;
    if is_degenerate(xi) {
        return Err(Error::DegenerateMode {
            xi,
            reason: "eigenvectors coincide here; use the matrix exponential",
        });
    }
    Ok(eigenvectors_unchecked(xi))
}

fn eigenvectors_unchecked(xi: [f64; 3]) -> [Vec6; 6] {
    let k = norm2(xi).sqrt();
    let (a, _) = dispersion_factors(k);
    let b = dispersion_b_stable(k);
    let (x1, x2, x3) = (xi[0], xi[1], xi[2]);
    let c = |re: f64, im: f64| C64::new(re, im);
    let s13 = x1 * x1 + x3 * x3;
    let w1 = Vec6::from([c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
    let w2 = Vec6::from([c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
    let w3 = Vec6::from([
        c(a * x1 * x2, a * x3 * k),
        c(-a * s13, 0.0),
        c(a * x2 * x3, -a * x1 * k),
        c(-x1 * x2, -x3 * k),
        c(s13, 0.0),
        c(-x2 * x3, x1 * k),
    ]);
    let w4 = Vec6::from([
        c(-a * x1 * x2, a * x3 * k),
        c(a * s13, 0.0),
        c(-a * x2 * x3, -a * x1 * k),
        c(-x1 * x2, x3 * k),
        c(s13, 0.0),
        c(-x2 * x3, -x1 * k),
    ]);
    let w5 = Vec6::from([
        c(b * x1 * x2, -b * x3 * k),
        c(-b * s13, 0.0),
        c(b * x2 * x3, b * x1 * k),
        c(-x1 * x2, x3 * k),
        c(s13, 0.0),
        c(-x2 * x3, -x1 * k),
    ]);
    let w6 = Vec6::from([
        c(-b * x1 * x2, -b * x3 * k),
        c(b * s13, 0.0),
        c(-b * x2 * x3, b * x1 * k),
        c(-x1 * x2, -x3 * k),
        c(s13, 0.0),
        c(-x2 * x3, x1 * k),
    ]);
    [w1, w2, w3, w4, w5, w6]
}

/// The 4×4 matrix `D`: rows 1, 2, 4, 5 of `[W₃ W₄ W₅ W₆]`.
pub fn cramer_matrix(xi: [f64; 3]) -> Mat4 {
    let w = eigenvectors_unchecked(xi);
    let mut d = Mat4::zeros();
    for (col, wi) in w[2..].iter().enumerate() {
        for (row, &comp) in [0usize, 1, 3, 4].iter().enumerate() {
            d[(row, col)] = wi[comp];
        }
    }
    d
}

/// `|det D| = 4ξ₃²(ξ₁²+ξ₃²)²(4|ξ|²+1)`.
pub fn det_d_closed_form(xi: [f64; 3]) -> f64 {
    let s13 = xi[0] * xi[0] + xi[2] * xi[2];
    4.0 * xi[2] * xi[2] * s13 * s13 * (4.0 * norm2(xi) + 1.0)
}

/// Cramer coefficients `(C₃, C₄, C₅, C₆)` of a divergence-free pair.
pub fn cramer_coefficients(u0: &[C64; 6], xi: [f64; 3], p: &ModelParams) -> Result<[C64; 4]> {
    require_nonzero(xi)?;
    require_scaled(p)?;
    if is_degenerate(xi) {
        return Err(Error::DegenerateMode {
            xi,
            reason: "det(D) vanishes; use the matrix exponential",
        });
    }
    let k = norm2(xi).sqrt();
    for half in [&u0[0..3], &u0[3..6]] {
        let amp = half.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let d = (half[0] * xi[0] + half[1] * xi[1] + half[2] * xi[2]).norm();
        if d > 1e-10 * k * amp {
            return Err(Error::InvariantViolation(format!(
                "Cramer expansion needs a divergence-free pair (|ξ·û| = {d:e})"
            )));
        }
    }
    let d = cramer_matrix(xi);
    let det = d.determinant();
    let rhs = [u0[0], u0[1], u0[3], u0[4]];
    let mut out = [C64::new(0.0, 0.0); 4];
    for (i, o) in out.iter_mut().enumerate() {
        let mut di = d;
        for (row, &v) in rhs.iter().enumerate() {
            di[(row, i)] = v;
        }
        *o = di.determinant() / det;
    }
    Ok(out)
}

/// `P(Y)` from the characteristic polynomial `det(𝔹 − X) = P((X + ν|ξ_h|²)²)`.
pub fn char_poly_p(y: C64, xi: [f64; 3], eps: f64) -> C64 {
    let k2 = norm2(xi);
    let w2 = xi[2] * xi[2] / (eps * eps);
    let g = 1.0 / k2 + 3.0;
    y * y * y + w2 * g * y * y + w2 * w2 * g * y + w2 * w2 * w2
}

/// Per-frequency eigen-structure.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeEigenSystem {
    pub xi: [f64; 3],
    pub a: f64,
    pub b: f64,
    pub lambdas: [C64; 6],
    pub w: Option<[Vec6; 6]>,
    pub c: Option<[C64; 4]>,
    pub degenerate: bool,
}

impl ModeEigenSystem {
    pub fn new(xi: [f64; 3], p: &ModelParams) -> Result<Self> {
        let lambdas = eigenvalues(xi, p)?;
        let k = norm2(xi).sqrt();
        let (a, _) = dispersion_factors(k);
        let degenerate = is_degenerate(xi);
        Ok(Self {
            xi,
            a,
            b: dispersion_b_stable(k),
            lambdas,
            w: (!degenerate).then(|| eigenvectors_unchecked(xi)),
            c: None,
            degenerate,
        })
    }

    /// Attach the Cramer coefficients of `u0`.
    pub fn decompose_initial(&mut self, u0: &[C64; 6], p: &ModelParams) -> Result<()> {
        self.c = Some(cramer_coefficients(u0, self.xi, p)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(eps: f64, alpha: f64) -> ModelParams {
        ModelParams::scaled(eps, alpha).unwrap()
    }

    #[test]
    fn symbol_example_entry() {
        let m = assemble_symbol([1.0, 0.0, 0.0], &p(1.0, 1.0)).unwrap();
        assert_eq!(m[(1, 0)], C64::new(-1.0, 0.0));
        for k in 0..6 {
            assert_eq!(m[(k, k)], C64::new(-1.0, 0.0));
            assert_eq!(m[(k, (k + 3) % 6)], C64::new(0.0, 0.0));
        }
        assert!(assemble_symbol([0.0; 3], &p(1.0, 1.0)).is_err());
    }

    #[test]
    fn eigenvalue_example() {
        let l = eigenvalues([0.0, 0.0, 1.0], &p(0.1, 1.0)).unwrap();
        assert!((l[0].im - 10.0).abs() < 1e-12);
        assert!((l[2].im - 16.180339887498949).abs() < 1e-11);
        assert!((l[4].im - 6.1803398874989484).abs() < 1e-11);
        assert!(l.iter().all(|x| x.re == 0.0));
    }

    #[test]
    fn flat_modes_have_equal_eigenvalues() {
        let l = eigenvalues([0.3, -0.7, 0.0], &p(0.2, 0.5)).unwrap();
        let want = -0.2f64.powf(0.5) * (0.09 + 0.49);
        assert!(l.iter().all(|x| (x.re - want).abs() < 1e-15 && x.im == 0.0));
    }

    #[test]
    fn det_example() {
        let d = cramer_matrix([1.0, 0.0, 1.0]).determinant();
        assert!((d.norm() - 144.0).abs() < 1e-10 * 144.0);
        assert_eq!(det_d_closed_form([1.0, 0.0, 1.0]), 144.0);
    }

    #[test]
    fn w3_has_unit_coefficients() {
        let xi = [0.4, -1.1, 0.8];
        let pp = p(0.3, 0.2);
        let w = eigenvectors(xi, &pp).unwrap();
        let u0: [C64; 6] = std::array::from_fn(|i| w[2][i]);
        let c = cramer_coefficients(&u0, xi, &pp).unwrap();
        assert!((c[0] - 1.0).norm() < 1e-12);
        assert!(c[1..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn non_divergence_free_is_rejected() {
        let xi = [0.4, -1.1, 0.8];
        let u0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert!(matches!(
            cramer_coefficients(&u0, xi, &p(0.3, 0.2)),
            Err(Error::InvariantViolation(_))
        ));
    }
}
