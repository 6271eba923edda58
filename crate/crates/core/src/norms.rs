//! Anisotropic Sobolev and Lebesgue norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField, StateVector};

/// Result of an anisotropic Sobolev norm evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorm {
    pub value: f64,
    /// L² energy (squared) sitting on a plane whose weight is singular and
    /// that was left out of the sum.
    pub excluded_energy: f64,
    pub warning: Option<String>,
}

/// Which directions use homogeneous weights `|ξ_dir|^{2σ}` instead of
/// `(1 + |ξ_dir|²)^σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Homogeneity {
    pub h: bool,
    pub v: bool,
}

/// Weight factor of one direction; `None` marks a singular (excluded) mode.
#[inline]
fn factor(k2: f64, sigma: f64, homogeneous: bool) -> Option<f64> {
    if !homogeneous {
        return Some((1.0 + k2).powf(sigma));
    }
    if sigma == 0.0 {
        Some(1.0)
    } else if k2 == 0.0 {
        if sigma > 0.0 {
            Some(0.0)
        } else {
            None
        }
    } else {
        Some(k2.powf(sigma))
    }
}

/// General anisotropic Sobolev norm with independent homogeneity flags.
pub fn sobolev_norm(v: &SpectralField, s1: f64, s2: f64, hom: Homogeneity) -> SobolevNorm {
    let g = v.grid;
    let mut sum = 0.0;
    let mut excluded = 0.0;
    for idx in 0..g.len() {
        let e: f64 = v.mode(idx).iter().map(|x| x.norm_sqr()).sum();
        if e == 0.0 {
            continue;
        }
        let xi = g.xi(idx);
        let kh2 = xi[0] * xi[0] + xi[1] * xi[1];
        let kv2 = xi[2] * xi[2];
        match (factor(kh2, s1, hom.h), factor(kv2, s2, hom.v)) {
            (Some(a), Some(b)) => sum += a * b * e,
            _ => excluded += e,
        }
    }
    let pf = g.parseval_factor();
    let excluded_energy = pf * excluded;
    let warning = (excluded > 0.0).then(|| {
        format!(
            "negative homogeneous exponent: {excluded_energy:e} of squared L² mass on a zero-frequency plane was excluded"
        )
    });
    SobolevNorm {
        value: (pf * sum).sqrt(),
        excluded_energy,
        warning,
    }
}

/// `H^{σ₁,σ₂}` norm, or `Ḣ^{σ₁,σ₂}` (homogeneous in `ξ_h` only) when
/// `homogeneous_h` is set.
pub fn aniso_sobolev_norm(v: &SpectralField, s1: f64, s2: f64, homogeneous_h: bool) -> SobolevNorm {
    sobolev_norm(
        v,
        s1,
        s2,
        Homogeneity {
            h: homogeneous_h,
            v: false,
        },
    )
}

pub fn h0s(v: &SpectralField, s: f64) -> f64 {
    aniso_sobolev_norm(v, 0.0, s, false).value
}

/// `‖(u,b)‖_{H^{0,s}} = (‖u‖² + ‖b‖²)^{1/2}`.
pub fn h0s_state(u: &StateVector, s: f64) -> f64 {
    h0s(&u.u, s).hypot(h0s(&u.b, s))
}

/// `‖∇_h v‖_{H^{0,s}}`.
pub fn grad_h_h0s(v: &SpectralField, s: f64) -> f64 {
    let g = v.grid;
    let mut sum = 0.0;
    for idx in 0..g.len() {
        let xi = g.xi(idx);
        let kh2 = xi[0] * xi[0] + xi[1] * xi[1];
        if kh2 == 0.0 {
            continue;
        }
        let e: f64 = v.mode(idx).iter().map(|x| x.norm_sqr()).sum();
        sum += kh2 * (1.0 + xi[2] * xi[2]).powf(s) * e;
    }
    (g.parseval_factor() * sum).sqrt()
}

pub fn grad_h_h0s_state(u: &StateVector, s: f64) -> f64 {
    grad_h_h0s(&u.u, s).hypot(grad_h_h0s(&u.b, s))
}

fn check_exponent(q: f64) -> Result<()> {
    if q == 1.0 || q == 2.0 || q == 4.0 || q == f64::INFINITY {
        Ok(())
    } else {
        Err(Error::Parameter(format!("Lebesgue exponent {q} not in {{1, 2, 4, ∞}}")))
    }
}

fn lp_accumulate(values: impl Iterator<Item = f64>, q: f64, weight: f64) -> f64 {
    if q == f64::INFINITY {
        values.fold(0.0, f64::max)
    } else {
        (weight * values.map(|x| x.powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

/// `L^{q₁}_h L^{q₂}_v` norm of the pointwise Euclidean magnitude: vertical
/// norm first, then horizontal, both as Riemann sums.
pub fn aniso_lebesgue_norm(p: &PhysicalField, q1: f64, q2: f64) -> Result<f64> {
    check_exponent(q1)?;
    check_exponent(q2)?;
    let g = p.grid;
    let nv = g.n_v();
    let dz = g.box_v() / nv as f64;
    let dh = g.box_h() * g.box_h() / (g.n_h() * g.n_h()) as f64;
    let columns = g.n_h() * g.n_h();
    let mag = |i: usize| (p.v[0][i].powi(2) + p.v[1][i].powi(2) + p.v[2][i].powi(2)).sqrt();
    let inner: Vec<f64> = (0..columns)
        .map(|c| lp_accumulate((c * nv..(c + 1) * nv).map(mag), q2, dz))
        .collect();
    Ok(lp_accumulate(inner.into_iter(), q1, dh))
}

/// Norm on `Y_{s,η} = Ḣ^{−η,s} ∩ L²_hḢ^{−η}_v ∩ H^{η,η+s}`, realized as the
/// maximum of the three constituent norms. Singular planes are excluded
/// and their energy reported through the returned warning.
pub fn y_norm(v: &SpectralField, s: f64, eta: f64) -> SobolevNorm {
    let a = sobolev_norm(v, -eta, s, Homogeneity { h: true, v: false });
    let b = sobolev_norm(v, 0.0, -eta, Homogeneity { h: false, v: true });
    let c = sobolev_norm(v, eta, eta + s, Homogeneity::default());
    let excluded_energy = a.excluded_energy.max(b.excluded_energy);
    SobolevNorm {
        value: a.value.max(b.value).max(c.value),
        excluded_energy,
        warning: a.warning.or(b.warning),
    }
}

pub fn y_norm_state(u: &StateVector, s: f64, eta: f64) -> f64 {
    y_norm(&u.u, s, eta).value.hypot(y_norm(&u.b, s, eta).value)
}

/// Summary of the norms of one field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub l2: f64,
    pub h0s: f64,
    pub hs1s2: Vec<((f64, f64), f64)>,
    pub aniso_lebesgue: Vec<((f64, f64), f64)>,
}

impl NormReport {
    pub fn compute(
        spec: &SpectralField,
        phys: &PhysicalField,
        s: f64,
        sobolev: &[(f64, f64)],
        lebesgue: &[(f64, f64)],
    ) -> Result<Self> {
        let mut hs1s2 = vec![((0.0, 0.0), aniso_sobolev_norm(spec, 0.0, 0.0, false).value)];
        for &(a, b) in sobolev {
            if (a, b) != (0.0, 0.0) {
                hs1s2.push(((a, b), aniso_sobolev_norm(spec, a, b, false).value));
            }
        }
        let mut aniso_lebesgue = Vec::new();
        for &(q1, q2) in lebesgue {
            aniso_lebesgue.push(((q1, q2), aniso_lebesgue_norm(phys, q1, q2)?));
        }
        Ok(Self {
            l2: spec.norm_l2(),
            h0s: h0s(spec, s),
            hs1s2,
            aniso_lebesgue,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::C64;
    use crate::grid::Grid;

    #[test]
    fn single_mode_h0s() {
        let g = Grid::cube(8).unwrap();
        let mut v = SpectralField::zeros(&g);
        let n = g.len() as f64;
        // û with physical amplitude such that Σ|û|²·pf = |a|²·V per pair
        v.c[0][g.mode_index([1, 0, 2]).unwrap()] = C64::new(n, 0.0);
        let l2 = v.norm_l2();
        let s = 1.3;
        let want = 5f64.powf(s / 2.0) * l2;
        assert!((h0s(&v, s) - want).abs() < 1e-12 * want);
    }

    #[test]
    fn homogeneous_negative_exponent_reports_column() {
        let g = Grid::cube(8).unwrap();
        let mut v = SpectralField::zeros(&g);
        v.c[0][g.mode_index([0, 0, 2]).unwrap()] = C64::new(1.0, 0.0);
        v.c[0][g.mode_index([1, 0, 2]).unwrap()] = C64::new(1.0, 0.0);
        let r = aniso_sobolev_norm(&v, -0.5, 0.0, true);
        assert!(r.warning.is_some());
        assert!(r.excluded_energy > 0.0);
        let r = aniso_sobolev_norm(&v, 0.5, 0.0, true);
        assert!(r.warning.is_none());
    }

    #[test]
    fn lebesgue_of_constant_on_unit_box() {
        let g = Grid::new(4, 6, 1.0, 1.0).unwrap();
        let p = PhysicalField::from_fn(&g, |_| [0.0, 0.0, 2.5]);
        for q1 in [1.0, 2.0, 4.0, f64::INFINITY] {
            for q2 in [1.0, 2.0, 4.0, f64::INFINITY] {
                assert!((aniso_lebesgue_norm(&p, q1, q2).unwrap() - 2.5).abs() < 1e-12);
            }
        }
        assert!(aniso_lebesgue_norm(&p, 3.0, 2.0).is_err());
    }
}
