//! Exact per-mode propagation `e^{t𝔹(ξ)}` of the linear system.
//!
//! Two routes produce the same 6×6 matrix on divergence-free data:
//! the closed-form eigen-expansion `Σ C_i e^{λ_i t} W_i` (only for
//! non-degenerate frequencies of the scaled system), and the numerical
//! matrix exponential (everything else). Matrices are computed for the
//! canonical member of each `±ξ` pair and conjugated for its partner, so
//! Hermitian symmetry is preserved exactly.

use nalgebra::SMatrix;
use rayon::prelude::*;

use crate::error::Result;
use crate::field::{StateVector, C64};
use crate::grid::Grid;
use crate::linear::expm::expm_oracle;
use crate::linear::params::ModelParams;
use crate::linear::symbol::{assemble_symbol, cramer_matrix, eigenvalues, eigenvectors, is_degenerate, Mat6};

/// How a mode's propagator was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Identity,
    Eigen,
    Expm,
}

/// Closed-form propagator acting on divergence-free pairs. Components 3
/// and 6 of the input are not read; the divergence-free constraint fixes
/// them.
pub fn eigen_propagator(xi: [f64; 3], p: &ModelParams, t: f64) -> Result<Mat6> {
    let w = eigenvectors(xi, p)?;
    let l = eigenvalues(xi, p)?;
    let dinv = cramer_matrix(xi)
        .try_inverse()
        .expect("det(D) is nonzero off the degenerate set");
    let mut v = SMatrix::<C64, 6, 4>::zeros();
    for j in 0..4 {
        let e = (l[j + 2] * t).exp();
        v.set_column(j, &(w[j + 2] * e));
    }
    let g = v * dinv;
    let mut out = Mat6::zeros();
    for (col, &comp) in [0usize, 1, 3, 4].iter().enumerate() {
        out.set_column(comp, &g.column(col));
    }
    Ok(out)
}

pub fn expm_propagator(xi: [f64; 3], p: &ModelParams, t: f64) -> Result<Mat6> {
    expm_oracle(&assemble_symbol(xi, p)?, t)
}

/// Propagator of one mode. `use_eigen` requests the closed form, which is
/// honoured only where it is defined.
pub fn mode_propagator(xi: [f64; 3], p: &ModelParams, t: f64, use_eigen: bool) -> Result<(Mat6, Route)> {
    if xi == [0.0; 3] || t == 0.0 {
        return Ok((Mat6::identity(), Route::Identity));
    }
    if use_eigen && p.is_scaled() && !is_degenerate(xi) {
        return Ok((eigen_propagator(xi, p, t)?, Route::Eigen));
    }
    Ok((expm_propagator(xi, p, t)?, Route::Expm))
}

/// Predicate selecting the modes that may use the eigen route.
pub type EigenRegion<'a> = &'a (dyn Fn([f64; 3]) -> bool + Sync);

/// Cached propagators for a fixed `(grid, params, t)` on a set of modes.
#[derive(Debug, Clone)]
pub struct PropagatorSet {
    grid: Grid,
    t: f64,
    modes: Vec<usize>,
    mats: Vec<Mat6>,
    pub eigen_count: usize,
    pub expm_count: usize,
}

impl PropagatorSet {
    /// Propagators on `modes` (operator frequencies). Modes not listed are
    /// mapped to zero by [`PropagatorSet::apply`].
    pub fn build(grid: &Grid, p: &ModelParams, t: f64, modes: &[usize], eigen_region: Option<EigenRegion>) -> Result<Self> {
        let results: Vec<Result<(Mat6, Route)>> = modes
            .par_iter()
            .map(|&idx| {
                let m = grid.mirror(idx);
                let canon = idx.min(m);
                let xi = grid.xi_op(canon);
                let use_eigen = eigen_region.map_or(false, |f| f(xi));
                let (mat, route) = mode_propagator(xi, p, t, use_eigen)?;
                Ok(if canon == idx { (mat, route) } else { (mat.map(|x| x.conj()), route) })
            })
            .collect();
        let mut mats = Vec::with_capacity(modes.len());
        let (mut eigen_count, mut expm_count) = (0, 0);
        for r in results {
            let (m, route) = r?;
            match route {
                Route::Eigen => eigen_count += 1,
                Route::Expm => expm_count += 1,
                Route::Identity => {}
            }
            mats.push(m);
        }
        Ok(Self {
            grid: *grid,
            t,
            modes: modes.to_vec(),
            mats,
            eigen_count,
            expm_count,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn modes(&self) -> &[usize] {
        &self.modes
    }

    pub fn matrix(&self, k: usize) -> &Mat6 {
        &self.mats[k]
    }

    pub fn apply(&self, s: &StateVector) -> StateVector {
        debug_assert_eq!(*s.grid(), self.grid);
        let mut out = StateVector::zeros(&self.grid);
        for (&idx, m) in self.modes.iter().zip(&self.mats) {
            let v = s.mode6(idx);
            let mut w = [C64::new(0.0, 0.0); 6];
            for (i, wi) in w.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (j, vj) in v.iter().enumerate() {
                    acc += m[(i, j)] * vj;
                }
                *wi = acc;
            }
            out.set_mode6(idx, &w);
        }
        out
    }
}

/// `e^{t𝔹}U` on every mode of the grid. Modes where `eigen_region` holds
/// (and the closed form exists) use the eigen-expansion, all others the
/// matrix exponential; mode zero is the identity.
pub fn propagate_exact(u: &StateVector, t: f64, p: &ModelParams, eigen_region: Option<EigenRegion>) -> Result<StateVector> {
    let g = *u.grid();
    let modes: Vec<usize> = (0..g.len()).collect();
    Ok(PropagatorSet::build(&g, p, t, &modes, eigen_region)?.apply(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::symbol::Vec6;

    #[test]
    fn eigen_route_matches_expm() {
        let p = ModelParams::scaled(0.05, 0.3).unwrap();
        let xi = [0.7, -0.4, 1.3];
        let t = 3.1;
        let a = eigen_propagator(xi, &p, t).unwrap();
        let b = expm_propagator(xi, &p, t).unwrap();
        // compare on a divergence-free pair
        let w = eigenvectors(xi, &p).unwrap();
        let v: Vec6 = w[2] * C64::new(0.3, 1.0) + w[4] * C64::new(-2.0, 0.1);
        let d = (a * v - b * v).norm() / (b * v).norm();
        assert!(d < 1e-11, "{d}");
    }

    #[test]
    fn zero_time_and_zero_mode_are_identity() {
        let p = ModelParams::scaled(0.05, 0.3).unwrap();
        assert_eq!(mode_propagator([0.0; 3], &p, 1.0, true).unwrap().1, Route::Identity);
        assert_eq!(mode_propagator([1.0, 2.0, 3.0], &p, 0.0, true).unwrap().0, Mat6::identity());
    }
}
