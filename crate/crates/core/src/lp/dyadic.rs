//! Horizontal and vertical dyadic blocks `Δ^h_j`, `Δ^v_q` and the dyadic
//! form of the anisotropic Sobolev norm.

use std::collections::BTreeMap;

use crate::field::{SpectralField, C64};
use crate::grid::Grid;
use crate::lp::bump::{block_multiplier, low_pass_multiplier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// `|ξ_h|`
    H,
    /// `|ξ₃|`
    V,
}

#[inline]
pub fn direction_magnitude(xi: [f64; 3], dir: Direction) -> f64 {
    match dir {
        Direction::H => xi[0].hypot(xi[1]),
        Direction::V => xi[2].abs(),
    }
}

/// Largest block index that can be nonzero on `grid`; blocks `−1..=q_max`
/// sum to the identity on every mode.
pub fn q_max(grid: &Grid, dir: Direction) -> i32 {
    let top = (0..grid.len())
        .map(|i| direction_magnitude(grid.xi(i), dir))
        .fold(0.0, f64::max);
    // Σ_{q' ≤ q} Δ_{q'} has multiplier ψ(z/2^{q+1}), which is 1 up to 3/4·2^{q+1}
    let mut q = -1;
    while 0.75 * f64::powi(2.0, q + 1) < top {
        q += 1;
    }
    q
}

fn apply(u: &SpectralField, m: impl Fn([f64; 3]) -> f64) -> SpectralField {
    let g = u.grid;
    u.apply_multiplier(|idx| m(g.xi(idx)))
}

/// `Δ^dir_q u`.
pub fn dyadic_block(u: &SpectralField, q: i32, dir: Direction) -> SpectralField {
    apply(u, |xi| block_multiplier(q, direction_magnitude(xi, dir)))
}

/// `S^dir_q u = Σ_{q' ≤ q−1} Δ^dir_{q'} u`.
pub fn low_pass(u: &SpectralField, q: i32, dir: Direction) -> SpectralField {
    apply(u, |xi| low_pass_multiplier(q, direction_magnitude(xi, dir)))
}

/// `Δ^h_j Δ^v_q u`.
pub fn double_block(u: &SpectralField, j: i32, q: i32) -> SpectralField {
    apply(u, |xi| {
        block_multiplier(j, direction_magnitude(xi, Direction::H))
            * block_multiplier(q, direction_magnitude(xi, Direction::V))
    })
}

/// Scalar-coefficient versions used by paraproducts.
pub fn dyadic_block_scalar(grid: &Grid, a: &[C64], q: i32, dir: Direction) -> Vec<C64> {
    a.iter()
        .enumerate()
        .map(|(i, x)| x * block_multiplier(q, direction_magnitude(grid.xi(i), dir)))
        .collect()
}

pub fn low_pass_scalar(grid: &Grid, a: &[C64], q: i32, dir: Direction) -> Vec<C64> {
    a.iter()
        .enumerate()
        .map(|(i, x)| x * low_pass_multiplier(q, direction_magnitude(grid.xi(i), dir)))
        .collect()
}

/// The family `{Δ^h_j Δ^v_q u}` indexed by `(j, q)`.
///
/// Block norms are computed eagerly; block fields are materialized on
/// request through [`DyadicLadder::block`], since storing all of them costs
/// `(J+2)(Q+2)` copies of the field.
#[derive(Debug, Clone)]
pub struct DyadicLadder {
    source: SpectralField,
    pub j_max: i32,
    pub q_max: i32,
    pub block_norms: BTreeMap<(i32, i32), f64>,
}

impl DyadicLadder {
    pub fn new(u: &SpectralField) -> Self {
        let g = u.grid;
        let j_max = q_max(&g, Direction::H);
        let qm = q_max(&g, Direction::V);
        let pf = g.parseval_factor();
        let mut acc: BTreeMap<(i32, i32), f64> = BTreeMap::new();
        for j in -1..=j_max {
            for q in -1..=qm {
                acc.insert((j, q), 0.0);
            }
        }
        for idx in 0..g.len() {
            let e: f64 = u.mode(idx).iter().map(|x| x.norm_sqr()).sum();
            if e == 0.0 {
                continue;
            }
            let xi = g.xi(idx);
            let zh = direction_magnitude(xi, Direction::H);
            let zv = direction_magnitude(xi, Direction::V);
            for j in -1..=j_max {
                let a = block_multiplier(j, zh);
                if a == 0.0 {
                    continue;
                }
                for q in -1..=qm {
                    let b = block_multiplier(q, zv);
                    if b != 0.0 {
                        *acc.get_mut(&(j, q)).unwrap() += a * a * b * b * e;
                    }
                }
            }
        }
        let block_norms = acc.into_iter().map(|(k, v)| (k, (pf * v).sqrt())).collect();
        Self {
            source: u.clone(),
            j_max,
            q_max: qm,
            block_norms,
        }
    }

    pub fn block(&self, j: i32, q: i32) -> SpectralField {
        double_block(&self.source, j, q)
    }

    /// `Σ_{j,q} Δ^h_j Δ^v_q u`.
    pub fn reconstruct(&self) -> SpectralField {
        let mut out = SpectralField::zeros(&self.source.grid);
        for j in -1..=self.j_max {
            for q in -1..=self.q_max {
                out.axpy(1.0, &self.block(j, q));
            }
        }
        out
    }
}

/// `(Σ_{j,q} 2^{2(jσ₁+qσ₂)} ‖Δ^h_jΔ^v_q u‖²)^{1/2}`, evaluated mode by mode.
pub fn dyadic_sobolev_norm(u: &SpectralField, s1: f64, s2: f64) -> f64 {
    let g = u.grid;
    let jm = q_max(&g, Direction::H);
    let qm = q_max(&g, Direction::V);
    let weight = |z: f64, top: i32, s: f64| -> f64 {
        (-1..=top)
            .map(|q| {
                let m = block_multiplier(q, z);
                f64::powf(2.0, 2.0 * q as f64 * s) * m * m
            })
            .sum()
    };
    let mut sum = 0.0;
    for idx in 0..g.len() {
        let e: f64 = u.mode(idx).iter().map(|x| x.norm_sqr()).sum();
        if e == 0.0 {
            continue;
        }
        let xi = g.xi(idx);
        sum += e
            * weight(direction_magnitude(xi, Direction::H), jm, s1)
            * weight(direction_magnitude(xi, Direction::V), qm, s2);
    }
    (g.parseval_factor() * sum).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init::random_state;

    #[test]
    fn plane_wave_lands_in_one_vertical_block() {
        let g = Grid::new(8, 16, 2.0 * std::f64::consts::PI, 2.0 * std::f64::consts::PI / 1.4).unwrap();
        let mut u = SpectralField::zeros(&g);
        let i = g.mode_index([1, 0, 1]).unwrap();
        let m = g.mode_index([-1, 0, -1]).unwrap();
        u.c[1][i] = C64::new(1.0, 0.0);
        u.c[1][m] = C64::new(1.0, 0.0);
        assert!((g.xi(i)[2] - 1.4).abs() < 1e-12);
        let d0 = dyadic_block(&u, 0, Direction::V);
        assert!(d0.sub(&u).max_abs_coeff() < 1e-15);
        for q in [-1, 1, 2] {
            assert_eq!(dyadic_block(&u, q, Direction::V).max_abs_coeff(), 0.0);
        }
    }

    #[test]
    fn ladder_reconstructs() {
        let g = Grid::new(16, 16, 7.0, 3.0).unwrap();
        let s = random_state(&g, 2, 1.0, false, 6).unwrap();
        let l = DyadicLadder::new(&s.u);
        assert!(l.reconstruct().sub(&s.u).norm_l2() < 1e-10 * s.u.norm_l2());
        let telescoped = low_pass(&s.u, 2, Direction::V)
            .add(&(2..=l.q_max).fold(SpectralField::zeros(&g), |acc, q| acc.add(&dyadic_block(&s.u, q, Direction::V))));
        assert!(telescoped.sub(&s.u).norm_l2() < 1e-10 * s.u.norm_l2());
    }
}
