//! Vertical Bony decomposition `uv = T(u,v) + T(v,u) + R(u,v)`.

use crate::error::Result;
use crate::fft::Fft3;
use crate::field::C64;
use crate::lp::dyadic::{dyadic_block_scalar, low_pass_scalar, q_max, Direction};
use crate::ops::product;

/// Remainder band: `R` collects pairs with `|q′ − q″| ≤ N0`.
pub const N0: i32 = 1;

#[derive(Debug, Clone)]
pub struct BonyPieces {
    /// `T(u,v) = Σ_{q′} S^v_{q′−N0} u · Δ^v_{q′} v`
    pub t_uv: Vec<C64>,
    /// `T(v,u)`
    pub t_vu: Vec<C64>,
    /// `R(u,v) = Σ_{|q′−q″| ≤ N0} Δ^v_{q′} u · Δ^v_{q″} v`
    pub r_uv: Vec<C64>,
}

impl BonyPieces {
    pub fn sum(&self) -> Vec<C64> {
        self.t_uv
            .iter()
            .zip(&self.t_vu)
            .zip(&self.r_uv)
            .map(|((a, b), c)| a + b + c)
            .collect()
    }
}

fn accumulate(acc: &mut [C64], x: &[C64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
}

/// Paraproduct pieces of two real scalar fields; every product is the
/// dealiased pseudo-spectral product.
pub fn bony_decompose(fft: &Fft3, u: &[C64], v: &[C64]) -> Result<BonyPieces> {
    let g = *fft.grid();
    let qm = q_max(&g, Direction::V);
    let du: Vec<Vec<C64>> = (-1..=qm).map(|q| dyadic_block_scalar(&g, u, q, Direction::V)).collect();
    let dv: Vec<Vec<C64>> = (-1..=qm).map(|q| dyadic_block_scalar(&g, v, q, Direction::V)).collect();
    let zero = || vec![C64::new(0.0, 0.0); g.len()];
    let (mut t_uv, mut t_vu, mut r_uv) = (zero(), zero(), zero());
    for q in -1..=qm {
        let k = (q + 1) as usize;
        let su = low_pass_scalar(&g, u, q - N0, Direction::V);
        let sv = low_pass_scalar(&g, v, q - N0, Direction::V);
        accumulate(&mut t_uv, &product(fft, &su, &dv[k])?);
        accumulate(&mut t_vu, &product(fft, &sv, &du[k])?);
        for i in -N0..=N0 {
            let p = q - i;
            if (-1..=qm).contains(&p) {
                accumulate(&mut r_uv, &product(fft, &du[(p + 1) as usize], &dv[k])?);
            }
        }
    }
    Ok(BonyPieces { t_uv, t_vu, r_uv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::lp::harness::random_scalar;

    #[test]
    fn pieces_sum_to_product() {
        let g = Grid::new(8, 32, 6.0, 9.0).unwrap();
        let fft = Fft3::new(&g);
        let u = random_scalar(&g, 1, [2, 2, 10]);
        let v = random_scalar(&g, 2, [2, 2, 10]);
        let b = bony_decompose(&fft, &u, &v).unwrap();
        let uv = product(&fft, &u, &v).unwrap();
        let err: f64 = b.sum().iter().zip(&uv).map(|(a, c)| (a - c).norm_sqr()).sum::<f64>().sqrt();
        let nrm: f64 = uv.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-9 * nrm, "{err} vs {nrm}");
    }

    #[test]
    fn constant_factor_only_feeds_low_paraproduct() {
        let g = Grid::new(8, 32, 6.0, 9.0).unwrap();
        let fft = Fft3::new(&g);
        let u = random_scalar(&g, 1, [2, 2, 10]);
        let mut v = vec![C64::new(0.0, 0.0); g.len()];
        v[0] = C64::new(g.len() as f64, 0.0);
        let b = bony_decompose(&fft, &u, &v).unwrap();
        let uv = product(&fft, &u, &v).unwrap();
        let err: f64 = b.sum().iter().zip(&uv).map(|(a, c)| (a - c).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9 * g.len() as f64);
        // v sits in Δ_{-1}, so T(u,v) only has q' = −1 terms, where S_{−2} = 0
        assert!(b.t_uv.iter().all(|x| x.norm() < 1e-9));
    }
}
