//! Radial quadrature. For `g` radial in `ξ_h`,
//! `∫ g(|ξ_h|) e^{iz·ξ_h} dξ_h = 2π ∫ ρ g(ρ) J₀(|z|ρ) dρ`,
//! so every horizontal integral here is one-dimensional.

use nalgebra::DMatrix;
use rayon::prelude::*;

/// Uniform trapezoid rule on `[a, b]` whose integrands vanish with all
/// derivatives at both ends: only interior nodes carry weight, and the rule
/// converges faster than any power of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trapezoid {
    pub a: f64,
    pub b: f64,
    pub intervals: usize,
}

impl Trapezoid {
    /// Finest rule with step at most `h_max` (at least 2 intervals).
    pub fn with_step(a: f64, b: f64, h_max: f64) -> Self {
        let intervals = (((b - a) / h_max).ceil() as usize).max(2);
        Self { a, b, intervals }
    }

    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.intervals as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.h();
        (1..self.intervals).map(|k| self.a + k as f64 * h).collect()
    }

    /// Nodes of the halved rule that are not nodes of `self`.
    pub fn midpoints(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.intervals).map(|k| self.a + (k as f64 + 0.5) * h).collect()
    }

    pub fn refined(&self) -> Self {
        Self {
            intervals: 2 * self.intervals,
            ..*self
        }
    }
}

const CHUNK: usize = 2048;

/// Row-major blocks of a weight matrix `W`, where `fill(ρ_k, row)` writes
/// row `k` (length `cols`). Blocks follow the node chunks of [`hankel_apply`].
pub fn weight_chunks<F>(rho: &[f64], cols: usize, fill: F) -> Vec<DMatrix<f64>>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    rho.par_chunks(CHUNK)
        .map(|chunk| {
            let mut w = DMatrix::zeros(chunk.len(), cols);
            let mut row = vec![0.0; cols];
            for (k, &p) in chunk.iter().enumerate() {
                fill(p, &mut row);
                for (col, v) in row.iter().enumerate() {
                    w[(k, col)] = *v;
                }
            }
            w
        })
        .collect()
}

/// `M[i][j] = Σ_k J₀(z_i ρ_k) W[k][j]`, chunk by chunk as real matrix
/// products, summed in a fixed order.
pub fn hankel_apply(zs: &[f64], rho: &[f64], w: &[DMatrix<f64>]) -> DMatrix<f64> {
    let nz = zs.len();
    let cols = w.first().map_or(0, |m| m.ncols());
    let parts: Vec<DMatrix<f64>> = rho
        .par_chunks(CHUNK)
        .zip(w.par_iter())
        .map(|(chunk, wc)| DMatrix::from_fn(nz, chunk.len(), |i, k| libm::j0(zs[i] * chunk[k])) * wc)
        .collect();
    let mut out = DMatrix::zeros(nz, cols);
    for p in parts {
        out += p;
    }
    out
}

pub fn hankel_gemm<F>(zs: &[f64], rho: &[f64], cols: usize, fill: F) -> DMatrix<f64>
where
    F: Fn(f64, &mut [f64]) + Sync,
{
    hankel_apply(zs, rho, &weight_chunks(rho, cols, fill))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refined_nodes_interleave() {
        let t = Trapezoid::with_step(0.5, 2.0, 0.1);
        let mut all = t.nodes();
        all.extend(t.midpoints());
        all.sort_by(f64::total_cmp);
        let fine = t.refined().nodes();
        // the halved rule has no node at `a`, the first midpoint is its first node
        assert_eq!(all.len(), fine.len());
        for (x, y) in all.iter().zip(&fine) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn gemm_matches_direct_sum() {
        let t = Trapezoid::with_step(0.0, 9.0, 0.001);
        let zs = [0.0, 0.5, 2.0, 3.0];
        let (h, nodes) = (t.h(), t.nodes());
        let f = |p: f64| 2.0 * std::f64::consts::PI * p * (-p * p).exp() * h;
        let m = hankel_gemm(&zs, &nodes, 2, |p, row| {
            row[0] = f(p);
            row[1] = -f(p);
        });
        for (i, z) in zs.iter().enumerate() {
            let direct: f64 = nodes.iter().map(|&p| libm::j0(z * p) * f(p)).sum();
            assert!((m[(i, 0)] - direct).abs() < 1e-12 && (m[(i, 1)] + direct).abs() < 1e-12);
            // π e^{−z²/4}, up to the O(h²) endpoint error of an integrand odd at 0
            let exact = std::f64::consts::PI * (-z * z / 4.0).exp();
            assert!((direct - exact).abs() < 1e-5, "{z}: {direct} vs {exact}");
        }
    }
}
