//! Scaling-and-squaring matrix exponential with a degree-13 Padé kernel.
//!
//! The mean eigenvalue `tr(M)/n` is split off first and applied as a scalar
//! factor, which removes the uniform horizontal damping of the symbol and
//! keeps the squaring phase on a trace-free matrix.

use nalgebra::{DMatrix, Matrix2};

use super::symbol::Mat6;

use crate::error::{Error, Result};
use crate::field::C64;

/// Largest `‖tM‖₁` accepted.
pub const OVERFLOW_LIMIT: f64 = 1e6;

const THETA13: f64 = 5.371_920_351_148_152;

const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

macro_rules! expm_impl {
    ($(#[$doc:meta])* $name:ident, $ty:ty) => {
        $(#[$doc])*
        pub fn $name(m: &$ty, t: f64) -> Result<$ty> {
            let n = m.nrows();
            let norm1 = |x: &$ty| {
                (0..n)
                    .map(|j| (0..n).map(|i| x[(i, j)].norm()).sum::<f64>())
                    .fold(0.0, f64::max)
            };
            let a = m * C64::new(t, 0.0);
            let nrm = norm1(&a);
            if !nrm.is_finite() || nrm > OVERFLOW_LIMIT {
                return Err(Error::Overflow {
                    norm: nrm,
                    limit: OVERFLOW_LIMIT,
                });
            }
            let mu = a.trace() / C64::new(n as f64, 0.0);
            let id = <$ty as Identity>::identity(n, n);
            let a = a - &id * mu;
            let nrm = norm1(&a);
            let s = if nrm > THETA13 {
                (nrm / THETA13).log2().ceil() as i32
            } else {
                0
            };
            let a = a * C64::new(0.5f64.powi(s), 0.0);

            let b = |k: usize| C64::new(B13[k], 0.0);
            let a2 = &a * &a;
            let a4 = &a2 * &a2;
            let a6 = &a4 * &a2;
            let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
                + &a6 * b(7)
                + &a4 * b(5)
                + &a2 * b(3)
                + &id * b(1);
            let u = &a * u_inner;
            let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
                + &a6 * b(6)
                + &a4 * b(4)
                + &a2 * b(2)
                + &id * b(0);
            let p = &v + &u;
            let q = v - u;
            let mut r = q.lu().solve(&p).ok_or(Error::Overflow {
                norm: nrm,
                limit: OVERFLOW_LIMIT,
            })?;
            for _ in 0..s {
                r = &r * &r;
            }
            Ok(r * mu.exp())
        }
    };
}

trait Identity {
    fn identity(r: usize, c: usize) -> Self;
}

impl Identity for Mat6 {
    fn identity(_: usize, _: usize) -> Self {
        Mat6::identity()
    }
}

impl Identity for Matrix2<C64> {
    fn identity(_: usize, _: usize) -> Self {
        Matrix2::identity()
    }
}

impl Identity for DMatrix<C64> {
    fn identity(r: usize, c: usize) -> Self {
        DMatrix::identity(r, c)
    }
}

expm_impl!(
    /// `exp(t M)` for the 6×6 symbol.
    expm_oracle,
    Mat6
);
expm_impl!(
    /// `exp(t M)` for 2×2 matrices.
    expm2,
    Matrix2<C64>
);
expm_impl!(
    /// `exp(t M)` for square matrices of any size.
    expm_dyn,
    DMatrix<C64>
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_time_is_identity() {
        let m = Matrix2::new(C64::new(1.0, 2.0), C64::new(3.0, 0.0), C64::new(-1.0, 0.5), C64::new(0.0, 1.0));
        let e = expm2(&m, 0.0).unwrap();
        assert!((e - Matrix2::identity()).norm() < 1e-15);
    }

    #[test]
    fn diagonal_is_elementwise() {
        let m = Matrix2::new(C64::new(-3.0, 40.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5, -7.0));
        let e = expm2(&m, 2.5).unwrap();
        for k in 0..2 {
            let want = (m[(k, k)] * 2.5).exp();
            assert!((e[(k, k)] - want).norm() < 1e-12 * want.norm());
        }
        assert_eq!(e[(0, 1)], C64::new(0.0, 0.0));
    }

    #[test]
    fn nilpotent_closed_form() {
        // exp(t [[a, 1], [0, a]]) = e^{ta} [[1, t], [0, 1]]
        let a = C64::new(-0.3, 2.0);
        let m = Matrix2::new(a, C64::new(1.0, 0.0), C64::new(0.0, 0.0), a);
        let t = 3.7;
        let e = expm2(&m, t).unwrap();
        let f = (a * t).exp();
        assert!((e[(0, 0)] - f).norm() < 1e-13);
        assert!((e[(0, 1)] - f * t).norm() < 1e-13);
        assert!(e[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn rotation_at_large_argument() {
        let w = 1234.5;
        let m = Matrix2::new(C64::new(0.0, 0.0), C64::new(w, 0.0), C64::new(-w, 0.0), C64::new(0.0, 0.0));
        let e = expm2(&m, 7.0).unwrap();
        let (s, c) = (w * 7.0).sin_cos();
        assert!((e[(0, 0)].re - c).abs() < 1e-11);
        assert!((e[(0, 1)].re - s).abs() < 1e-11);
    }

    #[test]
    fn overflow_guard() {
        let m = Matrix2::new(C64::new(0.0, 0.0), C64::new(1e7, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!(matches!(expm2(&m, 1.0), Err(Error::Overflow { .. })));
    }
}
