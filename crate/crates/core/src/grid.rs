//! Anisotropic periodic grid.
//!
//! The domain is the torus `[0, box_h)^2 x [0, box_v)` sampled on
//! `n_h x n_h x n_v` points. Spectral coefficients are the raw (unscaled)
//! DFT of the samples; the inverse transform carries the `1/N` factor.
//! With this convention the Riemann-sum L² norm of a field is
//! `‖u‖² = (V / N²) Σ_k |û(k)|²`, where `V` is the box volume and `N` the
//! number of grid points; [`Grid::parseval_factor`] returns `V / N²`.
//!
//! Mode indices follow FFT order: index `i` on an axis of length `n`
//! carries the integer wavenumber `k = i` for `i < n/2` and `k = i - n`
//! otherwise, so `k ∈ [-n/2, n/2)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis of the grid: 0 and 1 are horizontal, 2 is vertical.
pub type Axis = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_h: usize,
    n_v: usize,
    box_h: f64,
    box_v: f64,
}

impl Grid {
    pub fn new(n_h: usize, n_v: usize, box_h: f64, box_v: f64) -> Result<Self> {
        for (name, n) in [("n_h", n_h), ("n_v", n_v)] {
            if n < 4 || n % 2 != 0 {
                return Err(Error::Config(format!(
                    "{name} = {n} must be even and at least 4"
                )));
            }
        }
        for (name, l) in [("box_h", box_h), ("box_v", box_v)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::Config(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self {
            n_h,
            n_v,
            box_h,
            box_v,
        })
    }

    /// Cubic `n^3` grid on the `2π`-periodic box (integer frequencies).
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, n, 2.0 * PI, 2.0 * PI)
    }

    pub fn n_h(&self) -> usize {
        self.n_h
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn box_h(&self) -> f64 {
        self.box_h
    }

    pub fn box_v(&self) -> f64 {
        self.box_v
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.n_h, self.n_h, self.n_v]
    }

    /// Total number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n_h * self.n_h * self.n_v
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn volume(&self) -> f64 {
        self.box_h * self.box_h * self.box_v
    }

    /// `V / N²`: converts `Σ|û|²` into the physical L² norm squared.
    pub fn parseval_factor(&self) -> f64 {
        let n = self.len() as f64;
        self.volume() / (n * n)
    }

    /// Riemann-sum weight of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    pub fn axis_len(&self, axis: Axis) -> usize {
        if axis < 2 {
            self.n_h
        } else {
            self.n_v
        }
    }

    pub fn axis_box(&self, axis: Axis) -> f64 {
        if axis < 2 {
            self.box_h
        } else {
            self.box_v
        }
    }

    /// Spacing `2π / box` between consecutive discrete frequencies.
    pub fn frequency_step(&self, axis: Axis) -> f64 {
        2.0 * PI / self.axis_box(axis)
    }

    /// Signed integer wavenumber of index `i` on `axis`.
    pub fn wavenumber(&self, axis: Axis, i: usize) -> i64 {
        let n = self.axis_len(axis);
        if i < n / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Exact frequency `2πk / box` of index `i` on `axis`.
    pub fn frequency(&self, axis: Axis, i: usize) -> f64 {
        2.0 * PI * self.wavenumber(axis, i) as f64 / self.axis_box(axis)
    }

    /// Frequency used by differential operators: identical to
    /// [`Grid::frequency`] except on the Nyquist index, where it is zero so
    /// that odd multipliers stay real-preserving.
    pub fn operator_frequency(&self, axis: Axis, i: usize) -> f64 {
        if i == self.axis_len(axis) / 2 {
            0.0
        } else {
            self.frequency(axis, i)
        }
    }

    #[inline]
    pub fn index(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i1 * self.n_h + i2) * self.n_v + i3
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize, usize) {
        let i3 = idx % self.n_v;
        let rest = idx / self.n_v;
        (rest / self.n_h, rest % self.n_h, i3)
    }

    /// Exact frequency triple of the flat mode index.
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let (i1, i2, i3) = self.coords(idx);
        [
            self.frequency(0, i1),
            self.frequency(1, i2),
            self.frequency(2, i3),
        ]
    }

    /// Operator frequency triple (Nyquist components zeroed).
    pub fn xi_op(&self, idx: usize) -> [f64; 3] {
        let (i1, i2, i3) = self.coords(idx);
        [
            self.operator_frequency(0, i1),
            self.operator_frequency(1, i2),
            self.operator_frequency(2, i3),
        ]
    }

    /// Integer wavenumber triple of the flat mode index.
    pub fn wavenumbers(&self, idx: usize) -> [i64; 3] {
        let (i1, i2, i3) = self.coords(idx);
        [
            self.wavenumber(0, i1),
            self.wavenumber(1, i2),
            self.wavenumber(2, i3),
        ]
    }

    /// Flat index of the mode `-k` (the Hermitian partner of `k`).
    pub fn mirror(&self, idx: usize) -> usize {
        let (i1, i2, i3) = self.coords(idx);
        let m = |i: usize, n: usize| (n - i) % n;
        self.index(m(i1, self.n_h), m(i2, self.n_h), m(i3, self.n_v))
    }

    /// Index of the wavenumber `k` on `axis`, if representable.
    pub fn index_of_wavenumber(&self, axis: Axis, k: i64) -> Option<usize> {
        let n = self.axis_len(axis) as i64;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Flat index of the integer wavenumber triple, if representable.
    pub fn mode_index(&self, k: [i64; 3]) -> Option<usize> {
        Some(self.index(
            self.index_of_wavenumber(0, k[0])?,
            self.index_of_wavenumber(1, k[1])?,
            self.index_of_wavenumber(2, k[2])?,
        ))
    }

    /// 2/3-rule membership: every axis satisfies `3|k| < n`.
    pub fn is_retained(&self, idx: usize) -> bool {
        let k = self.wavenumbers(idx);
        (3 * k[0].unsigned_abs() as usize) < self.n_h
            && (3 * k[1].unsigned_abs() as usize) < self.n_h
            && (3 * k[2].unsigned_abs() as usize) < self.n_v
    }

    /// Flat indices of all modes kept by the 2/3 rule, in storage order.
    pub fn retained_modes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_retained(i)).collect()
    }

    /// Physical coordinate of grid point `i` on `axis`.
    pub fn coordinate(&self, axis: Axis, i: usize) -> f64 {
        self.axis_box(axis) * i as f64 / self.axis_len(axis) as f64
    }

    /// Largest retained frequency magnitude along `axis`.
    pub fn max_retained_frequency(&self, axis: Axis) -> f64 {
        let n = self.axis_len(axis);
        let kmax = (n - 1) / 3;
        self.frequency_step(axis) * kmax as f64
    }
}
