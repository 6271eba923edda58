//! Spectral and physical containers.
//!
//! Spectral coefficients follow the normalization documented on
//! [`Grid`]: forward transform unscaled, so `‖u‖²_{L²} = parseval_factor ·
//! Σ|û|²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Complex Fourier coefficients of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalar {
    pub grid: Grid,
    pub c: Vec<C64>,
}

impl SpectralScalar {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: *grid,
            c: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Grid, c: Vec<C64>) -> Result<Self> {
        check_len(grid, c.len())?;
        Ok(Self { grid: *grid, c })
    }

    /// `Σ|û|²` times the Parseval factor.
    pub fn norm_l2_sq(&self) -> f64 {
        self.grid.parseval_factor() * sum_sq(&self.c)
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }
}

/// Complex Fourier coefficients of a 3-component vector field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: Grid,
    pub c: [Vec<C64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![ZERO; grid.len()];
        Self {
            grid: *grid,
            c: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_components(grid: &Grid, c: [Vec<C64>; 3]) -> Result<Self> {
        for comp in &c {
            check_len(grid, comp.len())?;
        }
        Ok(Self { grid: *grid, c })
    }

    #[inline]
    pub fn mode(&self, idx: usize) -> [C64; 3] {
        [self.c[0][idx], self.c[1][idx], self.c[2][idx]]
    }

    #[inline]
    pub fn set_mode(&mut self, idx: usize, v: [C64; 3]) {
        for (comp, x) in self.c.iter_mut().zip(v) {
            comp[idx] = x;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for comp in &mut self.c {
            comp.iter_mut().for_each(|x| *x *= a);
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// `self += a · other`.
    pub fn axpy(&mut self, a: f64, other: &Self) {
        debug_assert_eq!(self.grid, other.grid);
        for (x, y) in self.c.iter_mut().zip(&other.c) {
            x.iter_mut().zip(y).for_each(|(x, y)| *x += a * y);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Multiply every mode by a real scalar multiplier `m(idx)`.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for comp in &mut out.c {
            for (idx, x) in comp.iter_mut().enumerate() {
                *x *= m(idx);
            }
        }
        out
    }

    /// Real L² inner product `⟨self, other⟩`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        let mut s = 0.0;
        for (x, y) in self.c.iter().zip(&other.c) {
            s += x.iter().zip(y).map(|(a, b)| (a * b.conj()).re).sum::<f64>();
        }
        self.grid.parseval_factor() * s
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.grid.parseval_factor() * self.c.iter().map(|c| sum_sq(c)).sum::<f64>()
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.c
            .iter()
            .flat_map(|c| c.iter().map(|x| x.norm()))
            .fold(0.0, f64::max)
    }

    /// Largest `|ξ·û(ξ)| / |û(ξ)|` over nonzero modes (operator frequencies).
    pub fn divergence_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let xi = self.grid.xi_op(idx);
            let m = self.mode(idx);
            let amp = m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if amp == 0.0 {
                continue;
            }
            let xn = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            if xn == 0.0 {
                continue;
            }
            let d = (m[0] * xi[0] + m[1] * xi[1] + m[2] * xi[2]).norm();
            worst = worst.max(d / (xn * amp));
        }
        worst
    }

    /// Divergence-free to the invariant tolerance `10⁻¹²`.
    pub fn is_divergence_free(&self) -> bool {
        self.divergence_defect() <= 1e-12
    }

    /// Largest `|û(−k) − conj(û(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs_coeff();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for comp in &self.c {
            for idx in 0..self.grid.len() {
                let m = self.grid.mirror(idx);
                worst = worst.max((comp[m] - comp[idx].conj()).norm());
            }
        }
        worst / scale
    }

    /// Zero every mode outside the 2/3 rule.
    pub fn dealias(&mut self) {
        let g = self.grid;
        for comp in &mut self.c {
            for (idx, x) in comp.iter_mut().enumerate() {
                if !g.is_retained(idx) {
                    *x = ZERO;
                }
            }
        }
    }

    pub fn dealiased(&self) -> Self {
        let mut out = self.clone();
        out.dealias();
        out
    }

    /// Whether all modes outside the 2/3 rule vanish.
    pub fn is_dealiased(&self) -> bool {
        (0..self.grid.len())
            .filter(|&i| !self.grid.is_retained(i))
            .all(|i| self.c.iter().all(|c| c[i] == ZERO))
    }

    pub fn is_finite(&self) -> bool {
        self.c
            .iter()
            .all(|c| c.iter().all(|x| x.re.is_finite() && x.im.is_finite()))
    }
}

/// Real samples of a 3-component field in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    pub grid: Grid,
    pub v: [Vec<f64>; 3],
}

impl PhysicalField {
    pub fn zeros(grid: &Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid: *grid,
            v: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_components(grid: &Grid, v: [Vec<f64>; 3]) -> Result<Self> {
        for comp in &v {
            check_len(grid, comp.len())?;
        }
        Ok(Self { grid: *grid, v })
    }

    /// Sample `f(x)` at every grid point.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let (a, b, c) = grid.coords(idx);
            let x = [
                grid.coordinate(0, a),
                grid.coordinate(1, b),
                grid.coordinate(2, c),
            ];
            let val = f(x);
            for k in 0..3 {
                out.v[k][idx] = val[k];
            }
        }
        out
    }

    /// Riemann-sum L² norm squared.
    pub fn norm_l2_sq(&self) -> f64 {
        self.grid.cell_volume()
            * self
                .v
                .iter()
                .map(|c| c.iter().map(|x| x * x).sum::<f64>())
                .sum::<f64>()
    }
}

/// The pair `U = (u, b)` of velocity and magnetic field.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub u: SpectralField,
    pub b: SpectralField,
}

impl StateVector {
    pub fn new(u: SpectralField, b: SpectralField) -> Result<Self> {
        if u.grid != b.grid {
            return Err(Error::Config("u and b live on different grids".into()));
        }
        Ok(Self { u, b })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            u: SpectralField::zeros(grid),
            b: SpectralField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.u.grid
    }

    /// Six spectral components `(u₁,u₂,u₃,b₁,b₂,b₃)` at one mode.
    #[inline]
    pub fn mode6(&self, idx: usize) -> [C64; 6] {
        [
            self.u.c[0][idx],
            self.u.c[1][idx],
            self.u.c[2][idx],
            self.b.c[0][idx],
            self.b.c[1][idx],
            self.b.c[2][idx],
        ]
    }

    #[inline]
    pub fn set_mode6(&mut self, idx: usize, v: &[C64; 6]) {
        for k in 0..3 {
            self.u.c[k][idx] = v[k];
            self.b.c[k][idx] = v[k + 3];
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Self) {
        self.u.axpy(a, &other.u);
        self.b.axpy(a, &other.b);
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self {
            u: self.u.scaled(a),
            b: self.b.scaled(a),
        }
    }

    pub fn apply_multiplier(&self, m: impl Fn(usize) -> f64 + Copy) -> Self {
        Self {
            u: self.u.apply_multiplier(m),
            b: self.b.apply_multiplier(m),
        }
    }

    pub fn inner(&self, other: &Self) -> f64 {
        self.u.inner(&other.u) + self.b.inner(&other.b)
    }

    pub fn norm_l2_sq(&self) -> f64 {
        self.u.norm_l2_sq() + self.b.norm_l2_sq()
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_l2_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.b.is_finite()
    }

    pub fn dealias(&mut self) {
        self.u.dealias();
        self.b.dealias();
    }

    pub fn divergence_defect(&self) -> f64 {
        self.u.divergence_defect().max(self.b.divergence_defect())
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.u.hermitian_defect().max(self.b.hermitian_defect())
    }
}

fn check_len(grid: &Grid, got: usize) -> Result<()> {
    if got != grid.len() {
        return Err(Error::Shape {
            expected: grid.len(),
            got,
        });
    }
    Ok(())
}

fn sum_sq(c: &[C64]) -> f64 {
    c.iter().map(|x| x.norm_sqr()).sum()
}
