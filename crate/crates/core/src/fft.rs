//! Three-dimensional FFT on the anisotropic grid.
//!
//! Forward transforms are unscaled and inverse transforms carry `1/N`.
//! Real fields are transformed two at a time by packing them into the real
//! and imaginary parts of one complex array.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::{PhysicalField, SpectralField, SpectralScalar, C64};
use crate::grid::Grid;

#[derive(Clone)]
pub struct Fft3 {
    grid: Grid,
    fwd_h: Arc<dyn Fft<f64>>,
    inv_h: Arc<dyn Fft<f64>>,
    fwd_v: Arc<dyn Fft<f64>>,
    inv_v: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("grid", &self.grid).finish()
    }
}

fn transpose(src: &[C64], dst: &mut [C64], rows: usize, cols: usize) {
    const B: usize = 16;
    for r0 in (0..rows).step_by(B) {
        for c0 in (0..cols).step_by(B) {
            for r in r0..(r0 + B).min(rows) {
                for c in c0..(c0 + B).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}

impl Fft3 {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            grid: *grid,
            fwd_h: planner.plan_fft_forward(grid.n_h()),
            inv_h: planner.plan_fft_inverse(grid.n_h()),
            fwd_v: planner.plan_fft_forward(grid.n_v()),
            inv_v: planner.plan_fft_inverse(grid.n_v()),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn transform(&self, data: &mut [C64], forward: bool) {
        let (nh, nv) = (self.grid.n_h(), self.grid.n_v());
        let (fh, fv) = if forward {
            (&self.fwd_h, &self.fwd_v)
        } else {
            (&self.inv_h, &self.inv_v)
        };
        let mut scratch = vec![C64::new(0.0, 0.0); fh.get_inplace_scratch_len().max(fv.get_inplace_scratch_len())];
        let mut tmp = vec![C64::new(0.0, 0.0); data.len()];

        // vertical axis: contiguous lines
        fv.process_with_scratch(data, &mut scratch);

        // second horizontal axis: transpose each i1 slab
        let slab = nh * nv;
        for (s, t) in data.chunks_mut(slab).zip(tmp.chunks_mut(slab)) {
            transpose(s, t, nh, nv);
            fh.process_with_scratch(t, &mut scratch);
            transpose(t, s, nv, nh);
        }

        // first horizontal axis
        transpose(data, &mut tmp, nh, slab);
        fh.process_with_scratch(&mut tmp, &mut scratch);
        transpose(&tmp, data, slab, nh);
    }

    /// Unscaled forward DFT in place.
    pub fn forward_complex(&self, data: &mut [C64]) -> Result<()> {
        self.check(data.len())?;
        self.transform(data, true);
        Ok(())
    }

    /// Inverse DFT in place, including the `1/N` factor.
    pub fn inverse_complex(&self, data: &mut [C64]) -> Result<()> {
        self.check(data.len())?;
        self.transform(data, false);
        let s = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|x| *x *= s);
        Ok(())
    }

    fn check(&self, len: usize) -> Result<()> {
        if len != self.grid.len() {
            return Err(Error::Shape {
                expected: self.grid.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// Forward transform of two real arrays with one complex FFT.
    pub fn forward_pair(&self, a: &[f64], b: &[f64]) -> Result<(Vec<C64>, Vec<C64>)> {
        self.check(a.len())?;
        self.check(b.len())?;
        let mut z: Vec<C64> = a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect();
        self.transform(&mut z, true);
        let n = z.len();
        let mut fa = vec![C64::new(0.0, 0.0); n];
        let mut fb = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            let zm = z[self.grid.mirror(k)].conj();
            fa[k] = 0.5 * (z[k] + zm);
            let d = 0.5 * (z[k] - zm);
            // d / i
            fb[k] = C64::new(d.im, -d.re);
        }
        Ok((fa, fb))
    }

    /// Inverse transform of two Hermitian spectra with one complex FFT.
    /// Any anti-Hermitian part of the inputs is discarded.
    pub fn inverse_pair(&self, fa: &[C64], fb: &[C64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(fa.len())?;
        self.check(fb.len())?;
        let mut z: Vec<C64> = fa
            .iter()
            .zip(fb)
            .map(|(x, y)| C64::new(x.re - y.im, x.im + y.re))
            .collect();
        self.inverse_complex(&mut z)?;
        Ok((z.iter().map(|x| x.re).collect(), z.iter().map(|x| x.im).collect()))
    }

    pub fn forward_scalar(&self, a: &[f64]) -> Result<SpectralScalar> {
        self.check(a.len())?;
        let mut z: Vec<C64> = a.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.transform(&mut z, true);
        SpectralScalar::from_coeffs(&self.grid, z)
    }

    pub fn inverse_scalar(&self, s: &SpectralScalar) -> Result<Vec<f64>> {
        let mut z = s.c.clone();
        self.inverse_complex(&mut z)?;
        Ok(z.into_iter().map(|x| x.re).collect())
    }

    /// Transform a batch of real arrays, two per complex FFT.
    pub fn forward_many(&self, arrays: &[&[f64]]) -> Result<Vec<Vec<C64>>> {
        let mut out = Vec::with_capacity(arrays.len());
        for pair in arrays.chunks(2) {
            if pair.len() == 2 {
                let (a, b) = self.forward_pair(pair[0], pair[1])?;
                out.push(a);
                out.push(b);
            } else {
                out.push(self.forward_scalar(pair[0])?.c);
            }
        }
        Ok(out)
    }

    /// Inverse-transform a batch of Hermitian spectra, two per complex FFT.
    pub fn inverse_many(&self, spectra: &[&[C64]]) -> Result<Vec<Vec<f64>>> {
        let zero = vec![C64::new(0.0, 0.0); self.grid.len()];
        let mut out = Vec::with_capacity(spectra.len());
        for pair in spectra.chunks(2) {
            let second = if pair.len() == 2 { pair[1] } else { &zero[..] };
            let (a, b) = self.inverse_pair(pair[0], second)?;
            out.push(a);
            if pair.len() == 2 {
                out.push(b);
            }
        }
        Ok(out)
    }

    pub fn forward(&self, p: &PhysicalField) -> Result<SpectralField> {
        let mut v = self.forward_many(&[&p.v[0], &p.v[1], &p.v[2]])?.into_iter();
        let c = [v.next().unwrap(), v.next().unwrap(), v.next().unwrap()];
        SpectralField::from_components(&self.grid, c)
    }

    pub fn inverse(&self, f: &SpectralField) -> Result<PhysicalField> {
        let mut v = self.inverse_many(&[&f.c[0], &f.c[1], &f.c[2]])?.into_iter();
        let c = [v.next().unwrap(), v.next().unwrap(), v.next().unwrap()];
        PhysicalField::from_components(&self.grid, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_real(g: &Grid, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn constant_goes_to_mode_zero() {
        let g = Grid::new(8, 4, 1.0, 2.0).unwrap();
        let f = Fft3::new(&g);
        let s = f.forward_scalar(&vec![1.0; g.len()]).unwrap();
        assert!((s.c[0].re - g.len() as f64).abs() < 1e-12);
        assert!(s.c[1..].iter().all(|x| x.norm() < 1e-12));
    }

    #[test]
    fn plane_wave_hits_one_mode() {
        let g = Grid::new(8, 6, 3.0, 2.0).unwrap();
        let f = Fft3::new(&g);
        let mut z: Vec<C64> = (0..g.len())
            .map(|i| {
                let (a, _, _) = g.coords(i);
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI * g.coordinate(0, a) / 3.0)
            })
            .collect();
        f.forward_complex(&mut z).unwrap();
        let hit = g.mode_index([1, 0, 0]).unwrap();
        for (i, x) in z.iter().enumerate() {
            if i == hit {
                assert!((x.re - g.len() as f64).abs() < 1e-10);
            } else {
                assert!(x.norm() < 1e-10);
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = Grid::new(12, 8, 2.0, 5.0).unwrap();
        let f = Fft3::new(&g);
        let a = random_real(&g, 1);
        let b = random_real(&g, 2);
        let (fa, fb) = f.forward_pair(&a, &b).unwrap();
        let sa = f.forward_scalar(&a).unwrap();
        for k in 0..g.len() {
            assert!((fa[k] - sa.c[k]).norm() < 1e-12 * g.len() as f64);
        }
        let (ra, rb) = f.inverse_pair(&fa, &fb).unwrap();
        let err: f64 = a.iter().zip(&ra).chain(b.iter().zip(&rb)).map(|(x, y)| (x - y).powi(2)).sum();
        let nrm: f64 = a.iter().chain(&b).map(|x| x * x).sum();
        assert!((err / nrm).sqrt() < 1e-12);

        let phys = g.cell_volume() * a.iter().map(|x| x * x).sum::<f64>();
        let spec = g.parseval_factor() * fa.iter().map(|x| x.norm_sqr()).sum::<f64>();
        assert!((phys - spec).abs() < 1e-12 * phys);
    }

    #[test]
    fn shape_mismatch_is_error() {
        let g = Grid::cube(4).unwrap();
        let f = Fft3::new(&g);
        assert!(matches!(f.forward_scalar(&[0.0; 5]), Err(Error::Shape { .. })));
    }
}
