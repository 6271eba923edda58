//! One time step of `∂_t U = 𝔹U + N(Ū + U)`, where `Ū` is an optional
//! background solving the linear system exactly (zero in direct runs).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{StateVector, C64};
use crate::grid::Grid;
use crate::linear::{assemble_symbol, is_degenerate, Mat6, ModelParams, PropagatorSet};
use crate::solver::config::Integrator;
use crate::solver::rhs::{dissipation_rate, nonlinear_rhs};

/// Per-mode 6×6 matrices on a mirror-closed mode list.
#[derive(Debug, Clone)]
struct ModeOperator {
    grid: Grid,
    modes: Vec<usize>,
    mats: Vec<Mat6>,
}

impl ModeOperator {
    fn build(grid: &Grid, modes: &[usize], f: impl Fn([f64; 3]) -> Result<Mat6> + Sync) -> Result<Self> {
        let mats: Result<Vec<Mat6>> = modes
            .par_iter()
            .map(|&idx| {
                let canon = idx.min(grid.mirror(idx));
                let m = f(grid.xi_op(canon))?;
                Ok(if canon == idx { m } else { m.map(|x| x.conj()) })
            })
            .collect();
        Ok(Self {
            grid: *grid,
            modes: modes.to_vec(),
            mats: mats?,
        })
    }

    fn apply(&self, s: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(&self.grid);
        for (&idx, m) in self.modes.iter().zip(&self.mats) {
            let v = s.mode6(idx);
            let mut w = [C64::new(0.0, 0.0); 6];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = (0..6).map(|j| m[(i, j)] * v[j]).sum();
            }
            out.set_mode6(idx, &w);
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Linear {
    IfRk4 { half: PropagatorSet, full: PropagatorSet },
    ImexEuler { solve: ModeOperator, full: PropagatorSet },
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: StateVector,
    /// Background advanced exactly by `dt`.
    pub background: Option<StateVector>,
    /// `∫ ν‖∇_h(Ū+U)‖²` over the step, by the integrator's own quadrature.
    pub dissipated: f64,
}

pub struct Stepper<'a> {
    fft: &'a Fft3,
    p: ModelParams,
    dt: f64,
    linear: Linear,
}

impl<'a> Stepper<'a> {
    pub fn new(fft: &'a Fft3, p: &ModelParams, dt: f64, integrator: Integrator, eigen_route: bool) -> Result<Self> {
        p.validate()?;
        let g = *fft.grid();
        let modes = g.retained_modes();
        let region = |xi: [f64; 3]| !is_degenerate(xi);
        let region: Option<&(dyn Fn([f64; 3]) -> bool + Sync)> = if eigen_route { Some(&region) } else { None };
        let full = PropagatorSet::build(&g, p, dt, &modes, region)?;
        let linear = match integrator {
            Integrator::IfRk4 => Linear::IfRk4 {
                half: PropagatorSet::build(&g, p, 0.5 * dt, &modes, region)?,
                full,
            },
            Integrator::ImexEuler => {
                let solve = ModeOperator::build(&g, &modes, |xi| {
                    if xi == [0.0; 3] {
                        return Ok(Mat6::identity());
                    }
                    let m = Mat6::identity() - assemble_symbol(xi, p)? * C64::new(dt, 0.0);
                    m.try_inverse().ok_or_else(|| Error::Parameter(format!("I − dt𝔹 is singular at ξ = {xi:?}")))
                })?;
                Linear::ImexEuler { solve, full }
            }
        };
        Ok(Self { fft, p: *p, dt, linear })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Exact linear flow over one step.
    pub fn propagate(&self, s: &StateVector) -> StateVector {
        match &self.linear {
            Linear::IfRk4 { full, .. } | Linear::ImexEuler { full, .. } => full.apply(s),
        }
    }

    fn n(&self, s: &StateVector, bg: Option<&StateVector>) -> Result<(StateVector, f64)> {
        let total = match bg {
            Some(b) => s.add(b),
            None => s.clone(),
        };
        Ok((nonlinear_rhs(self.fft, &total)?, dissipation_rate(&total, &self.p)))
    }

    pub fn step(&self, u: &StateVector, bg: Option<&StateVector>) -> Result<StepOutput> {
        let h = self.dt;
        match &self.linear {
            Linear::IfRk4 { half, full } => {
                let (bg_half, bg_full) = match bg {
                    Some(b) => (Some(half.apply(b)), Some(full.apply(b))),
                    None => (None, None),
                };
                let (k1, d1) = self.n(u, bg)?;
                let mut a = u.clone();
                a.axpy(0.5 * h, &k1);
                let u2 = half.apply(&a);
                let (k2, d2) = self.n(&u2, bg_half.as_ref())?;
                let eu = half.apply(u);
                let mut u3 = eu.clone();
                u3.axpy(0.5 * h, &k2);
                let (k3, d3) = self.n(&u3, bg_half.as_ref())?;
                let mut u4 = full.apply(u);
                u4.axpy(h, &half.apply(&k3));
                let (k4, d4) = self.n(&u4, bg_full.as_ref())?;
                // U + h/6 (E_h k1 + 2E_{h/2}(k2 + k3)) + h/6 k4, with E_h applied to U
                let mut acc = u.clone();
                acc.axpy(h / 6.0, &k1);
                let mut mid = k2.clone();
                mid.axpy(1.0, &k3);
                let mut next = full.apply(&acc);
                next.axpy(h / 3.0, &half.apply(&mid));
                next.axpy(h / 6.0, &k4);
                Ok(StepOutput {
                    state: next,
                    background: bg_full,
                    dissipated: h / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4),
                })
            }
            Linear::ImexEuler { solve, full } => {
                let (k, d) = self.n(u, bg)?;
                let mut a = u.clone();
                a.axpy(h, &k);
                Ok(StepOutput {
                    state: solve.apply(&a),
                    background: bg.map(|b| full.apply(b)),
                    dissipated: h * d,
                })
            }
        }
    }
}
