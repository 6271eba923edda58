use serde::Serialize;

use crate::field::StateVector;
use crate::lp::bump::block_multiplier;
use crate::lp::dyadic::{q_max, Direction};
use crate::ops::grad_h_norm_sq_state;
use crate::norms::h0s_state;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `½‖U‖²_{L²}`
    pub l2_energy: f64,
    /// `‖∇_h U‖²_{L²}`
    pub h_gradient: f64,
    pub h0s: f64,
    /// Running `L̃^∞([0,t], H^{0,s})` norm, sampled on the step grid.
    pub ltilde_inf: f64,
    /// Running `L̃²([0,t], H^{0,s})` norm of `∇_h U`, trapezoidal in time.
    pub ltilde_2_grad: f64,
    /// Coupled-split runs only: running `L̃^∞ H^{0,s}` norm of `Ũ`.
    pub tilde_ltilde_inf: Option<f64>,
    /// `½‖U(t)‖² − ½‖U₀‖² + ∫ν‖∇_h U‖²`.
    pub energy_residual: f64,
    pub blowup: bool,
}

/// Per-block energies `‖Δ^v_q U‖²` and `‖Δ^v_q ∇_h U‖²`, `q = −1..=q_max`.
pub fn vertical_block_energies(s: &StateVector) -> (Vec<f64>, Vec<f64>) {
    let g = *s.grid();
    let qm = q_max(&g, Direction::V);
    let nq = (qm + 2) as usize;
    let (mut e, mut d) = (vec![0.0; nq], vec![0.0; nq]);
    for idx in 0..g.len() {
        let m = s.mode6(idx);
        let a: f64 = m.iter().map(|x| x.norm_sqr()).sum();
        if a == 0.0 {
            continue;
        }
        let xi = g.xi(idx);
        let kh2 = xi[0] * xi[0] + xi[1] * xi[1];
        for q in -1..=qm {
            let w = block_multiplier(q, xi[2].abs());
            if w != 0.0 {
                e[(q + 1) as usize] += w * w * a;
                d[(q + 1) as usize] += w * w * a * kh2;
            }
        }
    }
    let pf = g.parseval_factor();
    e.iter_mut().chain(d.iter_mut()).for_each(|x| *x *= pf);
    (e, d)
}

/// Discrete realization of the Chemin–Lerner norms: `sup_t` and `∫dt` are
/// taken inside the block sum over the sampled times.
#[derive(Debug, Clone)]
pub struct BlockTracker {
    s: f64,
    sup: Vec<f64>,
    integral: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
}

impl BlockTracker {
    pub fn new(s: f64) -> Self {
        Self {
            s,
            sup: Vec::new(),
            integral: Vec::new(),
            last: None,
        }
    }

    pub fn update(&mut self, t: f64, state: &StateVector) {
        let (e, d) = vertical_block_energies(state);
        if self.sup.len() < e.len() {
            self.sup.resize(e.len(), 0.0);
            self.integral.resize(e.len(), 0.0);
        }
        for (s, x) in self.sup.iter_mut().zip(&e) {
            *s = s.max(*x);
        }
        if let Some((t0, d0)) = &self.last {
            let h = t - t0;
            for ((acc, a), b) in self.integral.iter_mut().zip(d0).zip(&d) {
                *acc += 0.5 * h * (a + b);
            }
        }
        self.last = Some((t, d));
    }

    fn weighted(&self, v: &[f64]) -> f64 {
        v.iter()
            .enumerate()
            .map(|(k, x)| f64::powf(2.0, 2.0 * (k as f64 - 1.0) * self.s) * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn ltilde_inf(&self) -> f64 {
        self.weighted(&self.sup)
    }

    pub fn ltilde_2(&self) -> f64 {
        self.weighted(&self.integral)
    }
}

pub(crate) fn snapshot(
    t: f64,
    state: &StateVector,
    s: f64,
    e0: f64,
    dissipated: f64,
    tracker: &BlockTracker,
    tilde: Option<&BlockTracker>,
) -> DiagnosticsRecord {
    let l2_energy = 0.5 * state.norm_l2_sq();
    DiagnosticsRecord {
        t,
        l2_energy,
        h_gradient: grad_h_norm_sq_state(state),
        h0s: h0s_state(state, s),
        ltilde_inf: tracker.ltilde_inf(),
        ltilde_2_grad: tracker.ltilde_2(),
        tilde_ltilde_inf: tilde.map(|x| x.ltilde_inf()),
        energy_residual: l2_energy - e0 + dissipated,
        blowup: false,
    }
}
