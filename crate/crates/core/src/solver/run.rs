//! Run driver, blow-up handling and the twin-run divergence test.

use serde::Serialize;

use crate::cutoff::{split_initial_data, CutoffParams};
use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::StateVector;
use crate::linear::ModelParams;
use crate::norms::{grad_h_h0s, h0s, h0s_state};
use crate::solver::config::{RunMode, SolverConfig};
use crate::solver::diagnostics::{snapshot, BlockTracker, DiagnosticsRecord};
use crate::solver::stepper::Stepper;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    BlowUp { t: f64, reason: String },
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    #[serde(skip)]
    pub final_state: StateVector,
    pub status: RunStatus,
    pub steps_taken: usize,
    pub warnings: Vec<String>,
    /// Coupled-split runs: `ε^α/(2C̃)`.
    pub bootstrap_threshold: Option<f64>,
    /// Coupled-split runs: whether `‖Ũ‖_{L̃^∞H^{0,s}}` stayed below the
    /// threshold for the whole run.
    pub bootstrap_held: Option<bool>,
}

/// `dt · max|u| · max|ξ|` over the retained modes.
pub fn cfl_number(fft: &Fft3, s: &StateVector, dt: f64) -> Result<f64> {
    let g = *fft.grid();
    let (u, b) = crate::ops::to_physical(fft, s)?;
    let mut vmax = 0.0f64;
    for k in 0..g.len() {
        let a = (u.v[0][k].powi(2) + u.v[1][k].powi(2) + u.v[2][k].powi(2)).sqrt();
        let c = (b.v[0][k].powi(2) + b.v[1][k].powi(2) + b.v[2][k].powi(2)).sqrt();
        vmax = vmax.max(a).max(c);
    }
    let kmax = g.max_retained_frequency(0).max(g.max_retained_frequency(2));
    Ok(dt * vmax * kmax)
}

/// Integrates from `u0` (dealiased first). In coupled-split mode `cutoff`
/// defines `Ū₀ = Ψ(D)U₀`; records then describe `Ū + Ũ`.
pub fn run(u0: &StateVector, cfg: &SolverConfig, p: &ModelParams, mode: RunMode, cutoff: Option<&CutoffParams>) -> Result<RunResult> {
    let n_steps = cfg.steps()?;
    if u0.divergence_defect() > crate::ops::DIV_FREE_TOL {
        return Err(Error::InvariantViolation(format!(
            "initial data is not divergence-free (defect {:e})",
            u0.divergence_defect()
        )));
    }
    let g = *u0.grid();
    let fft = Fft3::new(&g);
    let mut u0 = u0.clone();
    u0.dealias();
    let stepper = Stepper::new(&fft, p, cfg.dt, cfg.integrator, cfg.eigen_route)?;

    let mut warnings = Vec::new();
    let cfl = cfl_number(&fft, &u0, cfg.dt)?;
    if cfl > 1.0 {
        warnings.push(format!("advisory: dt·max|U|·max|ξ| = {cfl:.3} exceeds 1"));
    }

    let (mut state, mut bg) = match mode {
        RunMode::Direct => (u0.clone(), None),
        RunMode::CoupledSplit => {
            let c = cutoff.ok_or_else(|| Error::Config("coupled-split mode needs cutoff parameters".into()))?;
            let (bar, tilde) = split_initial_data(&u0, c);
            (tilde, Some(bar))
        }
    };
    let total = |s: &StateVector, b: &Option<StateVector>| match b {
        Some(b) => s.add(b),
        None => s.clone(),
    };

    let s_reg = p.s;
    let e0 = 0.5 * u0.norm_l2_sq();
    let h0 = h0s_state(&u0, s_reg);
    let limit = cfg.blowup_factor * h0.max(f64::MIN_POSITIVE);
    let mut tracker = BlockTracker::new(s_reg);
    let mut tilde_tracker = bg.as_ref().map(|_| BlockTracker::new(s_reg));
    tracker.update(0.0, &u0);
    if let Some(tt) = tilde_tracker.as_mut() {
        tt.update(0.0, &state);
    }
    let mut dissipated = 0.0;
    let mut records = vec![snapshot(0.0, &u0, s_reg, e0, 0.0, &tracker, tilde_tracker.as_ref())];
    let mut status = RunStatus::Completed;
    let mut steps_taken = 0;

    for n in 1..=n_steps {
        let t = n as f64 * cfg.dt;
        let out = match stepper.step(&state, bg.as_ref()) {
            Ok(o) => o,
            Err(Error::BlowUp { reason, .. }) => {
                status = RunStatus::BlowUp { t, reason };
                break;
            }
            Err(e) => return Err(e),
        };
        let tot = total(&out.state, &out.background);
        let norm = h0s_state(&tot, s_reg);
        if !tot.is_finite() || !norm.is_finite() || norm > limit {
            status = RunStatus::BlowUp {
                t,
                reason: format!("‖U‖_H^(0,s) = {norm:e} exceeds {limit:e}"),
            };
            break;
        }
        state = out.state;
        bg = out.background;
        dissipated += out.dissipated;
        steps_taken = n;
        tracker.update(t, &tot);
        if let Some(tt) = tilde_tracker.as_mut() {
            tt.update(t, &state);
        }
        if n % cfg.output_every == 0 || n == n_steps {
            records.push(snapshot(t, &tot, s_reg, e0, dissipated, &tracker, tilde_tracker.as_ref()));
        }
    }

    let final_state = total(&state, &bg);
    if let RunStatus::BlowUp { .. } = status {
        let t = steps_taken as f64 * cfg.dt;
        let mut r = snapshot(t, &final_state, s_reg, e0, dissipated, &tracker, tilde_tracker.as_ref());
        r.blowup = true;
        if records.last().map_or(true, |x| x.t != t) {
            records.push(r);
        } else {
            *records.last_mut().unwrap() = r;
        }
    }

    let (bootstrap_threshold, bootstrap_held) = match mode {
        RunMode::CoupledSplit => {
            let thr = p.eps.powf(p.alpha) / (2.0 * cfg.bootstrap_c);
            let held = records.iter().all(|r| r.tilde_ltilde_inf.map_or(true, |x| x <= thr));
            (Some(thr), Some(held))
        }
        RunMode::Direct => (None, None),
    };

    Ok(RunResult {
        records,
        final_state,
        status,
        steps_taken,
        warnings,
        bootstrap_threshold,
        bootstrap_held,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TwinSample {
    pub t: f64,
    /// `‖U₁ − U₂‖_{H^{0,s−1}}`
    pub diff: f64,
    /// `∫₀ᵗ f`
    pub f_integral: f64,
    /// `log(‖ΔU(t)‖² / ‖ΔU(0)‖²)`
    pub log_growth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwinReport {
    pub samples: Vec<TwinSample>,
    /// Smallest `C` with `log_growth ≤ C ∫f` at every sample (zero when the
    /// difference never grows).
    pub c_fit: f64,
    /// Set when either run blew up; samples stop there.
    pub partial: bool,
}

/// `f(t) = (1 + Σ‖·‖²_{H^{0,s}}) (1 + Σ‖∇_h ·‖²_{H^{0,s}})` over both solutions.
fn gronwall_f(a: &StateVector, b: &StateVector, s: f64) -> f64 {
    let mut n = 1.0;
    let mut d = 1.0;
    for x in [&a.u, &a.b, &b.u, &b.b] {
        n += h0s(x, s).powi(2);
        d += grad_h_h0s(x, s).powi(2);
    }
    n * d
}

/// Runs `u0` and `u0 + delta` side by side and tracks their distance in
/// `H^{0,s−1}` against the Gronwall envelope.
pub fn twin_run_divergence(u0: &StateVector, delta: &StateVector, cfg: &SolverConfig, p: &ModelParams) -> Result<TwinReport> {
    let n_steps = cfg.steps()?;
    let g = *u0.grid();
    let fft = Fft3::new(&g);
    let stepper = Stepper::new(&fft, p, cfg.dt, cfg.integrator, cfg.eigen_route)?;
    let mut a = u0.clone();
    a.dealias();
    let mut b = u0.add(delta);
    b.dealias();
    let s = p.s;
    let diff = |x: &StateVector, y: &StateVector| h0s_state(&x.sub(y), s - 1.0);
    let d0 = diff(&a, &b);
    let log_growth = |d: f64| if d0 > 0.0 { 2.0 * (d / d0).ln() } else { 0.0 };
    let mut f_prev = gronwall_f(&a, &b, s);
    let mut f_int = 0.0;
    let mut samples = vec![TwinSample {
        t: 0.0,
        diff: d0,
        f_integral: 0.0,
        log_growth: 0.0,
    }];
    let limit = cfg.blowup_factor * h0s_state(&a, s).max(f64::MIN_POSITIVE);
    let mut partial = false;
    for n in 1..=n_steps {
        let (na, nb) = match (stepper.step(&a, None), stepper.step(&b, None)) {
            (Ok(x), Ok(y)) => (x.state, y.state),
            (Err(Error::BlowUp { .. }), _) | (_, Err(Error::BlowUp { .. })) => {
                partial = true;
                break;
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if [&na, &nb].iter().any(|x| !x.is_finite() || h0s_state(x, s) > limit) {
            partial = true;
            break;
        }
        a = na;
        b = nb;
        let f = gronwall_f(&a, &b, s);
        f_int += 0.5 * cfg.dt * (f_prev + f);
        f_prev = f;
        if n % cfg.output_every == 0 || n == n_steps {
            let d = diff(&a, &b);
            samples.push(TwinSample {
                t: n as f64 * cfg.dt,
                diff: d,
                f_integral: f_int,
                log_growth: log_growth(d),
            });
        }
    }
    let c_fit = samples
        .iter()
        .filter(|x| x.f_integral > 0.0)
        .map(|x| x.log_growth / x.f_integral)
        .fold(0.0, f64::max);
    Ok(TwinReport { samples, c_fit, partial })
}
