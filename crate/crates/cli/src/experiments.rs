//! One driver per experiment kind. Each writes its tables into the output
//! directory and returns the artifacts, derived values and status that go
//! into the manifest.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use rotmhd::cutoff::{split_initial_data, CutoffParams};
use rotmhd::dispersion::{kernel_decay_fit, kernel_sup, kernel_tau_fit, strichartz_scaling_sweep, KernelSpec, SupSample};
use rotmhd::init::random_state_with;
use rotmhd::linear::symbol::{assemble_symbol, cramer_coefficients, cramer_matrix, det_d_closed_form, eigenvalues, eigenvectors, is_degenerate, Vec6};
use rotmhd::linear::{eigen_propagator, expm_oracle, ModelParams};
use rotmhd::norms::{h0s_state, y_norm_state};
use rotmhd::solver::{run, RunMode, RunResult, RunStatus};
use rotmhd::{Grid, StateVector};

use crate::checks::{matched_numeric_eigenvalues, random_div_free_mode, run_named, sample_annulus};
use crate::config::{ExperimentConfig, InitSection, ModelSection};
use crate::error::CliError;
use crate::output::{write_json, write_table, Artifact, Cell, Status, Table};

pub struct Outcome {
    pub status: Status,
    pub artifacts: Vec<Artifact>,
    pub derived: Value,
    pub warnings: Vec<String>,
}

/// Seeded initial data scaled to the configured norm target. `nu_ref` is the
/// viscosity entering the small-data threshold.
pub fn initial_state(grid: &Grid, init: &InitSection, s: f64, nu_ref: f64, seed: u64) -> Result<StateVector, CliError> {
    let mut u = random_state_with(grid, &init.spec(), init.b_weight, seed)?;
    u.dealias();
    let scale = if let Some(l2) = init.l2 {
        l2 / u.norm_l2()
    } else if let Some(h) = init.h0s {
        h / h0s_state(&u, s)
    } else {
        let m = init.threshold_multiple.expect("validated");
        m * init.threshold_c * nu_ref / h0s_state(&u, s)
    };
    Ok(u.scaled(scale))
}

fn diagnostics_table(r: &RunResult) -> Table {
    let mut t = Table::new(
        "diagnostics.csv",
        &[
            ("t", "time"),
            ("l2_energy", "½‖U‖² in L²"),
            ("h_gradient", "‖∇_h U‖² in L²"),
            ("h0s", "‖U‖ in H^{0,s}"),
            ("ltilde_inf", "running Chemin–Lerner L̃^∞ H^{0,s} norm of U on the step grid"),
            ("ltilde_2_grad", "running L̃² H^{0,s} norm of ∇_h U, trapezoidal in time"),
            ("tilde_ltilde_inf", "coupled-split only: running L̃^∞ H^{0,s} norm of the remainder Ũ"),
            ("energy_residual", "½‖U‖² − ½‖U₀‖² + ∫ν‖∇_h U‖²"),
            ("blowup", "record written at a blow-up stop"),
        ],
    );
    for x in &r.records {
        t.push(vec![
            x.t.into(),
            x.l2_energy.into(),
            x.h_gradient.into(),
            x.h0s.into(),
            x.ltilde_inf.into(),
            x.ltilde_2_grad.into(),
            x.tilde_ltilde_inf.into(),
            x.energy_residual.into(),
            x.blowup.into(),
        ]);
    }
    t
}

#[derive(Debug, Clone, Serialize)]
struct RunSummary<'a> {
    eps: f64,
    alpha: f64,
    mode: RunMode,
    initial_l2: f64,
    initial_h0s: f64,
    initial_y_norm: f64,
    initial_remainder_h0s: Option<f64>,
    steps_taken: usize,
    status: &'a RunStatus,
    bootstrap_threshold: Option<f64>,
    bootstrap_held: Option<bool>,
    sup_tilde: Option<f64>,
    warnings: &'a [String],
}

/// One solver run with its tables; shared by `simulate` and every sweep
/// entry, so a one-entry sweep reproduces `simulate` byte for byte.
fn simulate_into(dir: &Path, u0: &StateVector, cfg: &ExperimentConfig, p: &ModelParams, mode: RunMode, cutoff: Option<&CutoffParams>) -> Result<(RunResult, Vec<Artifact>), CliError> {
    let solver = cfg.solver()?;
    let r = run(u0, solver, p, mode, cutoff)?;
    let remainder = cutoff.map(|c| h0s_state(&split_initial_data(u0, c).1, p.s));
    let summary = RunSummary {
        eps: p.eps,
        alpha: p.alpha,
        mode,
        initial_l2: u0.norm_l2(),
        initial_h0s: h0s_state(u0, p.s),
        initial_y_norm: y_norm_state(u0, p.s, p.eta),
        initial_remainder_h0s: remainder,
        steps_taken: r.steps_taken,
        status: &r.status,
        bootstrap_threshold: r.bootstrap_threshold,
        bootstrap_held: r.bootstrap_held,
        sup_tilde: r.records.last().and_then(|x| x.tilde_ltilde_inf),
        warnings: &r.warnings,
    };
    let arts = vec![write_table(dir, &diagnostics_table(&r))?, write_json(dir, "summary.json", &summary)?];
    Ok((r, arts))
}

fn status_of(r: &RunResult) -> Status {
    match r.status {
        RunStatus::Completed => Status::Success,
        RunStatus::BlowUp { .. } => Status::BlowUp,
    }
}

pub fn simulate(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let g = cfg.grid()?.build()?;
    let model = cfg.model()?;
    let p = model.params()?;
    let mode = cfg.run_mode();
    let cutoff = match (mode, &cfg.cutoff) {
        (RunMode::CoupledSplit, Some(c)) => Some(c.resolve(model, p.eps)?),
        (RunMode::CoupledSplit, None) => return Err(CliError::Config("coupled-split mode needs a [cutoff] table".into())),
        (RunMode::Direct, _) => None,
    };
    let u0 = initial_state(&g, cfg.init()?, p.s, p.nu.min(p.nu_b), seed)?;
    let (r, artifacts) = simulate_into(dir, &u0, cfg, &p, mode, cutoff.as_ref())?;
    Ok(Outcome {
        status: status_of(&r),
        artifacts,
        derived: json!({ "params": p, "cutoff": cutoff }),
        warnings: r.warnings.clone(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub dir: String,
    pub cutoff: Option<CutoffParams>,
    pub status: String,
    pub blowup_t: Option<f64>,
    /// `‖Ũ‖_{L̃^∞H^{0,s}}` over the run (up to the stop time).
    pub sup_tilde: Option<f64>,
    pub ratio: Option<f64>,
    pub bootstrap_threshold: Option<f64>,
    pub bootstrap_held: Option<bool>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub data_h0s: f64,
    pub small_data_threshold: f64,
    pub entries: Vec<SweepEntry>,
    /// Ratios of completed runs are non-increasing as `ε` decreases.
    pub non_increasing: bool,
    /// `max/min` of the ratio over the two smallest `ε` that completed.
    pub smallest_pair_spread: Option<f64>,
    /// The smallest `ε` completed and the spread is at most 2.
    pub bounded: bool,
}

/// Runs the coupled-split solver once per `ε` on fixed data. A failing
/// entry is recorded and the sweep moves on; each entry owns its
/// subdirectory.
pub fn run_sweep(cfg: &ExperimentConfig, eps_list: &[f64], seed: u64, dir: &Path) -> Result<(SweepReport, Vec<Artifact>), CliError> {
    let g = cfg.grid()?.build()?;
    let model: &ModelSection = cfg.model()?;
    let cut = cfg.cutoff()?;
    let eps_max = eps_list.iter().copied().fold(0.0, f64::max);
    let p_ref = model.params_at(eps_max)?;
    let nu_ref = p_ref.nu.min(p_ref.nu_b);
    let init = cfg.init()?;
    let u0 = initial_state(&g, init, model.s, nu_ref, seed)?;
    let mut entries = Vec::new();
    let mut artifacts = Vec::new();
    for (k, &eps) in eps_list.iter().enumerate() {
        let sub = format!("eps_{k:02}");
        let sub_dir = dir.join(&sub);
        let mut entry = SweepEntry {
            eps,
            dir: sub.clone(),
            cutoff: None,
            status: "failed".into(),
            blowup_t: None,
            sup_tilde: None,
            ratio: None,
            bootstrap_threshold: None,
            bootstrap_held: None,
            error: None,
        };
        let attempt = catch_unwind(AssertUnwindSafe(|| -> Result<_, CliError> {
            let p = model.params_at(eps)?;
            let c = cut.resolve(model, eps)?;
            let (r, arts) = simulate_into(&sub_dir, &u0, cfg, &p, RunMode::CoupledSplit, Some(&c))?;
            Ok((p, c, r, arts))
        }));
        match attempt {
            Ok(Ok((p, c, r, arts))) => {
                entry.cutoff = Some(c);
                entry.sup_tilde = r.records.last().and_then(|x| x.tilde_ltilde_inf);
                entry.ratio = entry.sup_tilde.map(|x| x / eps.powf(p.alpha));
                entry.bootstrap_threshold = r.bootstrap_threshold;
                entry.bootstrap_held = r.bootstrap_held;
                match &r.status {
                    RunStatus::Completed => entry.status = "completed".into(),
                    RunStatus::BlowUp { t, .. } => {
                        entry.status = "blow-up".into();
                        entry.blowup_t = Some(*t);
                    }
                }
                artifacts.extend(arts.into_iter().map(|mut a| {
                    a.file = format!("{sub}/{}", a.file);
                    a
                }));
            }
            Ok(Err(e)) => entry.error = Some(e.to_string()),
            Err(_) => entry.error = Some("run panicked".into()),
        }
        log::info!("sweep ε = {eps:e}: {}", entry.status);
        entries.push(entry);
    }
    let mut done: Vec<&SweepEntry> = entries.iter().filter(|e| e.status == "completed").collect();
    done.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let ratios: Vec<f64> = done.iter().filter_map(|e| e.ratio).collect();
    let non_increasing = ratios.windows(2).all(|w| w[1] <= w[0]);
    let smallest_pair_spread = (ratios.len() >= 2).then(|| {
        let (a, b) = (ratios[ratios.len() - 2], ratios[ratios.len() - 1]);
        a.max(b) / a.min(b)
    });
    let eps_min = eps_list.iter().copied().fold(f64::INFINITY, f64::min);
    let smallest_done = done.last().is_some_and(|e| e.eps == eps_min);
    let report = SweepReport {
        data_h0s: h0s_state(&u0, model.s),
        small_data_threshold: init.threshold_c * nu_ref,
        bounded: smallest_done && smallest_pair_spread.is_some_and(|s| s <= 2.0),
        entries,
        non_increasing,
        smallest_pair_spread,
    };
    let mut t = Table::new(
        "sweep.csv",
        &[
            ("eps", "Rossby number"),
            ("R", "schedule outer radius"),
            ("r", "schedule inner radius R^(−β)"),
            ("alpha0", "largest admissible α"),
            ("alpha_admissible", "α ≤ α₀"),
            ("status", "completed, blow-up or failed"),
            ("blowup_t", "time of the blow-up stop"),
            ("sup_tilde", "L̃^∞ H^{0,s} norm of Ũ over the run"),
            ("ratio", "sup_tilde / ε^α"),
            ("bootstrap_threshold", "ε^α/(2C̃)"),
            ("bootstrap_held", "sup_tilde stayed below the threshold"),
            ("error", "failure message"),
        ],
    );
    for e in &report.entries {
        let c = e.cutoff.as_ref();
        t.push(vec![
            e.eps.into(),
            c.map(|c| c.big_r).into(),
            c.map(|c| c.r).into(),
            c.map(|c| c.alpha0).into(),
            c.map_or(Cell::Na, |c| c.alpha_admissible.into()),
            e.status.as_str().into(),
            e.blowup_t.into(),
            e.sup_tilde.into(),
            e.ratio.into(),
            e.bootstrap_threshold.into(),
            e.bootstrap_held.map_or(Cell::Na, Cell::B),
            e.error.clone().map_or(Cell::Na, Cell::S),
        ]);
    }
    artifacts.push(write_table(dir, &t)?);
    artifacts.push(write_json(dir, "sweep.json", &report)?);
    Ok((report, artifacts))
}

pub fn sweep(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let eps_list = cfg.sweep.as_ref().expect("validated").eps_list.clone();
    let (report, artifacts) = run_sweep(cfg, &eps_list, seed, dir)?;
    // only the smallest ε has to survive; larger ones may blow up
    let last = report
        .entries
        .iter()
        .min_by(|a, b| a.eps.total_cmp(&b.eps))
        .expect("non-empty list");
    let status = match last.status.as_str() {
        "completed" => Status::Success,
        "blow-up" => Status::BlowUp,
        _ => Status::Failed,
    };
    let warnings = report
        .entries
        .iter()
        .filter(|e| e.status != "completed")
        .map(|e| format!("ε = {:e}: {}{}", e.eps, e.status, e.error.as_deref().map(|m| format!(" ({m})")).unwrap_or_default()))
        .collect();
    Ok(Outcome {
        status,
        artifacts,
        derived: json!({
            "cutoffs": report.entries.iter().map(|e| json!({ "eps": e.eps, "cutoff": e.cutoff })).collect::<Vec<_>>(),
            "small_data_threshold": report.small_data_threshold,
            "data_h0s": report.data_h0s,
        }),
        warnings,
    })
}

pub fn linear(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let p = cfg.model()?.params()?;
    let l = cfg.linear.as_ref().expect("validated");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs = l.frequencies.clone();
    freqs.extend((0..l.random).map(|_| sample_annulus(&mut rng, l.r, l.big_r)));
    let mut ev = Table::new(
        "eigenvalues.csv",
        &[
            ("mode", "row of modes.csv"),
            ("j", "eigenvalue index 1..6"),
            ("re", "closed-form eigenvalue, real part"),
            ("im", "closed-form eigenvalue, imaginary part"),
            ("numeric_re", "complex Schur eigenvalue matched to it, real part"),
            ("numeric_im", "complex Schur eigenvalue matched to it, imaginary part"),
            ("eigvec_residual", "‖(𝔹 − λ)W‖/(‖𝔹‖‖W‖), empty on degenerate modes"),
        ],
    );
    let mut modes = Table::new(
        "modes.csv",
        &[
            ("mode", "row index"),
            ("xi1", "frequency"),
            ("xi2", "frequency"),
            ("xi3", "frequency"),
            ("degenerate", "det D = 0 (ξ₃ = 0 or ξ₁ = ξ₃ = 0)"),
            ("det_closed", "4ξ₃²(ξ₁²+ξ₃²)²(4|ξ|²+1)"),
            ("det_numeric", "|det D| by LU"),
            ("cramer_residual", "relative error of Σ C_i W_i for random divergence-free data"),
            ("propagator_rel_diff", "eigen-route vs expm propagator at time t, Frobenius"),
        ],
    );
    let mut warnings = Vec::new();
    for (k, &xi) in freqs.iter().enumerate() {
        let m = assemble_symbol(xi, &p)?;
        let lam = eigenvalues(xi, &p)?;
        let numeric = matched_numeric_eigenvalues(&m, &lam);
        let degenerate = is_degenerate(xi) || !p.is_scaled();
        let w = if degenerate { None } else { Some(eigenvectors(xi, &p)?) };
        for j in 0..6 {
            let res = w.as_ref().map(|w| (m * w[j] - w[j] * lam[j]).norm() / (m.norm() * w[j].norm()));
            ev.push(vec![
                k.into(),
                (j + 1).into(),
                lam[j].re.into(),
                lam[j].im.into(),
                numeric.map(|n| n[j].re).into(),
                numeric.map(|n| n[j].im).into(),
                res.into(),
            ]);
        }
        let (cramer, prop) = if let Some(w) = &w {
            let u0 = random_div_free_mode(&mut rng, xi);
            let c = cramer_coefficients(&u0, xi, &p)?;
            let back = c.iter().zip(&w[2..]).fold(Vec6::zeros(), |acc, (ci, wi)| acc + wi * *ci);
            let v0 = Vec6::from_column_slice(&u0);
            let a = eigen_propagator(xi, &p, l.t)?;
            let b = expm_oracle(&m, l.t)?;
            (Some((back - v0).norm() / v0.norm()), Some((a - b).norm() / b.norm()))
        } else {
            warnings.push(format!("mode {k} at {xi:?} is degenerate: eigenvector columns left empty"));
            (None, None)
        };
        modes.push(vec![
            k.into(),
            xi[0].into(),
            xi[1].into(),
            xi[2].into(),
            degenerate.into(),
            det_d_closed_form(xi).into(),
            cramer_matrix(xi).determinant().norm().into(),
            cramer.into(),
            prop.into(),
        ]);
    }
    let artifacts = vec![write_table(dir, &modes)?, write_table(dir, &ev)?];
    Ok(Outcome {
        status: Status::Success,
        artifacts,
        derived: json!({ "params": p, "frequencies": freqs.len() }),
        warnings,
    })
}

fn sup_columns(file: &str) -> Table {
    Table::new(
        file,
        &[
            ("branch", "A or B"),
            ("theta", "θ = t/ε"),
            ("tau", "τ = ε^α t"),
            ("sup", "sup over (z_h, ξ₃) of |K|"),
            ("z", "|z_h| at the maximizer"),
            ("xi3", "ξ₃ at the maximizer"),
            ("grid_sup", "best value on the grid pass"),
            ("error_estimate", "quadrature error estimate at the maximizer"),
            ("degraded", "quadrature did not reach tolerance"),
        ],
    )
}

fn push_sup(t: &mut Table, branch: &str, s: &SupSample) {
    t.push(vec![
        branch.into(),
        s.theta.into(),
        s.tau.into(),
        s.sup.into(),
        s.z.into(),
        s.xi3.into(),
        s.grid_sup.into(),
        s.error_estimate.into(),
        s.degraded.into(),
    ]);
}

pub fn kernels(cfg: &ExperimentConfig, _seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let k = cfg.kernels.as_ref().expect("validated");
    let thetas = k.theta_grid()?;
    let mut decay = sup_columns("kernel_decay.csv");
    let mut damping = sup_columns("kernel_damping.csv");
    let mut fits = Vec::new();
    let mut degraded = false;
    let mut warnings = Vec::new();
    for &b in &k.branches {
        let spec: KernelSpec = k.spec(b)?;
        let name = format!("{b:?}");
        let spans = thetas.len() >= 2 && thetas[0] > 0.0 && thetas[thetas.len() - 1] / thetas[0] >= 1e3 * (1.0 - 1e-9);
        if spans {
            let fit = kernel_decay_fit(&spec, &thetas, k.tau, &k.search)?;
            for s in &fit.samples {
                push_sup(&mut decay, &name, s);
                degraded |= s.degraded;
            }
            fits.push(json!({ "branch": name, "kind": "theta", "slope": fit.slope, "intercept": fit.intercept,
                "window": fit.window, "envelope_ratio": fit.envelope_ratio }));
        } else {
            warnings.push(format!("θ grid spans under three decades: no decay fit for branch {name}"));
            for &t in &thetas {
                let s = kernel_sup(&spec, t, k.tau, &k.search)?;
                push_sup(&mut decay, &name, &s);
                degraded |= s.degraded;
            }
        }
        if !k.taus.is_empty() {
            let fit = kernel_tau_fit(&spec, k.tau_theta, &k.taus, &k.search)?;
            for s in &fit.samples {
                push_sup(&mut damping, &name, s);
                degraded |= s.degraded;
            }
            fits.push(json!({ "branch": name, "kind": "tau", "slope": fit.slope, "predicted": fit.predicted,
                "relative_error": fit.relative_error }));
        }
    }
    let mut artifacts = vec![write_table(dir, &decay)?];
    if !k.taus.is_empty() {
        artifacts.push(write_table(dir, &damping)?);
    }
    artifacts.push(write_json(dir, "kernel_fits.json", &fits)?);
    Ok(Outcome {
        status: if degraded { Status::Degraded } else { Status::Success },
        artifacts,
        derived: json!({ "beta": k.spec(k.branches[0])?.beta(), "thetas": thetas.len() }),
        warnings,
    })
}

pub fn strichartz(cfg: &ExperimentConfig, _seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let s = cfg.strichartz.as_ref().expect("validated");
    let spec = KernelSpec::new(s.r, s.big_r, s.branch, s.sign)?;
    let mut norms = Table::new(
        "strichartz_norms.csv",
        &[
            ("alpha", "dissipation exponent"),
            ("eps", "Rossby number"),
            ("p", "time exponent (inf for the sup)"),
            ("norm", "L^p_t L^∞_h L²_v norm of Ψ(D)G(t)f"),
            ("tail_bound", "bound on the truncated time tail, relative"),
            ("t_cut", "last sampled time"),
            ("refinement_change", "relative change under doubled quadrature"),
            ("degraded", "refinement change above tolerance"),
        ],
    );
    let mut fits = Table::new(
        "strichartz_fits.csv",
        &[
            ("alpha", "dissipation exponent"),
            ("p", "time exponent"),
            ("slope", "fitted exponent of ε"),
            ("predicted", "(1 − 3α)/(4p)"),
        ],
    );
    let mut degraded = false;
    for &alpha in &s.alphas {
        let sw = strichartz_scaling_sweep(&s.profile, &spec, alpha, &s.ps, &s.eps_list, &s.numerics)?;
        for pt in &sw.points {
            degraded |= pt.degraded;
            for n in &pt.norms {
                norms.push(vec![
                    alpha.into(),
                    pt.eps.into(),
                    n.p.into(),
                    n.value.into(),
                    n.tail_bound.into(),
                    pt.t_cut.into(),
                    pt.refinement_change.into(),
                    pt.degraded.into(),
                ]);
            }
        }
        for f in &sw.fits {
            fits.push(vec![alpha.into(), f.p.into(), f.slope.into(), f.predicted.into()]);
        }
    }
    Ok(Outcome {
        status: if degraded { Status::Degraded } else { Status::Success },
        artifacts: vec![write_table(dir, &norms)?, write_table(dir, &fits)?],
        derived: json!({ "profile_l2": s.profile.l2_norm(), "beta": spec.beta() }),
        warnings: Vec::new(),
    })
}

pub fn check(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<Outcome, CliError> {
    let c = cfg.check.as_ref().expect("validated");
    let mut t = Table::new(
        "checks.csv",
        &[
            ("check", "check name"),
            ("metric", "measured quantity"),
            ("value", "measured value"),
            ("tolerance", "threshold"),
            ("bound", "upper: value ≤ tolerance; lower: value ≥ tolerance"),
            ("pass", "criterion met"),
        ],
    );
    let mut status = Status::Success;
    let mut timing = Vec::new();
    for &name in &c.checks {
        let r = run_named(name, c.samples, seed)?;
        for m in &r.metrics {
            t.push(vec![
                r.name.as_str().into(),
                m.name.as_str().into(),
                m.value.into(),
                m.tolerance.into(),
                if m.upper { "upper" } else { "lower" }.into(),
                m.pass.into(),
            ]);
        }
        if !r.passed() {
            status = Status::Degraded;
        }
        timing.push(json!({ "check": r.name, "seconds": r.seconds }));
    }
    Ok(Outcome {
        status,
        artifacts: vec![write_table(dir, &t)?],
        derived: json!({ "timing": timing }),
        warnings: Vec::new(),
    })
}
