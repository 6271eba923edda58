//! Property checks with explicit tolerances, shared by `rotmhd check` and
//! the acceptance tests. Each check compares the toolkit against an
//! independent route (numeric eigensolver, Padé `expm`, exact identities).

use std::time::Instant;

use nalgebra::Schur;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rotmhd::cutoff::CutoffParams;
use rotmhd::init::{random_state, random_state_with, InitSpec};
use rotmhd::linear::symbol::{assemble_symbol, cramer_coefficients, cramer_matrix, det_d_closed_form, eigenvalues, eigenvectors, Mat6, Vec6};
use rotmhd::linear::{eigen_propagator, expm_oracle, propagate_exact, ModelParams};
use rotmhd::lp::harness::random_scalar;
use rotmhd::lp::{bony_decompose, dyadic_block, dyadic_sobolev_norm, q_max, Direction, DyadicLadder};
use rotmhd::norms::{h0s, h0s_state};
use rotmhd::ops::{advect, partial, product, wedge_e3};
use rotmhd::solver::{run, RunMode, RunStatus, SolverConfig};
use rotmhd::{Fft3, Grid, SpectralField, C64};

use crate::config::CheckName;
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    /// `true` when `value` must stay at or below `tolerance`, `false` when
    /// it must reach it.
    pub upper: bool,
    pub pass: bool,
}

impl Metric {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            tolerance,
            upper: true,
            pass: value <= tolerance,
        }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_owned(),
            value,
            tolerance,
            upper: false,
            pass: value >= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub metrics: Vec<Metric>,
    pub seconds: f64,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.metrics.iter().all(|m| m.pass)
    }

    pub fn summary(&self) -> String {
        self.metrics
            .iter()
            .map(|m| format!("{} = {:.3e} ({} {:.1e})", m.name, m.value, if m.upper { "≤" } else { "≥" }, m.tolerance))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn timed(name: &str, f: impl FnOnce() -> Result<Vec<Metric>, CliError>) -> Result<CheckReport, CliError> {
    let t0 = Instant::now();
    let metrics = f()?;
    Ok(CheckReport {
        name: name.to_owned(),
        metrics,
        seconds: t0.elapsed().as_secs_f64(),
    })
}

/// Uniform sample of `𝒞_{r,R}` by rejection from `[−R, R]³`.
pub fn sample_annulus(rng: &mut impl Rng, r: f64, big_r: f64) -> [f64; 3] {
    loop {
        let xi: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-big_r..=big_r));
        let h = xi[0].hypot(xi[1]);
        let v = xi[2].abs();
        let k = h.hypot(v);
        if h >= r && v >= r && k <= big_r {
            return xi;
        }
    }
}

fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random `(û, b̂)` with both halves orthogonal to `ξ`.
pub fn random_div_free_mode(rng: &mut impl Rng, xi: [f64; 3]) -> [C64; 6] {
    let k2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    let mut v: [C64; 6] = std::array::from_fn(|_| random_c64(rng));
    for half in [0, 3] {
        let d: C64 = (0..3).map(|i| v[half + i] * xi[i]).sum();
        for i in 0..3 {
            v[half + i] -= d * xi[i] / k2;
        }
    }
    v
}

/// Complex Schur eigenvalues of `m`, matched greedily to `lam`.
pub fn matched_numeric_eigenvalues(m: &Mat6, lam: &[C64; 6]) -> Option<[C64; 6]> {
    let numeric = Schur::new(*m).eigenvalues()?;
    let mut used = [false; 6];
    let mut out = [C64::new(0.0, 0.0); 6];
    for (o, l) in out.iter_mut().zip(lam) {
        let k = (0..6)
            .filter(|k| !used[*k])
            .min_by(|a, b| (numeric[*a] - l).norm().total_cmp(&(numeric[*b] - l).norm()))?;
        used[k] = true;
        *o = numeric[k];
    }
    Some(out)
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Closed-form eigenvalues, eigenvectors, `det D` and Cramer coefficients
/// against a complex Schur decomposition and direct evaluation.
pub fn eigen_structure(samples: usize, r: f64, big_r: f64, p: &ModelParams, seed: u64) -> Result<CheckReport, CliError> {
    timed("eigen-structure", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut ev, mut vec_res, mut det_err, mut cramer) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..samples {
            let xi = sample_annulus(&mut rng, r, big_r);
            let m = assemble_symbol(xi, p)?;
            let scale = m.norm();
            let lam = eigenvalues(xi, p)?;
            let numeric = matched_numeric_eigenvalues(&m, &lam)
                .ok_or_else(|| CliError::Config("complex Schur form is not triangular".into()))?;
            let lam_scale = lam.iter().map(|x| x.norm()).fold(0.0, f64::max);
            for (l, n) in lam.iter().zip(&numeric) {
                ev = ev.max((l - n).norm() / lam_scale);
            }
            let w = eigenvectors(xi, p)?;
            for (l, wi) in lam.iter().zip(&w) {
                let res = (m * wi - wi * *l).norm();
                vec_res = vec_res.max(res / (scale * wi.norm()));
            }
            let want = det_d_closed_form(xi);
            det_err = det_err.max((cramer_matrix(xi).determinant().norm() - want).abs() / want);
            let u0 = random_div_free_mode(&mut rng, xi);
            let c = cramer_coefficients(&u0, xi, p)?;
            let mut back = Vec6::zeros();
            for (ci, wi) in c.iter().zip(&w[2..]) {
                back += wi * *ci;
            }
            let diff: Vec<C64> = (0..6).map(|i| back[i] - u0[i]).collect();
            cramer = cramer.max(vnorm(&diff) / vnorm(&u0));
        }
        Ok(vec![
            Metric::at_most("eigenvalue_rel_err", ev, 1e-10),
            Metric::at_most("eigenvector_residual", vec_res, 1e-10),
            Metric::at_most("det_rel_err", det_err, 1e-10),
            Metric::at_most("cramer_residual", cramer, 1e-10),
        ])
    })
}

/// Eigen-route propagator against `expm` of the assembled symbol at random
/// `(ξ, t)`, `t ∈ [0, t_max]`, the modulus decay law, and the grid-level
/// `propagate_exact` against per-mode `expm`.
pub fn exact_propagator(samples: usize, r: f64, big_r: f64, t_max: f64, p: &ModelParams, seed: u64) -> Result<CheckReport, CliError> {
    timed("exact-propagator", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut prop, mut modulus) = (0.0f64, 0.0f64);
        for _ in 0..samples {
            let xi = sample_annulus(&mut rng, r, big_r);
            let t = rng.gen_range(0.0..=t_max);
            // the closed form is only defined on divergence-free pairs
            let a = eigen_propagator(xi, p, t)?;
            let b = expm_oracle(&assemble_symbol(xi, p)?, t)?;
            let u0 = random_div_free_mode(&mut rng, xi);
            let v0 = Vec6::from_column_slice(&u0);
            let ut = a * v0;
            let want = b * v0;
            prop = prop.max((ut - want).norm() / want.norm());
            let decay = (-p.nu * (xi[0] * xi[0] + xi[1] * xi[1]) * t).exp();
            modulus = modulus.max((ut.norm() - decay * v0.norm()).abs() / (decay * v0.norm()));
        }
        let grid = Grid::new(10, 8, 7.0, 5.0)?;
        let s = random_state(&grid, seed, 0.8, false, 100)?;
        let t = 0.37 * t_max;
        let exact = propagate_exact(&s, t, p, Some(&|_| true))?;
        let mut err = 0.0;
        for idx in 0..grid.len() {
            let xi = grid.xi(idx);
            let m = s.mode6(idx);
            let want: Vec<C64> = if xi == [0.0; 3] {
                m.to_vec()
            } else {
                (expm_oracle(&assemble_symbol(xi, p)?, t)? * Vec6::from_column_slice(&m)).iter().copied().collect()
            };
            let got = exact.mode6(idx);
            err += (0..6).map(|i| (got[i] - want[i]).norm_sqr()).sum::<f64>();
        }
        let grid_err = (err * grid.parseval_factor()).sqrt() / exact.norm_l2();
        Ok(vec![
            Metric::at_most("propagator_rel_err", prop, 1e-9),
            Metric::at_most("modulus_law_rel_err", modulus, 1e-9),
            Metric::at_most("propagate_exact_grid_rel_err", grid_err, 1e-9),
        ])
    })
}

/// Parameters of the discrete energy-identity check.
#[derive(Debug, Clone, Copy)]
pub struct EnergySetup {
    pub n: usize,
    pub eps: f64,
    pub alpha: f64,
    /// `‖U₀‖_{L²}`.
    pub amplitude: f64,
    /// Data band `|k| ≤ k_max` in integer wavenumbers.
    pub k_max: i64,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for EnergySetup {
    fn default() -> Self {
        Self {
            n: 32,
            eps: 0.1,
            alpha: 0.5,
            amplitude: 10.0,
            k_max: 4,
            t_end: 1.0,
            dt: 1e-3,
        }
    }
}

/// `|½‖U‖² − ½‖U₀‖² + ν∫‖∇_hU‖²|` at `t_end` for `dt` and `2dt`.
pub fn energy_identity(setup: &EnergySetup, seed: u64) -> Result<CheckReport, CliError> {
    timed("energy-identity", || {
        let g = Grid::cube(setup.n)?;
        let p = ModelParams::scaled(setup.eps, setup.alpha)?;
        let mut u0 = random_state(&g, seed, 0.8, true, setup.k_max)?.scaled(setup.amplitude);
        u0.dealias();
        let e0 = 0.5 * u0.norm_l2_sq();
        let resid = |dt: f64| -> Result<f64, CliError> {
            let mut cfg = SolverConfig::new(dt, setup.t_end);
            cfg.output_every = usize::MAX;
            let r = run(&u0, &cfg, &p, RunMode::Direct, None)?;
            if r.status != RunStatus::Completed {
                return Err(CliError::Config(format!("energy check run did not complete: {:?}", r.status)));
            }
            Ok(r.records.last().unwrap().energy_residual.abs() / e0)
        };
        let fine = resid(setup.dt)?;
        let coarse = resid(2.0 * setup.dt)?;
        Ok(vec![
            Metric::at_most("relative_residual", fine, 1e-6),
            Metric::at_least("observed_order", (coarse / fine).log2(), 3.0),
        ])
    })
}

/// The four exact cancellations on random dealiased states, each relative
/// to its Cauchy–Schwarz scale.
pub fn cancellation_identities(states: usize, seed: u64) -> Result<CheckReport, CliError> {
    timed("cancellations", || {
        let g = Grid::new(16, 12, 5.0, 3.0)?;
        let fft = Fft3::new(&g);
        let mut worst = [0.0f64; 4];
        for k in 0..states {
            let mut s = random_state(&g, seed.wrapping_add(k as u64), 0.8, false, 100)?;
            s.dealias();
            let (u, b) = (&s.u, &s.b);
            let uv = advect(&fft, u, b)?;
            let bu = advect(&fft, b, u)?;
            let bb = advect(&fft, b, b)?;
            let w = wedge_e3(u);
            let (db, du) = (partial(b, 2), partial(u, 2));
            let vals = [
                (uv.inner(b), uv.norm_l2() * b.norm_l2()),
                (bu.inner(b) + bb.inner(u), bu.norm_l2() * b.norm_l2() + bb.norm_l2() * u.norm_l2()),
                (w.inner(u), u.norm_l2_sq()),
                (db.inner(u) + du.inner(b), db.norm_l2() * u.norm_l2() + du.norm_l2() * b.norm_l2()),
            ];
            for (w, (v, scale)) in worst.iter_mut().zip(vals) {
                *w = w.max(v.abs() / scale);
            }
        }
        Ok(vec![
            Metric::at_most("transport", worst[0], 1e-10),
            Metric::at_most("magnetic_stretching", worst[1], 1e-10),
            Metric::at_most("coriolis", worst[2], 1e-10),
            Metric::at_most("vertical_coupling", worst[3], 1e-10),
        ])
    })
}

/// Reconstruction, two-apart orthogonality, dyadic/integral norm band and
/// Bony reconstruction over five fields and three resolutions.
pub fn littlewood_paley(seed: u64) -> Result<CheckReport, CliError> {
    timed("littlewood-paley", || {
        let grids = [Grid::new(16, 16, 6.0, 6.0)?, Grid::new(24, 32, 9.0, 14.0)?, Grid::new(32, 32, 12.0, 12.0)?];
        let specs = [(-4.0, 0.0, 100.0), (-2.0, 0.0, 100.0), (0.0, 0.0, 100.0), (-4.0, 2.0, 6.0), (-3.0, 0.5, 3.0)];
        let s_reg = 1.0;
        let (mut recon, mut overlap, mut bony) = (0.0f64, 0.0f64, 0.0f64);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (gi, g) in grids.iter().enumerate() {
            let fft = Fft3::new(g);
            for (fi, &(exponent, k_min, k_max)) in specs.iter().enumerate() {
                let spec = InitSpec {
                    k_min,
                    k_max,
                    exponent,
                    exclude_degenerate: false,
                };
                let tag = seed.wrapping_add((10 * gi + fi) as u64);
                let u = random_state_with(g, &spec, 1.0, tag)?.u;
                let n = u.norm_l2();
                recon = recon.max(DyadicLadder::new(&u).reconstruct().sub(&u).norm_l2() / n);
                for dir in [Direction::H, Direction::V] {
                    let qm = q_max(g, dir);
                    let blocks: Vec<SpectralField> = (-1..=qm).map(|q| dyadic_block(&u, q, dir)).collect();
                    let sum = blocks.iter().fold(SpectralField::zeros(g), |a, b| a.add(b));
                    recon = recon.max(sum.sub(&u).norm_l2() / n);
                    for i in 0..blocks.len() {
                        for j in i + 2..blocks.len() {
                            overlap = overlap.max(blocks[i].inner(&blocks[j]).abs() / (n * n));
                        }
                    }
                }
                let ratio = dyadic_sobolev_norm(&u, 0.0, s_reg) / h0s(&u, s_reg);
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
            let a = random_scalar(g, tag_pair(seed, gi, 0), [3, 3, 100]);
            let b = random_scalar(g, tag_pair(seed, gi, 1), [3, 3, 100]);
            let (a, b) = (band_limit(g, a), band_limit(g, b));
            let whole = product(&fft, &a, &b)?;
            let pieces = bony_decompose(&fft, &a, &b)?.sum();
            let err: f64 = whole.iter().zip(&pieces).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
            let nrm: f64 = whole.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            bony = bony.max(err / nrm);
        }
        Ok(vec![
            Metric::at_most("reconstruction_rel_err", recon, 1e-10),
            Metric::at_most("two_apart_overlap", overlap, 1e-10),
            Metric::at_most("norm_ratio_band", hi / lo, 8.0),
            Metric::at_most("bony_rel_err", bony, 1e-9),
        ])
    })
}

fn tag_pair(seed: u64, g: usize, k: usize) -> u64 {
    seed.wrapping_mul(31).wrapping_add((100 + 2 * g + k) as u64)
}

/// Restricts to `|k| < n/4` per axis so the raw product is alias-free.
fn band_limit(g: &Grid, mut a: Vec<rotmhd::C64>) -> Vec<rotmhd::C64> {
    for (idx, x) in a.iter_mut().enumerate() {
        let k = g.wavenumbers(idx);
        if k[0].abs() * 4 >= g.n_h() as i64 || k[1].abs() * 4 >= g.n_h() as i64 || k[2].abs() * 4 >= g.n_v() as i64 {
            *x = C64::new(0.0, 0.0);
        }
    }
    a
}

/// Coupled-split run against the direct run on the same data, compared in
/// `H^{0,s}` at `t = 1`.
pub fn two_route(n: usize, seed: u64) -> Result<CheckReport, CliError> {
    timed("two-route", || {
        let g = Grid::new(n, n, 8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI)?;
        let p = ModelParams::scaled(0.1, 0.3)?;
        let c = CutoffParams::fixed(1.0, 3.0)?;
        c.check_resolution(&g)?;
        let mut u0 = random_state(&g, seed, 0.8, false, 100)?;
        u0 = u0.scaled(20.0 / h0s_state(&u0, p.s));
        let cfg = SolverConfig::new(0.01, 1.0);
        let d = run(&u0, &cfg, &p, RunMode::Direct, None)?;
        let s = run(&u0, &cfg, &p, RunMode::CoupledSplit, Some(&c))?;
        let rel = h0s_state(&d.final_state.sub(&s.final_state), p.s) / h0s_state(&d.final_state, p.s);
        Ok(vec![Metric::at_most("h0s_rel_diff", rel, 1e-6)])
    })
}

/// Runs the named checks with their default setups.
pub fn run_named(name: CheckName, samples: usize, seed: u64) -> Result<CheckReport, CliError> {
    match name {
        CheckName::Eigen => eigen_structure(samples, 0.25, 4.0, &ModelParams::scaled(0.01, 1.0)?, seed),
        CheckName::Propagator => exact_propagator(samples, 0.25, 4.0, 1000.0, &ModelParams::scaled(0.01, 1.0)?, seed),
        CheckName::Energy => energy_identity(&EnergySetup::default(), seed),
        CheckName::Cancellation => cancellation_identities(samples.min(100), seed),
        CheckName::LittlewoodPaley => littlewood_paley(seed),
        CheckName::TwoRoute => two_route(32, seed),
    }
}

