//! `L^p_t L^∞_h L²_v` norms of `Ψ(D)𝒢^ε_±(t)f` for a closed-form profile
//! `f̂`, and their scaling in `ε`.
//!
//! With `θ = t/ε`, `τ = tε^α` and `f̂` radial in `ξ_h`, Plancherel in `x₃`
//! gives
//! `‖u(t, x_h, ·)‖²_{L²_v} = (1/2π) ∫ |(1/2π) ∫ ρ J₀(|x_h|ρ) Ψ f̂ e^{−τρ² ∓ iθΓ} dρ|² dξ₃`,
//! so each time slice is one radial transform per `ξ₃` node.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dispersion::fit_line;
use crate::dispersion::kernel::KernelSpec;
use crate::dispersion::phase::{phase_radial, phase_radial_rate};
use crate::dispersion::quad::{hankel_apply, weight_chunks, Trapezoid};
use crate::error::{Error, Result};
use crate::lp::bump::plateau;

/// `f̂(ξ) = a · b(|ξ_h|; ρ-range) · b(ξ₃; ξ₃-range)`, where `b` is 1 on the
/// middle half of its range and vanishes smoothly at the ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub rho: [f64; 2],
    pub xi3: [f64; 2],
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for Profile {
    fn default() -> Self {
        Self {
            rho: [0.5, 1.5],
            xi3: [0.5, 1.5],
            amplitude: 1.0,
        }
    }
}

#[inline]
fn bump(x: f64, range: [f64; 2]) -> f64 {
    let c = 0.5 * (range[0] + range[1]);
    let w = 0.5 * (range[1] - range[0]);
    plateau((x - c) / w, 0.5, 1.0)
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let ok = |r: [f64; 2]| r[0] > 0.0 && r[1] > r[0] && r[1].is_finite();
        if !ok(self.rho) || !ok(self.xi3) || !self.amplitude.is_finite() {
            return Err(Error::Config("profile ranges must satisfy 0 < lo < hi".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, rho: f64, xi3: f64) -> f64 {
        self.amplitude * bump(rho, self.rho) * bump(xi3, self.xi3)
    }

    /// `‖f‖_{L²} = ((2π)^{−3} ∫|f̂|²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        let t = Trapezoid::with_step(self.rho[0], self.rho[1], 1e-4);
        let radial: f64 = t.nodes().iter().map(|&p| p * bump(p, self.rho).powi(2)).sum::<f64>() * t.h();
        let v = Trapezoid::with_step(self.xi3[0], self.xi3[1], 1e-4);
        let vertical: f64 = v.nodes().iter().map(|&x| bump(x, self.xi3).powi(2)).sum::<f64>() * v.h();
        self.amplitude.abs() * (2.0 * PI * radial * vertical / (2.0 * PI).powi(3)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzConfig {
    /// Log-spaced time nodes per decade.
    pub per_decade: usize,
    pub n_xi3: usize,
    pub n_z: usize,
    pub points_per_wave: f64,
    /// Truncate the time grid once the dissipative bound on the remaining
    /// tail is below this fraction of the accumulated integral, for every `p`.
    pub tail_rtol: f64,
    /// Relative change under doubled resolution above which a slice is
    /// flagged.
    pub refine_tol: f64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        Self {
            per_decade: 12,
            n_xi3: 64,
            n_z: 256,
            points_per_wave: 6.0,
            tail_rtol: 1e-4,
            refine_tol: 0.02,
        }
    }
}

impl StrichartzConfig {
    pub fn validate(&self) -> Result<()> {
        if self.per_decade < 2 || self.n_xi3 < 4 || self.n_z < 4 || self.points_per_wave < 3.0 || !(self.tail_rtol > 0.0) {
            return Err(Error::Config("strichartz config: per_decade ≥ 2, n_xi3 ≥ 4, n_z ≥ 4, points_per_wave ≥ 3, tail_rtol > 0".into()));
        }
        Ok(())
    }

    fn doubled(&self) -> Self {
        Self {
            n_xi3: 2 * self.n_xi3,
            n_z: 2 * self.n_z,
            points_per_wave: 2.0 * self.points_per_wave,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceNorm {
    pub t: f64,
    pub theta: f64,
    pub tau: f64,
    /// `‖u(t)‖_{L^∞_h L²_v}`
    pub value: f64,
    /// Maximizing `|x_h|`.
    pub z: f64,
    /// Non-dispersive bound: the same norm with `|J₀ e^{iθΓ}|` replaced by 1.
    pub bound: f64,
}

struct Slice<'a> {
    f: &'a Profile,
    spec: &'a KernelSpec,
    eps: f64,
    alpha: f64,
}

impl Slice<'_> {
    fn args(&self, t: f64) -> (f64, f64) {
        (t / self.eps, t * self.eps.powf(self.alpha))
    }

    fn amp(&self, rho: f64, xi3: f64, tau: f64) -> f64 {
        rho * self.spec.psi(rho, xi3) * self.f.value(rho, xi3) * (-tau * rho * rho).exp() / (2.0 * PI)
    }

    fn xi3_rule(&self, n: usize) -> (Vec<f64>, f64) {
        let t = Trapezoid {
            a: self.f.xi3[0],
            b: self.f.xi3[1],
            intervals: n + 1,
        };
        (t.nodes(), t.h())
    }

    fn bound(&self, t: f64, n_xi3: usize) -> f64 {
        let (_, tau) = self.args(t);
        let (xs, hx) = self.xi3_rule(n_xi3);
        let r = Trapezoid::with_step(self.f.rho[0], self.f.rho[1], (self.f.rho[1] - self.f.rho[0]) / 400.0);
        let (nodes, h) = (r.nodes(), r.h());
        let s: f64 = xs
            .iter()
            .map(|&x| nodes.iter().map(|&p| self.amp(p, x, tau).abs()).sum::<f64>().powi(2) * h * h)
            .sum();
        (s * hx / (2.0 * PI)).sqrt()
    }

    fn eval(&self, t: f64, cfg: &StrichartzConfig) -> SliceNorm {
        let (theta, tau) = self.args(t);
        let branch = self.spec.branch;
        let sigma = self.spec.sign.phase_factor();
        let (xs, hx) = self.xi3_rule(cfg.n_xi3);
        let (a, b) = (self.f.rho[0], self.f.rho[1]);
        let mut g_max = 0.0f64;
        for &x in &xs {
            for k in 0..=64 {
                g_max = g_max.max(phase_radial_rate(branch, a + (b - a) * k as f64 / 64.0, x).abs());
            }
        }
        let z_max = 1.05 * theta * g_max + 4.0;
        let rate = theta * g_max + z_max + 2.0 * tau * b;
        let rule = Trapezoid::with_step(a, b, ((b - a) / 64.0).min(2.0 * PI / (cfg.points_per_wave * rate)));
        let (nodes, h) = (rule.nodes(), rule.h());
        let w = weight_chunks(&nodes, 2 * xs.len(), |rho, row| {
            for (j, &x) in xs.iter().enumerate() {
                let amp = self.amp(rho, x, tau) * h;
                let (s, c) = (sigma * theta * phase_radial(branch, rho, x)).sin_cos();
                row[2 * j] = amp * c;
                row[2 * j + 1] = amp * s;
            }
        });
        let norms = |m: &DMatrix<f64>| -> Vec<f64> {
            (0..m.nrows())
                .map(|i| {
                    let s: f64 = (0..xs.len()).map(|j| m[(i, 2 * j)].powi(2) + m[(i, 2 * j + 1)].powi(2)).sum();
                    (s * hx / (2.0 * PI)).sqrt()
                })
                .collect()
        };
        let dz = z_max / (cfg.n_z - 1) as f64;
        let zs: Vec<f64> = (0..cfg.n_z).map(|i| i as f64 * dz).collect();
        let vals = norms(&hankel_apply(&zs, &nodes, &w));
        let mut order: Vec<usize> = (0..zs.len()).collect();
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
        let mut best = (vals[order[0]], zs[order[0]]);
        let mut starts: Vec<usize> = Vec::new();
        for i in order {
            if starts.len() == 2 {
                break;
            }
            if starts.iter().all(|&s| s.abs_diff(i) > 2) {
                starts.push(i);
            }
        }
        // zoom in around the best grid cells
        for s in starts {
            let (mut c, mut half) = (zs[s], dz);
            for _ in 0..3 {
                let zz: Vec<f64> = (0..9).map(|k| (c - half + half * k as f64 / 4.0).max(0.0)).collect();
                let v = norms(&hankel_apply(&zz, &nodes, &w));
                let k = (0..9).max_by(|&i, &j| v[i].total_cmp(&v[j]).then(j.cmp(&i))).unwrap();
                if v[k] > best.0 {
                    best = (v[k], zz[k]);
                }
                c = zz[k];
                half *= 0.25;
            }
        }
        SliceNorm {
            t,
            theta,
            tau,
            value: best.0,
            z: best.1,
            bound: self.bound(t, cfg.n_xi3),
        }
    }
}

/// `N(t) = ‖Ψ(D)𝒢^ε_±(t)f‖_{L^∞_h L²_v}` on a log grid over
/// `[10⁻²ε, 10/ε]`, truncated once the tail is negligible.
#[derive(Debug, Clone, Serialize)]
pub struct TimeProfile {
    pub eps: f64,
    pub alpha: f64,
    pub samples: Vec<SliceNorm>,
    /// Last grid time (below `10/ε` when the tail was cut).
    pub t_cut: f64,
    pub truncated: bool,
    /// `ε^α ρ_lo²`: the bound decays at least like `e^{−t ε^α ρ_lo²}`.
    pub damping_rate: f64,
    /// Relative change of `N` under doubled quadrature at the checked slices.
    pub refinement_change: f64,
    pub degraded: bool,
}

/// `‖·‖_{L^p_t}` of a [`TimeProfile`] with its tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LpNorm {
    pub p: f64,
    pub value: f64,
    /// Bound on the contribution of `t > t_cut`, relative to `value`.
    pub tail_bound: f64,
}

fn time_grid(eps: f64, per_decade: usize) -> Vec<f64> {
    let (lo, hi) = ((eps * 1e-2).log10(), (10.0 / eps).log10());
    let n = ((hi - lo) * per_decade as f64).ceil() as usize;
    (0..=n).map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / n as f64)).collect()
}

/// `∫ y^p dt` by the trapezoid rule in `log t`, plus `y₀^p t₀` for `[0, t₀]`.
fn lp_integral(ts: &[f64], ys: &[f64], p: f64) -> f64 {
    let mut s = ys[0].powf(p) * ts[0];
    for k in 1..ts.len() {
        let dl = (ts[k] / ts[k - 1]).ln();
        s += 0.5 * dl * (ys[k - 1].powf(p) * ts[k - 1] + ys[k].powf(p) * ts[k]);
    }
    s
}

impl TimeProfile {
    pub fn lp_norm(&self, p: f64) -> LpNorm {
        let ts: Vec<f64> = self.samples.iter().map(|s| s.t).collect();
        let ys: Vec<f64> = self.samples.iter().map(|s| s.value).collect();
        let bs: Vec<f64> = self.samples.iter().map(|s| s.bound).collect();
        if p.is_infinite() {
            let value = ys.iter().copied().fold(0.0, f64::max);
            let tail = self.samples.last().map_or(0.0, |s| s.bound);
            return LpNorm {
                p,
                value,
                tail_bound: if tail > value { tail / value } else { 0.0 },
            };
        }
        let body = lp_integral(&ts, &ys, p);
        let n = ts.len();
        let tail = if self.truncated && n >= 1 {
            bs[n - 1].powf(p) / (p * self.damping_rate)
        } else {
            0.0
        };
        LpNorm {
            p,
            value: body.powf(1.0 / p),
            tail_bound: (tail / body).max(0.0),
        }
    }
}

fn check_exponents(eps: f64, alpha: f64, ps: &[f64]) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) || !alpha.is_finite() {
        return Err(Error::Parameter(format!("need ε > 0 and finite α, got ε = {eps}, α = {alpha}")));
    }
    if ps.iter().any(|&p| !(p >= 1.0)) {
        return Err(Error::Parameter("time exponents must satisfy p ≥ 1".into()));
    }
    Ok(())
}

/// Samples `N(t)`. The grid is cut at the first time `T` where, for every
/// `p` in `ps`, the tail `∫_T^{10/ε} B^p` of the non-dispersive bound `B ≥ N`
/// is below `tail_rtol` times the integral accumulated so far.
pub fn strichartz_profile(f: &Profile, spec: &KernelSpec, eps: f64, alpha: f64, ps: &[f64], cfg: &StrichartzConfig) -> Result<TimeProfile> {
    check_exponents(eps, alpha, ps)?;
    f.validate()?;
    cfg.validate()?;
    let slice = Slice { f, spec, eps, alpha };
    let damping_rate = eps.powf(alpha) * f.rho[0] * f.rho[0];
    let ts = time_grid(eps, cfg.per_decade);
    let bounds: Vec<f64> = ts.iter().map(|&t| slice.bound(t, cfg.n_xi3)).collect();
    let mut samples: Vec<SliceNorm> = Vec::new();
    let mut truncated = false;
    for (k, &t) in ts.iter().enumerate() {
        samples.push(slice.eval(t, cfg));
        if k + 1 == ts.len() || k < 2 {
            continue;
        }
        let st: Vec<f64> = samples.iter().map(|s| s.t).collect();
        let sv: Vec<f64> = samples.iter().map(|s| s.value).collect();
        let done = ps.iter().all(|&p| {
            if p.is_infinite() {
                return bounds[k] <= sv.iter().copied().fold(0.0, f64::max);
            }
            let last = bounds[bounds.len() - 1].powf(p) / (p * damping_rate);
            let tail = lp_integral(&ts[k..], &bounds[k..], p) - bounds[k].powf(p) * ts[k] + last;
            tail <= cfg.tail_rtol * lp_integral(&st, &sv, p)
        });
        if done {
            truncated = true;
            break;
        }
    }
    let t_cut = samples.last().map_or(0.0, |s| s.t);
    // doubled-resolution check at the latest slice and the one carrying the
    // most `L¹_t` weight
    let heavy = samples
        .iter()
        .enumerate()
        .max_by(|a, b| (a.1.value * a.1.t).total_cmp(&(b.1.value * b.1.t)))
        .map(|x| x.0)
        .unwrap_or(0);
    let fine = cfg.doubled();
    let mut change = 0.0f64;
    for idx in [heavy, samples.len() - 1] {
        let s = samples[idx];
        let d = slice.eval(s.t, &fine);
        change = change.max((d.value - s.value).abs() / d.value.max(f64::MIN_POSITIVE));
    }
    Ok(TimeProfile {
        eps,
        alpha,
        samples,
        t_cut,
        truncated,
        damping_rate,
        refinement_change: change,
        degraded: change > cfg.refine_tol,
    })
}

/// `‖Ψ(D)𝒢^ε_±(t)f‖_{L^p(ℝ₊, L^∞_h L²_v)}`.
pub fn semigroup_strichartz_norm(f: &Profile, spec: &KernelSpec, eps: f64, alpha: f64, p: f64, cfg: &StrichartzConfig) -> Result<(LpNorm, TimeProfile)> {
    let prof = strichartz_profile(f, spec, eps, alpha, &[p], cfg)?;
    Ok((prof.lp_norm(p), prof))
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingPoint {
    pub eps: f64,
    pub norms: Vec<LpNorm>,
    pub t_cut: f64,
    pub refinement_change: f64,
    pub degraded: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub p: f64,
    /// Fitted exponent of `ε`.
    pub slope: f64,
    /// `(1 − 3α)/(4p)`.
    pub predicted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingSweep {
    pub alpha: f64,
    pub points: Vec<ScalingPoint>,
    pub fits: Vec<ScalingFit>,
}

pub fn predicted_eps_exponent(alpha: f64, p: f64) -> f64 {
    (1.0 - 3.0 * alpha) / (4.0 * p)
}

/// Norms for every `ε` and `p`, with a log–log fit per `p`. `R` stays fixed.
pub fn strichartz_scaling_sweep(f: &Profile, spec: &KernelSpec, alpha: f64, ps: &[f64], eps_list: &[f64], cfg: &StrichartzConfig) -> Result<ScalingSweep> {
    if !(alpha < 1.0 / 3.0) {
        return Err(Error::Parameter(format!("scaling sweep needs α < 1/3, got {alpha}")));
    }
    let (lo, hi) = eps_list.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    if eps_list.len() < 2 || hi / lo < 100.0 * (1.0 - 1e-9) {
        return Err(Error::Parameter("ε list must span at least two decades".into()));
    }
    let points = eps_list
        .iter()
        .map(|&eps| {
            let prof = strichartz_profile(f, spec, eps, alpha, ps, cfg)?;
            Ok(ScalingPoint {
                eps,
                norms: ps.iter().map(|&p| prof.lp_norm(p)).collect(),
                t_cut: prof.t_cut,
                refinement_change: prof.refinement_change,
                degraded: prof.degraded,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = points.iter().map(|p| p.eps.ln()).collect();
    let fits = ps
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let y: Vec<f64> = points.iter().map(|pt| pt.norms[k].value.ln()).collect();
            ScalingFit {
                p,
                slope: fit_line(&x, &y).0,
                predicted: predicted_eps_exponent(alpha, p),
            }
        })
        .collect();
    Ok(ScalingSweep { alpha, points, fits })
}
