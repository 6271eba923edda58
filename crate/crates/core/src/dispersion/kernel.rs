//! The oscillatory kernels
//! `K_±(θ,τ,z_h,ξ₃) = ∫ Ψ(ξ) e^{∓iθΓ(ξ) + iz_h·ξ_h − τ|ξ_h|²} dξ_h`,
//! their sup over `(z_h, ξ₃)` and the fitted decay in `θ` and `τ`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::cutoff::psi_cutoff;
use crate::dispersion::phase::{phase, phase_radial, phase_radial_rate, Branch, Sign};
use crate::dispersion::quad::{hankel_gemm, Trapezoid};
use crate::dispersion::fit_line;
use crate::error::{Error, Result};
use crate::field::C64;

/// Relative tolerance of the doubling test.
pub const KERNEL_RTOL: f64 = 1e-6;
/// Below this fraction of `∫|integrand|` a doubling difference counts as
/// roundoff.
const ROUNDOFF: f64 = 1e-13;
const MAX_INTERVALS: usize = 1 << 23;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    pub branch: Branch,
    pub sign: Sign,
}

impl KernelSpec {
    pub fn new(r: f64, big_r: f64, branch: Branch, sign: Sign) -> Result<Self> {
        if !(r > 0.0 && r < big_r && big_r.is_finite()) {
            return Err(Error::Parameter(format!("kernel needs 0 < r < R, got r = {r}, R = {big_r}")));
        }
        Ok(Self { r, big_r, branch, sign })
    }

    /// `β` with `r = R^{−β}` (NaN unless `R > 1`).
    pub fn beta(&self) -> f64 {
        if self.big_r > 1.0 {
            -self.r.ln() / self.big_r.ln()
        } else {
            f64::NAN
        }
    }

    /// `ρ`-support of `Ψ(·, ξ₃)`.
    pub fn rho_support(&self, xi3: f64) -> Option<(f64, f64)> {
        let v = xi3.abs();
        if v <= 0.5 * self.r || v >= 2.0 * self.big_r {
            return None;
        }
        let a = 0.5 * self.r;
        let b = (4.0 * self.big_r * self.big_r - v * v).sqrt();
        (b > a).then_some((a, b))
    }

    #[inline]
    pub fn psi(&self, rho: f64, xi3: f64) -> f64 {
        psi_cutoff([rho, 0.0, xi3], self.r, self.big_r)
    }

    /// `max |∂_ρΓ|` over a sample of `[a, b] × {ξ₃}`.
    fn max_rate(&self, xi3s: &[f64], a: f64, b: f64) -> f64 {
        let mut m = 0.0f64;
        for &x in xi3s {
            for k in 0..=64 {
                let rho = a + (b - a) * k as f64 / 64.0;
                m = m.max(phase_radial_rate(self.branch, rho, x).abs());
            }
        }
        m
    }

    /// Row weights `2πρΨe^{−τρ²}e^{iσθΓ}·h` for a set of `ξ₃`, stored as
    /// interleaved (re, im) pairs.
    fn fill_row(&self, theta: f64, tau: f64, h: f64, xi3s: &[f64], rho: f64, row: &mut [f64]) {
        let sigma = self.sign.phase_factor();
        let g = 2.0 * PI * rho * (-tau * rho * rho).exp() * h;
        for (j, &x) in xi3s.iter().enumerate() {
            let amp = g * self.psi(rho, x);
            if amp == 0.0 {
                row[2 * j] = 0.0;
                row[2 * j + 1] = 0.0;
            } else {
                let (s, c) = (sigma * theta * phase_radial(self.branch, rho, x)).sin_cos();
                row[2 * j] = amp * c;
                row[2 * j + 1] = amp * s;
            }
        }
    }
}

/// A kernel value with its refinement-based error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelValue {
    pub value: C64,
    /// `|I_h − I_{h/2}|` at the last doubling.
    pub error_estimate: f64,
    /// Set when the doubling test did not pass within the node budget.
    pub degraded: bool,
    pub nodes: usize,
}

fn check_args(theta: f64, tau: f64) -> Result<()> {
    if !(theta.is_finite() && theta >= 0.0 && tau.is_finite() && tau >= 0.0) {
        return Err(Error::Parameter(format!("kernel needs finite θ, τ ≥ 0, got θ = {theta}, τ = {tau}")));
    }
    Ok(())
}

/// `K_±(θ, τ, z_h, ξ₃)` by the radial transform, trapezoid rule refined by
/// doubling until two successive values agree to [`KERNEL_RTOL`].
pub fn kernel(spec: &KernelSpec, theta: f64, tau: f64, z_h: [f64; 2], xi3: f64) -> Result<KernelValue> {
    check_args(theta, tau)?;
    let Some((a, b)) = spec.rho_support(xi3) else {
        return Ok(KernelValue {
            value: C64::new(0.0, 0.0),
            error_estimate: 0.0,
            degraded: false,
            nodes: 0,
        });
    };
    let z = z_h[0].hypot(z_h[1]);
    let sigma = spec.sign.phase_factor();
    let f = |rho: f64| -> (C64, f64) {
        let amp = 2.0 * PI * rho * spec.psi(rho, xi3) * (-tau * rho * rho).exp() * libm::j0(z * rho);
        if amp == 0.0 {
            return (C64::new(0.0, 0.0), 0.0);
        }
        let (s, c) = (sigma * theta * phase_radial(spec.branch, rho, xi3)).sin_cos();
        (C64::new(amp * c, amp * s), amp.abs())
    };
    let rate = theta * spec.max_rate(&[xi3], a, b) + z + 2.0 * tau * b;
    let h0 = (0.125 * (0.5 * spec.r).min(b - a)).min(2.0 * PI / (4.0 * rate.max(1e-300)));
    let mut rule = Trapezoid::with_step(a, b, h0);
    let sum = |nodes: Vec<f64>| {
        nodes.into_iter().fold((C64::new(0.0, 0.0), 0.0), |(s, m), x| {
            let (v, w) = f(x);
            (s + v, m + w)
        })
    };
    let (s0, m0) = sum(rule.nodes());
    let mut coarse = s0 * rule.h();
    let mut mass = m0 * rule.h();
    loop {
        let h = rule.h();
        let (sm, mm) = sum(rule.midpoints());
        let fine = 0.5 * coarse + sm * (0.5 * h);
        mass = 0.5 * mass + mm * 0.5 * h;
        let err = (fine - coarse).norm();
        rule = rule.refined();
        let converged = err <= KERNEL_RTOL * fine.norm() || err <= ROUNDOFF * mass;
        if converged || rule.intervals >= MAX_INTERVALS {
            return Ok(KernelValue {
                value: fine,
                error_estimate: err,
                degraded: !converged,
                nodes: rule.intervals - 1,
            });
        }
        coarse = fine;
    }
}

/// Independent check: tensor Gauss–Legendre over `[−b, b]²` split into
/// `panels²` squares, each with an `order`-point rule per axis.
pub fn kernel_tensor_gl(spec: &KernelSpec, theta: f64, tau: f64, z_h: [f64; 2], xi3: f64, panels: usize, order: usize) -> Result<C64> {
    check_args(theta, tau)?;
    let Some((_, b)) = spec.rho_support(xi3) else {
        return Ok(C64::new(0.0, 0.0));
    };
    let n = NonZeroUsize::new(order).ok_or_else(|| Error::Parameter("Gauss–Legendre order must be positive".into()))?;
    let rule = GaussLegendre::new(n);
    let ref_nodes = rule.as_node_weight_pairs();
    let w = 2.0 * b / panels as f64;
    let pts: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let c = -b + (p as f64 + 0.5) * w;
            ref_nodes.iter().map(move |&(x, wt)| (c + 0.5 * w * x, 0.5 * w * wt))
        })
        .collect();
    let sigma = spec.sign.phase_factor();
    let mut acc = C64::new(0.0, 0.0);
    for &(x, wx) in &pts {
        let mut row = C64::new(0.0, 0.0);
        for &(y, wy) in &pts {
            let xi = [x, y, xi3];
            let psi = psi_cutoff(xi, spec.r, spec.big_r);
            if psi == 0.0 {
                continue;
            }
            let arg = sigma * theta * phase(spec.branch, xi) + z_h[0] * x + z_h[1] * y;
            let (s, c) = arg.sin_cos();
            row += C64::new(c, s) * (psi * (-tau * (x * x + y * y)).exp() * wy);
        }
        acc += row * wx;
    }
    Ok(acc)
}

/// Adaptive wrapper: doubles the panel count until two values agree to
/// [`KERNEL_RTOL`].
pub fn kernel_tensor_adaptive(spec: &KernelSpec, theta: f64, tau: f64, z_h: [f64; 2], xi3: f64, max_panels: usize) -> Result<KernelValue> {
    const ORDER: usize = 8;
    let mut panels = 8;
    let mut prev = kernel_tensor_gl(spec, theta, tau, z_h, xi3, panels, ORDER)?;
    loop {
        panels *= 2;
        let next = kernel_tensor_gl(spec, theta, tau, z_h, xi3, panels, ORDER)?;
        let err = (next - prev).norm();
        let converged = err <= KERNEL_RTOL * next.norm();
        if converged || panels >= max_panels {
            return Ok(KernelValue {
                value: next,
                error_estimate: err,
                degraded: !converged,
                nodes: panels * panels * ORDER * ORDER,
            });
        }
        prev = next;
    }
}

/// Sampling of `(|z_h|, ξ₃)` for the sup: a dense grid evaluated in one
/// pass, then a pattern search from the best grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupSearch {
    pub n_xi3: usize,
    pub n_z: usize,
    /// Trapezoid nodes per `2π` of the fastest phase on the grid pass.
    pub points_per_wave: f64,
    /// Grid maxima refined by pattern search.
    pub refine: usize,
    /// Step halvings of the pattern search.
    pub refine_levels: usize,
}

impl Default for SupSearch {
    fn default() -> Self {
        Self {
            n_xi3: 48,
            n_z: 384,
            points_per_wave: 6.0,
            refine: 3,
            refine_levels: 5,
        }
    }
}

impl SupSearch {
    pub fn validate(&self) -> Result<()> {
        if self.n_xi3 < 2 || self.n_z < 2 || self.points_per_wave < 3.0 {
            return Err(Error::Config("sup search needs n_xi3 ≥ 2, n_z ≥ 2, points_per_wave ≥ 3".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupSample {
    pub theta: f64,
    pub tau: f64,
    /// Best refined `|K|`.
    pub sup: f64,
    pub z: f64,
    pub xi3: f64,
    /// Best value on the grid pass.
    pub grid_sup: f64,
    pub error_estimate: f64,
    pub degraded: bool,
}

/// Local maximizer of `f` on a box, by compass search.
pub(crate) fn pattern_search(
    f: &dyn Fn(f64, f64) -> Result<(f64, f64, bool)>,
    start: (f64, f64),
    step: (f64, f64),
    lo: (f64, f64),
    hi: (f64, f64),
    levels: usize,
) -> Result<(f64, f64, f64, f64, bool)> {
    let (mut x, mut y) = start;
    let (mut best, mut err, mut deg) = f(x, y)?;
    let (mut dx, mut dy) = step;
    for _ in 0..levels {
        let mut moved = true;
        let mut guard = 0;
        while moved && guard < 16 {
            moved = false;
            guard += 1;
            for (sx, sy) in [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)] {
                let (nx, ny) = ((x + sx * dx).clamp(lo.0, hi.0), (y + sy * dy).clamp(lo.1, hi.1));
                if (nx, ny) == (x, y) {
                    continue;
                }
                let (v, e, d) = f(nx, ny)?;
                if v > best {
                    (x, y, best, err, deg) = (nx, ny, v, e, d);
                    moved = true;
                }
            }
        }
        dx *= 0.5;
        dy *= 0.5;
    }
    Ok((x, y, best, err, deg))
}

/// Picks up to `k` grid maxima at least two cells apart.
pub(crate) fn top_cells(values: &[f64], rows: usize, cols: usize, k: usize) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut out: Vec<(usize, usize)> = Vec::new();
    for idx in order {
        if out.len() >= k {
            break;
        }
        let (i, j) = (idx / cols, idx % cols);
        debug_assert!(i < rows);
        if out.iter().all(|&(a, b)| a.abs_diff(i) > 2 || b.abs_diff(j) > 2) {
            out.push((i, j));
        }
    }
    out
}

/// `sup_{z_h, ξ₃} |K(θ, τ, ·, ·)|`. Only `ξ₃ > 0` is sampled:
/// `|K_±(−ξ₃)| = |K_∓(ξ₃)| = |K_±(ξ₃)|`.
pub fn kernel_sup(spec: &KernelSpec, theta: f64, tau: f64, cfg: &SupSearch) -> Result<SupSample> {
    check_args(theta, tau)?;
    cfg.validate()?;
    let (a, b) = (0.5 * spec.r, 2.0 * spec.big_r);
    let dx3 = (b - a) / cfg.n_xi3 as f64;
    let xi3s: Vec<f64> = (0..cfg.n_xi3).map(|j| a + (j as f64 + 0.5) * dx3).collect();
    let g_max = spec.max_rate(&xi3s, a, b);
    let z_max = 1.05 * theta * g_max + 1.0;
    let dz = z_max / (cfg.n_z - 1) as f64;
    let zs: Vec<f64> = (0..cfg.n_z).map(|i| i as f64 * dz).collect();
    let rate = theta * g_max + z_max + 2.0 * tau * b;
    let rule = Trapezoid::with_step(a, b, (spec.r / 16.0).min(2.0 * PI / (cfg.points_per_wave * rate)));
    let h = rule.h();
    let m = hankel_gemm(&zs, &rule.nodes(), 2 * xi3s.len(), |rho, row| spec.fill_row(theta, tau, h, &xi3s, rho, row));
    let cols = xi3s.len();
    let mods: Vec<f64> = (0..zs.len() * cols).map(|idx| m[(idx / cols, 2 * (idx % cols))].hypot(m[(idx / cols, 2 * (idx % cols) + 1)])).collect();
    let grid_sup = mods.iter().copied().fold(0.0, f64::max);

    let eval = |z: f64, x3: f64| -> Result<(f64, f64, bool)> {
        let k = kernel(spec, theta, tau, [z, 0.0], x3)?;
        Ok((k.value.norm(), k.error_estimate, k.degraded))
    };
    let mut best = SupSample {
        theta,
        tau,
        sup: 0.0,
        z: 0.0,
        xi3: xi3s[0],
        grid_sup,
        error_estimate: 0.0,
        degraded: false,
    };
    let mut any_degraded = false;
    for (i, j) in top_cells(&mods, zs.len(), cols, cfg.refine.max(1)) {
        let (z, x3, v, e, d) = pattern_search(&eval, (zs[i], xi3s[j]), (0.5 * dz, 0.5 * dx3), (0.0, a), (z_max, b), cfg.refine_levels)?;
        any_degraded |= d;
        if v > best.sup {
            best.sup = v;
            best.z = z;
            best.xi3 = x3;
            best.error_estimate = e;
        }
    }
    best.degraded = any_degraded;
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayFit {
    pub spec: KernelSpec,
    pub tau: f64,
    pub samples: Vec<SupSample>,
    /// Least-squares slope of `log sup|K|` against `log θ` on the window.
    pub slope: f64,
    pub intercept: f64,
    /// `[θ_lo, θ_hi]`: the last two decades of the grid.
    pub window: [f64; 2],
    /// `max sup|K| θ^{1/2} e^{r²τ/2} / R^{4+3β}` over all samples.
    pub envelope_ratio: f64,
}

/// Fits the `θ`-decay of `sup|K|`. The grid must span at least three decades.
pub fn kernel_decay_fit(spec: &KernelSpec, thetas: &[f64], tau: f64, cfg: &SupSearch) -> Result<DecayFit> {
    if thetas.is_empty() || thetas.iter().any(|&t| !(t > 0.0)) || thetas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("θ grid must be positive and increasing".into()));
    }
    let (lo, hi) = (thetas[0], thetas[thetas.len() - 1]);
    if hi / lo < 1e3 * (1.0 - 1e-9) {
        return Err(Error::Parameter(format!("θ grid spans {:.2} decades, need ≥ 3", (hi / lo).log10())));
    }
    let samples = thetas.iter().map(|&t| kernel_sup(spec, t, tau, cfg)).collect::<Result<Vec<_>>>()?;
    let window = [hi / 100.0 * (1.0 - 1e-12), hi];
    let (x, y): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .filter(|s| s.theta >= window[0])
        .map(|s| (s.theta.ln(), s.sup.ln()))
        .unzip();
    let (slope, intercept) = fit_line(&x, &y);
    let beta = spec.beta();
    let envelope_ratio = samples
        .iter()
        .map(|s| s.sup * s.theta.sqrt() * (0.5 * spec.r * spec.r * tau).exp() / spec.big_r.powf(4.0 + 3.0 * beta))
        .fold(0.0, f64::max);
    Ok(DecayFit {
        spec: *spec,
        tau,
        samples,
        slope,
        intercept,
        window,
        envelope_ratio,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TauFit {
    pub spec: KernelSpec,
    pub theta: f64,
    pub samples: Vec<SupSample>,
    /// Slope of `log sup|K|` against `τ`.
    pub slope: f64,
    /// `−r²/2`.
    pub predicted: f64,
    pub relative_error: f64,
}

pub fn kernel_tau_fit(spec: &KernelSpec, theta: f64, taus: &[f64], cfg: &SupSearch) -> Result<TauFit> {
    if taus.len() < 2 {
        return Err(Error::Parameter("τ fit needs at least two values".into()));
    }
    let samples = taus.iter().map(|&t| kernel_sup(spec, theta, t, cfg)).collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().map(|s| (s.tau, s.sup.ln())).unzip();
    let (slope, _) = fit_line(&x, &y);
    let predicted = -0.5 * spec.r * spec.r;
    Ok(TauFit {
        spec: *spec,
        theta,
        samples,
        slope,
        predicted,
        relative_error: (slope - predicted).abs() / predicted.abs(),
    })
}
