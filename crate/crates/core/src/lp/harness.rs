//! Empirical harness for the Bernstein inequalities, the Sobolev product
//! laws and the localized energy estimates.
//!
//! The inequalities involve existential constants, so every check reports
//! the ratio of the two sides rather than a verdict. Random inputs have
//! zero mean (constants are degenerate for product laws).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{PhysicalField, SpectralField, SpectralScalar, C64};
use crate::grid::Grid;
use crate::lp::bump::block_multiplier;
use crate::norms::{aniso_lebesgue_norm, grad_h_h0s, h0s};
use crate::ops::advect;

/// Hermitian, zero-mean coefficients drawn where `keep(wavenumbers)` holds.
/// Nyquist modes are never populated.
fn random_hermitian(grid: &Grid, seed: u64, keep: impl Fn(usize) -> bool) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nyq = [grid.n_h() as i64 / 2, grid.n_h() as i64 / 2, grid.n_v() as i64 / 2];
    let mut c = vec![C64::new(0.0, 0.0); grid.len()];
    for idx in 1..grid.len() {
        let m = grid.mirror(idx);
        if m < idx {
            continue;
        }
        let k = grid.wavenumbers(idx);
        if (0..3).any(|a| k[a].abs() == nyq[a]) || !keep(idx) {
            continue;
        }
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        if m == idx {
            c[idx] = C64::new(re, 0.0);
        } else {
            c[idx] = C64::new(re, im);
            c[m] = C64::new(re, -im);
        }
    }
    c
}

/// Random real scalar with `|k_a| ≤ kmax[a]` on each axis.
pub fn random_scalar(grid: &Grid, seed: u64, kmax: [i64; 3]) -> Vec<C64> {
    random_hermitian(grid, seed, |idx| {
        let k = grid.wavenumbers(idx);
        (0..3).all(|a| k[a].abs() <= kmax[a])
    })
}

/// Direction in which a Bernstein inequality is tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BernsteinDirection {
    /// `ξ_h ∈ ℝ²`; norms `L^p_h L²_v`.
    H,
    /// `ξ₃ ∈ ℝ`; norms `L²_h L^p_v`.
    V,
    /// `ξ ∈ ℝ³`; plain `L^p` norms.
    Full,
}

impl BernsteinDirection {
    pub fn dim(self) -> i32 {
        match self {
            Self::H => 2,
            Self::V => 1,
            Self::Full => 3,
        }
    }

    fn magnitude(self, xi: [f64; 3]) -> f64 {
        match self {
            Self::H => xi[0].hypot(xi[1]),
            Self::V => xi[2].abs(),
            Self::Full => (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt(),
        }
    }

    fn norm(self, f: &PhysicalField, p: f64) -> Result<f64> {
        match self {
            Self::H => aniso_lebesgue_norm(f, p, 2.0),
            Self::V => aniso_lebesgue_norm(f, 2.0, p),
            Self::Full => aniso_lebesgue_norm(f, p, p),
        }
    }

    /// Multi-indices `α` with `|α| = k` supported on this direction's axes.
    fn multi_indices(self, k: u32) -> Vec<[u32; 3]> {
        let mut out = Vec::new();
        for a in 0..=k {
            for b in 0..=k - a {
                let c = k - a - b;
                let ok = match self {
                    Self::H => c == 0,
                    Self::V => a == 0 && b == 0,
                    Self::Full => true,
                };
                if ok {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }
}

/// Random field whose spectrum lies in `{λ r₁ ≤ |ξ_dir| ≤ λ r₂}` (a ball
/// when `r₁ = 0`) and which is constant in the complementary directions.
pub fn random_ring_scalar(grid: &Grid, seed: u64, lambda: f64, r1: f64, r2: f64, dir: BernsteinDirection) -> Result<Vec<C64>> {
    let c = random_hermitian(grid, seed, |idx| {
        let xi = grid.xi(idx);
        let z = dir.magnitude(xi);
        let off_axis = match dir {
            BernsteinDirection::H => xi[2] != 0.0,
            BernsteinDirection::V => xi[0] != 0.0 || xi[1] != 0.0,
            BernsteinDirection::Full => false,
        };
        !off_axis && z >= lambda * r1 && z <= lambda * r2
    });
    if c.iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return Err(Error::Parameter(format!(
            "no grid mode in the ring [{}, {}] at λ = {lambda}",
            lambda * r1,
            lambda * r2
        )));
    }
    Ok(c)
}

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinReport {
    /// `sup_{|α|=k} ‖∂^α u‖_{L^q}`
    pub lhs: f64,
    /// `λ^{k + d(1/p − 1/q)} ‖u‖_{L^p}`
    pub rhs_band: f64,
    /// `lhs / rhs_band`; bounded above by `C^k` for ball and ring support.
    pub ratio: f64,
    /// `sup_{|α|=k} ‖∂^α u‖_{L^p} / (λ^k ‖u‖_{L^p})`; bounded below by
    /// `C^{−k}` for ring support.
    pub lower_ratio: f64,
}

fn scalar_physical(fft: &Fft3, c: &[C64]) -> Result<PhysicalField> {
    let g = *fft.grid();
    let v = fft.inverse_scalar(&SpectralScalar::from_coeffs(&g, c.to_vec())?)?;
    PhysicalField::from_components(&g, [v, vec![0.0; g.len()], vec![0.0; g.len()]])
}

fn derivative(grid: &Grid, c: &[C64], alpha: [u32; 3]) -> Vec<C64> {
    c.iter()
        .enumerate()
        .map(|(idx, x)| {
            let xi = grid.xi_op(idx);
            let mut m = C64::new(1.0, 0.0);
            for a in 0..3 {
                m *= C64::new(0.0, xi[a]).powu(alpha[a]);
            }
            x * m
        })
        .collect()
}

/// Compares `sup_{|α|=k} ‖∂^α u‖_{L^q}` with `λ^{k+d(1/p−1/q)}‖u‖_{L^p}`.
/// Exponents must lie in `{1, 2, 4, ∞}` with `p ≤ q`.
pub fn check_bernstein(fft: &Fft3, u: &[C64], lambda: f64, k: u32, p: f64, q: f64, dir: BernsteinDirection) -> Result<BernsteinReport> {
    if p > q {
        return Err(Error::Parameter(format!("Bernstein needs p ≤ q, got p = {p}, q = {q}")));
    }
    if lambda <= 0.0 {
        return Err(Error::Parameter(format!("λ must be positive, got {lambda}")));
    }
    let g = *fft.grid();
    let up = dir.norm(&scalar_physical(fft, u)?, p)?;
    let (mut lhs, mut same) = (0.0f64, 0.0f64);
    for alpha in dir.multi_indices(k) {
        let d = scalar_physical(fft, &derivative(&g, u, alpha))?;
        lhs = lhs.max(dir.norm(&d, q)?);
        same = same.max(dir.norm(&d, p)?);
    }
    let expo = k as f64 + dir.dim() as f64 * (1.0 / p - 1.0 / q);
    let rhs_band = lambda.powf(expo) * up;
    Ok(BernsteinReport {
        lhs,
        rhs_band,
        ratio: lhs / rhs_band,
        lower_ratio: same / (lambda.powi(k as i32) * up),
    })
}

/// Product laws in `ℝ³`, with the exponent hypotheses they require.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ProductLaw {
    /// `H^s · H^t ⊂ H^{s+t−3/2}`.
    Iso { s: f64, t: f64 },
    /// `H^{s,s′} · H^{t,t′} ⊂ H^{s+t−1, s′+t′−1/2}`.
    Aniso { s: f64, t: f64, s_v: f64, t_v: f64 },
    /// `H^{σ,s₀} · H^{σ′,s₁} ⊂ H^{σ+σ′−1, s₁}`.
    Uni { sigma: f64, sigma_p: f64, s0: f64, s1: f64 },
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(format!("hypothesis violated: {what}")))
    }
}

impl ProductLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Iso { s, t } => {
                require(s < 1.5, "s < 3/2")?;
                require(t < 1.5, "t < 3/2")?;
                require(s + t > 0.0, "s + t > 0")
            }
            Self::Aniso { s, t, s_v, t_v } => {
                require(s < 1.0, "s < 1")?;
                require(t < 1.0, "t < 1")?;
                require(s + t > 0.0, "s + t > 0")?;
                require(s_v < 0.5, "s' < 1/2")?;
                require(t_v < 0.5, "t' < 1/2")?;
                require(s_v + t_v > 0.0, "s' + t' > 0")
            }
            Self::Uni { sigma, sigma_p, s0, s1 } => {
                require(sigma < 1.0, "σ < 1")?;
                require(sigma_p < 1.0, "σ' < 1")?;
                require(sigma + sigma_p > 0.0, "σ + σ' > 0")?;
                require(s0 > 0.5, "s0 > 1/2")?;
                require(s1 <= s0, "s1 ≤ s0")?;
                require(s0 + s1 > 0.0, "s0 + s1 > 0")
            }
        }
    }

    /// `(u space, v space, target space)` as `(σ_h, σ_v)` pairs, with the
    /// isotropic case encoded as `(s, NaN)`.
    fn spaces(&self) -> [(f64, f64); 3] {
        match *self {
            Self::Iso { s, t } => [(s, f64::NAN), (t, f64::NAN), (s + t - 1.5, f64::NAN)],
            Self::Aniso { s, t, s_v, t_v } => [(s, s_v), (t, t_v), (s + t - 1.0, s_v + t_v - 0.5)],
            Self::Uni { sigma, sigma_p, s0, s1 } => [(sigma, s0), (sigma_p, s1), (sigma + sigma_p - 1.0, s1)],
        }
    }
}

/// Inhomogeneous norm of a scalar: `(1+|ξ|²)^s` when `sv` is NaN,
/// `(1+|ξ_h|²)^{sh}(1+ξ₃²)^{sv}` otherwise.
fn scalar_sobolev(grid: &Grid, c: &[C64], (sh, sv): (f64, f64)) -> f64 {
    let s: f64 = c
        .iter()
        .enumerate()
        .filter(|(_, x)| x.norm_sqr() > 0.0)
        .map(|(idx, x)| {
            let xi = grid.xi(idx);
            let h2 = xi[0] * xi[0] + xi[1] * xi[1];
            let v2 = xi[2] * xi[2];
            let w = if sv.is_nan() {
                (1.0 + h2 + v2).powf(sh)
            } else {
                (1.0 + h2).powf(sh) * (1.0 + v2).powf(sv)
            };
            w * x.norm_sqr()
        })
        .sum();
    (grid.parseval_factor() * s).sqrt()
}

fn check_band_limited(grid: &Grid, c: &[C64], name: &str) -> Result<()> {
    let n = [grid.n_h() as i64, grid.n_h() as i64, grid.n_v() as i64];
    for (idx, x) in c.iter().enumerate() {
        if x.norm_sqr() > 0.0 {
            let k = grid.wavenumbers(idx);
            if (0..3).any(|a| 4 * k[a].abs() >= n[a]) {
                return Err(Error::Parameter(format!(
                    "{name} must be band-limited to |k| < n/4 per axis so that the product is alias-free"
                )));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductReport {
    pub lhs_norm: f64,
    pub rhs_product: f64,
    pub empirical_c: f64,
}

/// Exact product of two band-limited scalars, compared against the product
/// of their norms.
pub fn check_product_law(fft: &Fft3, u: &[C64], v: &[C64], law: ProductLaw) -> Result<ProductReport> {
    law.validate()?;
    let g = *fft.grid();
    check_band_limited(&g, u, "u")?;
    check_band_limited(&g, v, "v")?;
    let (pu, pv) = fft.inverse_pair(u, v)?;
    let prod: Vec<f64> = pu.iter().zip(&pv).map(|(a, b)| a * b).collect();
    let uv = fft.forward_scalar(&prod)?.c;
    let [su, sv, st] = law.spaces();
    let lhs_norm = scalar_sobolev(&g, &uv, st);
    let rhs_product = scalar_sobolev(&g, u, su) * scalar_sobolev(&g, v, sv);
    Ok(ProductReport {
        lhs_norm,
        rhs_product,
        empirical_c: lhs_norm / rhs_product,
    })
}

/// Localized energy estimates for `u·∇`, with `u` in `H^{0,s₀}` and the
/// transported fields in `H^{0,s₁}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EnergyLemma {
    /// `⟨Δ_q(u·∇v)|Δ_q v⟩`, `s₁ ≥ s₀ > 1/2`.
    Transport { s0: f64, s1: f64 },
    /// `⟨Δ_q(u·∇v)|Δ_q w⟩ + ⟨Δ_q(u·∇w)|Δ_q v⟩`, `s₁ ≥ s₀ > 1/2`.
    Coupled { s0: f64, s1: f64 },
    /// As `Transport` with `s₁ < s₀`, `s₀ + s₁ > 0`.
    TransportLow { s0: f64, s1: f64 },
    /// As `Coupled` with `s₁ < s₀`, `s₀ + s₁ > 0`.
    CoupledLow { s0: f64, s1: f64 },
}

impl EnergyLemma {
    pub fn exponents(&self) -> (f64, f64) {
        match *self {
            Self::Transport { s0, s1 } | Self::Coupled { s0, s1 } | Self::TransportLow { s0, s1 } | Self::CoupledLow { s0, s1 } => {
                (s0, s1)
            }
        }
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self, Self::Coupled { .. } | Self::CoupledLow { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let (s0, s1) = self.exponents();
        require(s0 > 0.5, "s0 > 1/2")?;
        match self {
            Self::Transport { .. } | Self::Coupled { .. } => require(s1 >= s0, "s1 ≥ s0"),
            _ => {
                require(s1 < s0, "s1 < s0")?;
                require(s0 + s1 > 0.0, "s0 + s1 > 0")
            }
        }
    }
}

/// `‖f‖_{H^{0,s}}` and `‖∇_h f‖_{H^{0,s}}`.
fn norm_pair(f: &SpectralField, s: f64) -> (f64, f64) {
    (h0s(f, s), grad_h_h0s(f, s))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub q: i32,
    pub lhs: f64,
    /// Right side without the constant and `d_q`.
    pub rhs: f64,
    /// `lhs / rhs`, the empirical `C d_q`.
    pub ratio: f64,
}

/// Precomputed pieces shared by every block index.
pub struct EnergyInputs {
    lemma: EnergyLemma,
    u: SpectralField,
    v: SpectralField,
    w: SpectralField,
    adv_v: SpectralField,
    adv_w: SpectralField,
    /// `2^{2qs₁}`-free right side.
    rhs_core: f64,
}

impl EnergyInputs {
    /// Inputs are dealiased first, which makes the pseudo-spectral advection
    /// exact on the retained modes. `w` is ignored by the transport forms.
    pub fn new(fft: &Fft3, u: &SpectralField, v: &SpectralField, w: &SpectralField, lemma: EnergyLemma) -> Result<Self> {
        lemma.validate()?;
        for (f, name) in [(u, "u"), (v, "v"), (w, "w")] {
            if !f.is_divergence_free() && !(name == "w" && !lemma.is_coupled()) {
                return Err(Error::InvariantViolation(format!("{name} is not divergence-free")));
            }
        }
        let (u, v, w) = (u.dealiased(), v.dealiased(), w.dealiased());
        let (s0, s1) = lemma.exponents();
        let (nu, gu) = norm_pair(&u, s0);
        let (nv, gv) = norm_pair(&v, s1);
        let (nw, gw) = norm_pair(&w, s1);
        let rhs_core = match lemma {
            EnergyLemma::Transport { .. } => gu * nv * gv + (nu * gu * nv).sqrt() * gv.powf(1.5),
            EnergyLemma::Coupled { .. } => {
                (gu * gv * gw).sqrt() * ((nu * nv * gw).sqrt() + (nu * gv * nw).sqrt() + (gu * nv * nw).sqrt())
            }
            EnergyLemma::TransportLow { .. } => (nu + gu) * nv * gv,
            EnergyLemma::CoupledLow { .. } => (nu + gu) * (nv * gv * nw * gw).sqrt(),
        };
        let adv_v = advect(fft, &u, &v)?;
        let adv_w = if lemma.is_coupled() { advect(fft, &u, &w)? } else { SpectralField::zeros(&u.grid) };
        Ok(Self {
            lemma,
            u,
            v,
            w,
            adv_v,
            adv_w,
            rhs_core,
        })
    }

    /// `⟨Δ_q a | Δ_q b⟩`.
    fn localized_inner(a: &SpectralField, b: &SpectralField, q: i32) -> f64 {
        let g = a.grid;
        let pf = g.parseval_factor();
        let mut s = 0.0;
        for idx in 0..g.len() {
            let m = block_multiplier(q, g.xi(idx)[2].abs());
            if m == 0.0 {
                continue;
            }
            let (x, y) = (a.mode(idx), b.mode(idx));
            s += m * m * (0..3).map(|i| (x[i] * y[i].conj()).re).sum::<f64>();
        }
        pf * s
    }

    pub fn report(&self, q: i32) -> EnergyReport {
        let lhs = if self.lemma.is_coupled() {
            Self::localized_inner(&self.adv_v, &self.w, q) + Self::localized_inner(&self.adv_w, &self.v, q)
        } else {
            Self::localized_inner(&self.adv_v, &self.v, q)
        }
        .abs();
        let (_, s1) = self.lemma.exponents();
        let rhs = f64::powf(2.0, -2.0 * q as f64 * s1) * self.rhs_core;
        EnergyReport { q, lhs, rhs, ratio: lhs / rhs }
    }

    /// Unlocalized trilinear form (which vanishes exactly) and the natural
    /// scale it is measured against.
    pub fn cancellation(&self) -> (f64, f64) {
        if self.lemma.is_coupled() {
            let r = self.adv_v.inner(&self.w) + self.adv_w.inner(&self.v);
            let scale = self.adv_v.norm_l2() * self.w.norm_l2() + self.adv_w.norm_l2() * self.v.norm_l2();
            (r, scale)
        } else {
            (self.adv_v.inner(&self.v), self.adv_v.norm_l2() * self.v.norm_l2())
        }
    }

    pub fn transport(&self) -> &SpectralField {
        &self.u
    }
}

/// Report for a single block index.
pub fn check_energy_lemma(
    fft: &Fft3,
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    q: i32,
    lemma: EnergyLemma,
) -> Result<EnergyReport> {
    if q < -1 {
        return Err(Error::Parameter(format!("block index must be ≥ −1, got {q}")));
    }
    Ok(EnergyInputs::new(fft, u, v, w, lemma)?.report(q))
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergySweep {
    pub per_q: Vec<EnergyReport>,
    /// `Σ_q lhs/rhs`, the empirical `C Σ d_q`.
    pub ratio_sum: f64,
    pub cancellation: f64,
    pub cancellation_scale: f64,
}

pub fn energy_sweep(
    fft: &Fft3,
    u: &SpectralField,
    v: &SpectralField,
    w: &SpectralField,
    qs: impl IntoIterator<Item = i32>,
    lemma: EnergyLemma,
) -> Result<EnergySweep> {
    let inputs = EnergyInputs::new(fft, u, v, w, lemma)?;
    let per_q: Vec<EnergyReport> = qs.into_iter().map(|q| inputs.report(q)).collect();
    let ratio_sum = per_q.iter().map(|r| r.ratio).sum();
    let (cancellation, cancellation_scale) = inputs.cancellation();
    Ok(EnergySweep {
        per_q,
        ratio_sum,
        cancellation,
        cancellation_scale,
    })
}
