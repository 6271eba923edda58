//! TOML experiment configuration. Every table rejects unknown keys, and
//! `validate` runs before any compute and names the first violated
//! constraint.

use std::path::{Path, PathBuf};

use rotmhd::cutoff::{schedule_parameters, CutoffParams};
use rotmhd::dispersion::{Branch, KernelSpec, Profile, Sign, StrichartzConfig, SupSearch};
use rotmhd::init::InitSpec;
use rotmhd::linear::ModelParams;
use rotmhd::solver::{RunMode, SolverConfig};
use rotmhd::Grid;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Simulate,
    Linear,
    Kernels,
    Strichartz,
    Sweep,
    Check,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Simulate => "simulate",
            Kind::Linear => "linear",
            Kind::Kernels => "kernels",
            Kind::Strichartz => "strichartz",
            Kind::Sweep => "sweep",
            Kind::Check => "check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Kind,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<CutoffSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linear: Option<LinearSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strichartz: Option<StrichartzSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_h: usize,
    pub n_v: usize,
    /// Box lengths; default `2π`.
    #[serde(default = "two_pi")]
    pub box_h: f64,
    #[serde(default = "two_pi")]
    pub box_v: f64,
}

fn two_pi() -> f64 {
    2.0 * std::f64::consts::PI
}

impl GridSection {
    pub fn build(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.n_h, self.n_v, self.box_h, self.box_v)?)
    }
}

/// `scaled` sets `ν = ν′ = ε^α`, `μ = 1/ε`; `generic` reads `nu`, `nu_b`,
/// `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub eps: f64,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default = "one")]
    pub s: f64,
    #[serde(default = "one")]
    pub eta: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

fn one() -> f64 {
    1.0
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams, CliError> {
        self.params_at(self.eps)
    }

    /// Same model at another `ε` (the sweep varies only `ε`).
    pub fn params_at(&self, eps: f64) -> Result<ModelParams, CliError> {
        let p = match (self.nu, self.nu_b, self.mu) {
            (None, None, None) => ModelParams::scaled(eps, self.alpha)?,
            (Some(nu), Some(nu_b), Some(mu)) => ModelParams::generic(eps, nu, nu_b, mu)?,
            _ => {
                return Err(CliError::Config(
                    "model: give all of nu, nu_b, mu (generic system) or none of them (scaled system)".into(),
                ))
            }
        };
        Ok(p.with_regularity(self.s, self.eta, self.beta)?)
    }
}

/// Either explicit radii `r`, `R` or the schedule product `c_product`
/// (the constant `8CC₀`), never both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub big_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_product: Option<f64>,
}

impl CutoffSection {
    pub fn resolve(&self, model: &ModelSection, eps: f64) -> Result<CutoffParams, CliError> {
        match (self.r, self.big_r, self.c_product) {
            (Some(r), Some(big_r), None) => Ok(CutoffParams::fixed(r, big_r)?),
            (None, None, Some(c)) => Ok(schedule_parameters(eps, model.alpha, model.beta, model.eta, model.s, c)?),
            _ => Err(CliError::Config(
                "cutoff: give either r and R, or c_product for the schedule".into(),
            )),
        }
    }

    pub fn is_schedule(&self) -> bool {
        self.c_product.is_some()
    }
}

/// Seeded random data: spectrum `|ξ|^exponent` in `[k_min, k_max]`,
/// Leray-projected, then scaled to one norm target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    #[serde(default)]
    pub k_min: f64,
    #[serde(default = "infinite", skip_serializing_if = "is_infinite")]
    pub k_max: f64,
    #[serde(default = "minus_four")]
    pub exponent: f64,
    #[serde(default = "yes")]
    pub exclude_degenerate: bool,
    /// Magnetic amplitude relative to the velocity.
    #[serde(default = "one")]
    pub b_weight: f64,
    /// Target `‖U₀‖_{L²}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l2: Option<f64>,
    /// Target `‖U₀‖_{H^{0,s}}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0s: Option<f64>,
    /// Target `‖U₀‖_{H^{0,s}}` as a multiple of the small-data threshold
    /// `c·min(ν, ν′)` (sweep only; `ν` is taken at the largest `ε`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold_multiple: Option<f64>,
    /// The constant `c` of the small-data threshold.
    #[serde(default = "one")]
    pub threshold_c: f64,
}

fn infinite() -> f64 {
    f64::INFINITY
}

fn is_infinite(x: &f64) -> bool {
    x.is_infinite()
}

fn minus_four() -> f64 {
    -4.0
}

fn yes() -> bool {
    true
}

impl InitSection {
    pub fn spec(&self) -> InitSpec {
        InitSpec {
            k_min: self.k_min,
            k_max: self.k_max,
            exponent: self.exponent,
            exclude_degenerate: self.exclude_degenerate,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let targets = [self.l2.is_some(), self.h0s.is_some(), self.threshold_multiple.is_some()];
        if targets.iter().filter(|x| **x).count() != 1 {
            return Err(CliError::Config("init: give exactly one of l2, h0s, threshold_multiple".into()));
        }
        for (name, v) in [("l2", self.l2), ("h0s", self.h0s), ("threshold_multiple", self.threshold_multiple)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Config(format!("init.{name} must be positive, got {v}")));
                }
            }
        }
        if !(self.k_min >= 0.0 && self.k_max > self.k_min) {
            return Err(CliError::Config(format!("init: need 0 ≤ k_min < k_max, got [{}, {}]", self.k_min, self.k_max)));
        }
        if !(self.b_weight >= 0.0 && self.threshold_c > 0.0) {
            return Err(CliError::Config("init: b_weight must be ≥ 0 and threshold_c > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default)]
    pub mode: RunMode,
}

/// Frequencies for the eigen-structure dump: explicit points plus `random`
/// samples drawn uniformly from `𝒞_{r,R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearSection {
    #[serde(default)]
    pub frequencies: Vec<[f64; 3]>,
    #[serde(default)]
    pub random: usize,
    #[serde(default = "quarter")]
    pub r: f64,
    #[serde(rename = "R", default = "four")]
    pub big_r: f64,
    /// Propagation time for the eigen-route vs `expm` comparison.
    #[serde(default = "one")]
    pub t: f64,
}

fn quarter() -> f64 {
    0.25
}

fn four() -> f64 {
    4.0
}

/// `θ` grid: explicit list, or `per_decade` log-spaced points on
/// `[theta_min, theta_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelsSection {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "both_branches")]
    pub branches: Vec<Branch>,
    #[serde(default = "plus")]
    pub sign: Sign,
    #[serde(default)]
    pub thetas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_max: Option<f64>,
    #[serde(default = "four_per")]
    pub per_decade: usize,
    /// `τ` for the `θ`-decay fit.
    #[serde(default)]
    pub tau: f64,
    /// `τ` list for the damping fit; empty skips it.
    #[serde(default)]
    pub taus: Vec<f64>,
    /// `θ` at which the damping fit is taken.
    #[serde(default)]
    pub tau_theta: f64,
    #[serde(default)]
    pub search: SupSearch,
}

fn both_branches() -> Vec<Branch> {
    vec![Branch::A, Branch::B]
}

fn plus() -> Sign {
    Sign::Plus
}

fn four_per() -> usize {
    4
}

impl KernelsSection {
    pub fn spec(&self, branch: Branch) -> Result<KernelSpec, CliError> {
        Ok(KernelSpec::new(self.r, self.big_r, branch, self.sign)?)
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>, CliError> {
        match (self.thetas.is_empty(), self.theta_min, self.theta_max) {
            (false, None, None) => Ok(self.thetas.clone()),
            (true, Some(lo), Some(hi)) => {
                if !(lo > 0.0 && hi > lo && self.per_decade > 0) {
                    return Err(CliError::Config(format!("kernels: need 0 < theta_min < theta_max, got {lo}, {hi}")));
                }
                Ok(log_grid(lo, hi, self.per_decade))
            }
            _ => Err(CliError::Config(
                "kernels: give either thetas or theta_min and theta_max".into(),
            )),
        }
    }
}

/// `lo·10^{k/per_decade}` up to `hi` inclusive (within rounding).
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let n = ((hi / lo).log10() * per_decade as f64 + 1e-9).floor() as usize;
    (0..=n).map(|k| lo * 10f64.powf(k as f64 / per_decade as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzSection {
    pub r: f64,
    #[serde(rename = "R")]
    pub big_r: f64,
    #[serde(default = "branch_a")]
    pub branch: Branch,
    #[serde(default = "plus")]
    pub sign: Sign,
    pub alphas: Vec<f64>,
    pub ps: Vec<f64>,
    pub eps_list: Vec<f64>,
    #[serde(default)]
    pub profile: Profile,
    #[serde(default)]
    pub numerics: StrichartzConfig,
}

fn branch_a() -> Branch {
    Branch::A
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub eps_list: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    Eigen,
    Propagator,
    Energy,
    Cancellation,
    LittlewoodPaley,
    TwoRoute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub checks: Vec<CheckName>,
    /// Sample count for the per-mode checks.
    #[serde(default = "thousand")]
    pub samples: usize,
}

fn thousand() -> usize {
    1000
}

fn require<'a, T>(x: &'a Option<T>, name: &str, kind: Kind) -> Result<&'a T, CliError> {
    x.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing required table [{name}] for kind = \"{}\"", kind.name())))
}

fn positive_list(name: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.is_empty() {
        return Err(CliError::Config(format!("{name} must not be empty")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(CliError::Config(format!("{name} entries must be positive, got {x}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<&GridSection, CliError> {
        require(&self.grid, "grid", self.kind)
    }

    pub fn model(&self) -> Result<&ModelSection, CliError> {
        require(&self.model, "model", self.kind)
    }

    pub fn solver(&self) -> Result<&SolverConfig, CliError> {
        require(&self.solver, "solver", self.kind)
    }

    pub fn init(&self) -> Result<&InitSection, CliError> {
        require(&self.init, "init", self.kind)
    }

    pub fn cutoff(&self) -> Result<&CutoffSection, CliError> {
        require(&self.cutoff, "cutoff", self.kind)
    }

    pub fn run_mode(&self) -> RunMode {
        self.simulate.map(|s| s.mode).unwrap_or_default()
    }

    /// Every constraint that can be checked without compute.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.kind {
            Kind::Simulate | Kind::Sweep => {
                let g = self.grid()?.build()?;
                let model = self.model()?;
                self.solver()?.steps()?;
                let init = self.init()?;
                init.validate()?;
                let eps_list = if self.kind == Kind::Sweep {
                    let s = require(&self.sweep, "sweep", self.kind)?;
                    positive_list("sweep.eps_list", &s.eps_list)?;
                    if !self.cutoff()?.is_schedule() {
                        return Err(CliError::Config("sweep: cutoff must use the schedule (c_product)".into()));
                    }
                    s.eps_list.clone()
                } else {
                    if init.threshold_multiple.is_some() {
                        return Err(CliError::Config("init.threshold_multiple is only meaningful for sweeps".into()));
                    }
                    vec![model.eps]
                };
                for &eps in &eps_list {
                    model.params_at(eps)?;
                }
                if self.kind == Kind::Sweep || self.run_mode() == RunMode::CoupledSplit {
                    let c = self.cutoff()?;
                    for &eps in &eps_list {
                        c.resolve(model, eps)?.check_resolution(&g)?;
                    }
                }
            }
            Kind::Linear => {
                self.model()?.params()?;
                let l = require(&self.linear, "linear", self.kind)?;
                if l.frequencies.is_empty() && l.random == 0 {
                    return Err(CliError::Config("linear: give frequencies or random > 0".into()));
                }
                if !(l.r > 0.0 && l.big_r > l.r) {
                    return Err(CliError::Config(format!("linear: need 0 < r < R, got {}, {}", l.r, l.big_r)));
                }
                if !(l.t >= 0.0 && l.t.is_finite()) {
                    return Err(CliError::Config(format!("linear.t must be non-negative, got {}", l.t)));
                }
            }
            Kind::Kernels => {
                let k = require(&self.kernels, "kernels", self.kind)?;
                if k.branches.is_empty() {
                    return Err(CliError::Config("kernels.branches must not be empty".into()));
                }
                k.spec(Branch::A)?;
                k.theta_grid()?;
                k.search.validate()?;
                if !(k.tau >= 0.0 && k.tau_theta >= 0.0) {
                    return Err(CliError::Config("kernels: tau and tau_theta must be non-negative".into()));
                }
                if !k.taus.is_empty() && k.taus.len() < 2 {
                    return Err(CliError::Config("kernels.taus needs at least two values".into()));
                }
            }
            Kind::Strichartz => {
                let s = require(&self.strichartz, "strichartz", self.kind)?;
                KernelSpec::new(s.r, s.big_r, s.branch, s.sign)?;
                positive_list("strichartz.eps_list", &s.eps_list)?;
                if s.ps.is_empty() || s.ps.iter().any(|p| !(*p >= 1.0)) {
                    return Err(CliError::Config("strichartz.ps must be non-empty with every p ≥ 1 (inf allowed)".into()));
                }
                if s.alphas.is_empty() || s.alphas.iter().any(|a| !(0.0..1.0 / 3.0).contains(a)) {
                    return Err(CliError::Config("strichartz.alphas must be non-empty and lie in [0, 1/3)".into()));
                }
                s.profile.validate()?;
                s.numerics.validate()?;
            }
            Kind::Check => {
                let c = require(&self.check, "check", self.kind)?;
                if c.checks.is_empty() || c.samples == 0 {
                    return Err(CliError::Config("check: need at least one check and samples > 0".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// Parsed and validated config plus the text it came from (the manifest
/// hash is taken over the text).
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub text: String,
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = ExperimentConfig::from_toml(&text)?;
    Ok(LoadedConfig { config, text })
}
