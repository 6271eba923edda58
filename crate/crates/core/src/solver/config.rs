use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Lawson integrating-factor RK4; the linear part is propagated exactly.
    #[default]
    IfRk4,
    /// `(I − h𝔹)U^{n+1} = U^n + hN(U^n)`; first order, kept as a cross-check.
    ImexEuler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DealiasRule {
    #[default]
    TwoThirds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    /// Evolve `U` directly.
    #[default]
    Direct,
    /// Evolve `Ū` by the exact linear flow and `Ũ` with `Ū` as forcing.
    CoupledSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub dealias: DealiasRule,
    /// Emit a record every this many steps (the final state is always
    /// recorded).
    #[serde(default = "default_output_every")]
    pub output_every: usize,
    /// Blow-up when `‖U‖_{H^{0,s}}` exceeds this multiple of its initial value.
    #[serde(default = "default_blowup_factor")]
    pub blowup_factor: f64,
    /// `C̃` in the bootstrap threshold `ε^α/(2C̃)`.
    #[serde(default = "default_bootstrap_c")]
    pub bootstrap_c: f64,
    /// Use the closed-form eigen-expansion for the propagator where defined.
    #[serde(default)]
    pub eigen_route: bool,
}

fn default_output_every() -> usize {
    10
}

fn default_blowup_factor() -> f64 {
    1e3
}

fn default_bootstrap_c() -> f64 {
    1.0
}

impl SolverConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            integrator: Integrator::default(),
            dealias: DealiasRule::default(),
            output_every: default_output_every(),
            blowup_factor: default_blowup_factor(),
            bootstrap_c: default_bootstrap_c(),
            eigen_route: false,
        }
    }

    /// Number of steps; `t_end` must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        self.validate()?;
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::Config(format!(
                "t_end = {} is not a whole number of steps of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be at least 1".into()));
        }
        if !(self.blowup_factor > 1.0) {
            return Err(Error::Config(format!("blowup_factor must exceed 1, got {}", self.blowup_factor)));
        }
        if !(self.bootstrap_c > 0.0) {
            return Err(Error::Config(format!("bootstrap_c must be positive, got {}", self.bootstrap_c)));
        }
        Ok(())
    }
}
