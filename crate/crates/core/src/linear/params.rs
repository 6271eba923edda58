use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which member of the family of systems the parameters describe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemMode {
    /// `ν = ν′ = ε^α`, `μ = 1/ε`: the fast-rotation scaling.
    Scaled,
    /// Independent `ν`, `ν′`, `μ`.
    Generic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub eps: f64,
    pub alpha: f64,
    pub nu: f64,
    pub nu_b: f64,
    pub mu: f64,
    pub s: f64,
    pub eta: f64,
    pub beta: f64,
    pub mode: SystemMode,
}

impl ModelParams {
    /// Fast-rotation scaling with `s = η = β = 1`.
    pub fn scaled(eps: f64, alpha: f64) -> Result<Self> {
        let nu = eps.powf(alpha);
        let p = Self {
            eps,
            alpha,
            nu,
            nu_b: nu,
            mu: 1.0 / eps,
            s: 1.0,
            eta: 1.0,
            beta: 1.0,
            mode: SystemMode::Scaled,
        };
        p.validate()?;
        Ok(p)
    }

    /// Independent coefficients. `eps = ∞` switches the Coriolis term off.
    pub fn generic(eps: f64, nu: f64, nu_b: f64, mu: f64) -> Result<Self> {
        let p = Self {
            eps,
            alpha: 0.0,
            nu,
            nu_b,
            mu,
            s: 1.0,
            eta: 1.0,
            beta: 1.0,
            mode: SystemMode::Generic,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_regularity(mut self, s: f64, eta: f64, beta: f64) -> Result<Self> {
        self.s = s;
        self.eta = eta;
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Parameter(m));
        if !(self.eps > 0.0) {
            return bad(format!("eps = {} must be positive", self.eps));
        }
        if !(self.alpha >= 0.0) {
            return bad(format!("alpha = {} must be non-negative", self.alpha));
        }
        if !(self.nu >= 0.0 && self.nu_b >= 0.0 && self.nu.is_finite() && self.nu_b.is_finite()) {
            return bad("viscosities must be finite and non-negative".into());
        }
        if !self.mu.is_finite() {
            return bad(format!("mu = {} must be finite", self.mu));
        }
        if !(self.beta >= 1.0) {
            return bad(format!("beta = {} must be at least 1", self.beta));
        }
        if !(self.s > 0.5) {
            return bad(format!("s = {} must exceed 1/2", self.s));
        }
        if !(self.eta > 0.0) {
            return bad(format!("eta = {} must be positive", self.eta));
        }
        if self.mode == SystemMode::Scaled {
            if !self.eps.is_finite() {
                return bad("scaled mode needs finite eps".into());
            }
            let nu = self.eps.powf(self.alpha);
            if self.nu != nu || self.nu_b != nu || self.mu != 1.0 / self.eps {
                return bad("scaled mode requires nu = nu' = eps^alpha and mu = 1/eps".into());
            }
        }
        Ok(())
    }

    pub fn is_scaled(&self) -> bool {
        self.mode == SystemMode::Scaled
    }

    /// `1/ε`, zero when rotation is switched off.
    pub fn inv_eps(&self) -> f64 {
        if self.eps.is_finite() {
            1.0 / self.eps
        } else {
            0.0
        }
    }
}
