use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;

/// Coefficients of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Growth rate κ.
    pub kappa: f64,
    /// Quadratic decay μ > 0.
    pub mu: f64,
    /// Regularization strength ε ≥ 0 (ε = 0 is the limit model).
    pub eps: f64,
    /// Regularization exponent θ; must exceed `dim + 2` when ε > 0.
    pub theta: f64,
}

impl ModelParams {
    pub fn new(kappa: f64, mu: f64, eps: f64, theta: f64, dim: usize) -> Result<Self> {
        let p = ModelParams {
            kappa,
            mu,
            eps,
            theta,
        };
        p.validate(dim)?;
        Ok(p)
    }

    /// θ = dim + 3.
    pub fn default_theta(dim: usize) -> f64 {
        dim as f64 + 3.0
    }

    /// Limit model (ε = 0) with the default θ.
    pub fn limit(kappa: f64, mu: f64, dim: usize) -> Result<Self> {
        Self::new(kappa, mu, 0.0, Self::default_theta(dim), dim)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !self.kappa.is_finite() {
            return Err(Error::InvalidParams(format!("kappa = {}", self.kappa)));
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParams(format!("mu = {} must be positive", self.mu)));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::InvalidParams(format!("eps = {} must be >= 0", self.eps)));
        }
        if self.eps > 0.0 && !(self.theta > dim as f64 + 2.0) {
            return Err(Error::InvalidParams(format!(
                "theta = {} must exceed dim + 2 = {} when eps > 0",
                self.theta,
                dim + 2
            )));
        }
        Ok(())
    }

    /// κ₊ = max{κ, 0}.
    pub fn kappa_plus(&self) -> f64 {
        self.kappa.max(0.0)
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }
}

/// Time-stepping controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// Upper bound on the step; the step actually taken is also capped by
    /// the suggested stable step.
    pub dt: f64,
    /// Fraction of the stability bound used by the dt suggestion, in (0, 1].
    pub safety: f64,
    /// Relative residual accepted from the implicit solves.
    pub solver_tol: f64,
    /// Runs with `max u` above this value are reported as escaped.
    pub blowup_ceiling: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            dt: 1e-2,
            safety: 0.5,
            solver_tol: 1e-10,
            blowup_ceiling: 1e6,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParams(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::InvalidParams(format!("safety = {} not in (0, 1]", self.safety)));
        }
        if !(self.solver_tol > 0.0) {
            return Err(Error::InvalidParams("solver_tol must be positive".into()));
        }
        Ok(())
    }
}

/// Solution snapshot `(u, v)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub t: f64,
    pub params: ModelParams,
}

impl State {
    pub fn new(u: Field, v: Field, t: f64, params: ModelParams) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::InvalidArgument("u and v live on different grids".into()));
        }
        params.validate(u.grid().dim())?;
        Ok(State { u, v, t, params })
    }

    /// `min u / max(1, max u)`, negative when u undershoots zero.
    pub fn undershoot(&self) -> f64 {
        let ru = self.u.min() / self.u.max().max(1.0);
        let rv = self.v.min() / self.v.max().max(1.0);
        ru.min(rv)
    }
}

/// Tolerated relative undershoot below zero.
pub const NONNEGATIVITY_TOL: f64 = 1e-12;
