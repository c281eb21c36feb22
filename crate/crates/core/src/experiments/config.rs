use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::solver::{make_initial_data, ModelParams, Profile, State, Stepper, StepperConfig};

/// Flat run configuration shared by every subcommand.
///
/// Experiment-specific keys are ignored by experiments that do not use them.
/// Unknown keys are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Spatial dimension, 1 to 3.
    pub dim: usize,
    /// Side length of the box.
    pub extent: f64,
    /// Cells per axis.
    pub cells: usize,

    pub kappa: f64,
    pub mu: f64,
    pub eps: f64,
    /// Regularization exponent; `0` selects `dim + 3`.
    pub theta: f64,

    /// Step cap.
    pub dt: f64,
    pub safety: f64,
    pub solver_tol: f64,
    pub blowup_ceiling: f64,

    pub t_end: f64,
    /// Record spacing.
    pub cadence: f64,
    /// Keep a snapshot every this many records (`0`: none).
    pub snapshot_every: usize,

    /// Initial profiles, see [`Profile`].
    pub u0: String,
    pub v0: String,
    pub seed: u64,
    pub out_dir: PathBuf,

    /// Relative tolerance of the a-priori bound checks.
    pub rel_tol: f64,

    /// Decay thresholds on `sup u + sup v`.
    pub ladder: Vec<f64>,
    /// Extra κ values for the decay sweep (empty: just `kappa`).
    pub kappa_sweep: Vec<f64>,
    /// Oracle agreement tolerance for crossing times.
    pub crossing_tol: f64,

    /// κ ladder as fractions of κ₀.
    pub kappa_fractions: Vec<f64>,
    /// Fraction of κ₀ used by the smallness-time run.
    pub kappa_fraction: f64,
    pub ensemble: usize,
    /// Allowed relative spread of R(κ) across the ensemble.
    pub spread_tol: f64,
    /// Relative tolerance of the barrier and the ODI ledger.
    pub ledger_tol: f64,
    /// Random fields used by the constant fits.
    pub fit_samples: usize,

    /// Largest `j` of `ε_j = 2^{−j}`.
    pub j_max: usize,
    /// Required bound on the last distance `d_{j_max−1}`.
    pub eps_tol: f64,

    /// Exponent `p ∈ (3, 4)` of the bootstrap.
    pub p_exp: f64,
    /// Bootstrap constants; `0` derives them from a smoothing fit.
    pub c3: f64,
    pub c4: f64,
    /// Smallest `k` and largest `k` of the ladder `δ = 10^{−k}`.
    pub k_min: u32,
    pub k_max: u32,

    /// Exponents of the smoothing fits.
    pub q_values: Vec<f64>,
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let st = StepperConfig::default();
        RunConfig {
            dim: 1,
            extent: 10.0,
            cells: 256,
            kappa: 0.1,
            mu: 1.0,
            eps: 0.0,
            theta: 0.0,
            dt: st.dt,
            safety: st.safety,
            solver_tol: st.solver_tol,
            blowup_ceiling: st.blowup_ceiling,
            t_end: 10.0,
            cadence: 0.1,
            snapshot_every: 0,
            u0: "cos:1,0.5".into(),
            v0: "const:0.5".into(),
            seed: 1,
            out_dir: PathBuf::from("out"),
            rel_tol: crate::functionals::DEFAULT_REL_TOL,
            ladder: vec![0.5, 0.1, 0.02],
            kappa_sweep: Vec::new(),
            crossing_tol: 0.1,
            kappa_fractions: vec![0.125, 0.25, 0.5],
            kappa_fraction: 0.5,
            ensemble: 3,
            spread_tol: 0.2,
            ledger_tol: crate::odi::LEDGER_REL_TOL,
            fit_samples: 64,
            j_max: 7,
            eps_tol: 1e-2,
            p_exp: 3.5,
            c3: 0.0,
            c4: 0.0,
            k_min: 1,
            k_max: 8,
            q_values: vec![2.0, 4.0],
            trials: 12,
        }
    }
}

impl RunConfig {
    /// Every accepted key, in declaration order.
    pub fn keys() -> Vec<String> {
        match toml::Value::try_from(RunConfig::default()) {
            Ok(toml::Value::Table(t)) => t.keys().cloned().collect(),
            _ => unreachable!("config serializes to a table"),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Apply `key=value` overrides. Values are read as TOML literals and
    /// fall back to plain strings.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        let mut table = match toml::Value::try_from(self) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("config serializes to a table"),
        };
        for o in overrides {
            let o = o.as_ref();
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override '{o}' is not key=value")))?;
            let key = key.trim().trim_start_matches("--").replace('-', "_");
            if !table.contains_key(&key) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
            let value = parse_literal(raw.trim());
            table.insert(key, value);
        }
        let cfg: RunConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim = {} not in 1..=3", self.dim));
        }
        if !(self.extent > 0.0) || self.cells < 2 {
            return bad(format!("extent = {}, cells = {}", self.extent, self.cells));
        }
        if !(self.t_end > 0.0) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.cadence > 0.0 && self.cadence <= self.t_end) {
            return bad(format!("cadence = {} must lie in (0, t_end]", self.cadence));
        }
        self.u0.parse::<Profile>()?;
        self.v0.parse::<Profile>()?;
        self.params()?;
        self.stepper_config().validate()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::cube(self.dim, self.extent, self.cells)
    }

    pub fn theta(&self) -> f64 {
        if self.theta > 0.0 {
            self.theta
        } else {
            ModelParams::default_theta(self.dim)
        }
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.kappa, self.mu, self.eps, self.theta(), self.dim)
    }

    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            safety: self.safety,
            solver_tol: self.solver_tol,
            blowup_ceiling: self.blowup_ceiling,
        }
    }

    pub fn stepper(&self) -> Result<Stepper> {
        Stepper::new(&self.grid()?, self.stepper_config())
    }

    /// Prepared initial state.
    pub fn initial_state(&self) -> Result<State> {
        let g = self.grid()?;
        let (u, v) = make_initial_data(&g, &self.u0.parse()?, &self.v0.parse()?, self.eps)?;
        State::new(u, v, 0.0, self.params()?)
    }

    /// Initial state with explicitly given fields.
    pub fn state_from(&self, u: Field, v: Field) -> Result<State> {
        State::new(u, v, 0.0, self.params()?)
    }
}

fn parse_literal(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match toml::from_str::<toml::Table>(&doc) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => {
            // bare comma lists are accepted for array keys
            if raw.contains(',') {
                let items: Option<Vec<toml::Value>> = raw
                    .split(',')
                    .map(|s| s.trim().parse::<f64>().ok().map(toml::Value::Float))
                    .collect();
                if let Some(items) = items {
                    return toml::Value::Array(items);
                }
            }
            toml::Value::String(raw.into())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let c = RunConfig::default();
        c.validate().unwrap();
        let back = RunConfig::from_toml_str(&c.to_toml_string()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_toml_str("kapa = 1.0").unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
        let err = RunConfig::default().with_overrides(&["--kapa=1"]).unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
    }

    #[test]
    fn overrides() {
        let c = RunConfig::default()
            .with_overrides(&["--kappa=-1", "--u0=const:1", "--ladder=0.3,0.03", "--cells=64", "t_end=2"])
            .unwrap();
        assert_eq!(c.kappa, -1.0);
        assert_eq!(c.u0, "const:1");
        assert_eq!(c.ladder, vec![0.3, 0.03]);
        assert_eq!(c.cells, 64);
        assert_eq!(c.t_end, 2.0);
        assert!(RunConfig::default().with_overrides(&["--cells=abc"]).is_err());
        assert!(RunConfig::default().with_overrides(&["--mu=-1"]).is_err());
    }

    #[test]
    fn integer_literal_for_float_key() {
        let c = RunConfig::default().with_overrides(&["--mu=2"]).unwrap();
        assert_eq!(c.mu, 2.0);
    }

    #[test]
    fn theta_default() {
        let c = RunConfig {
            dim: 2,
            ..Default::default()
        };
        assert_eq!(c.theta(), 5.0);
    }
}
