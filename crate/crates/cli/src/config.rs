//! Run configuration: one JSON document, overridden field by field from the
//! command line, then re-validated against the library's own checks.

use std::path::PathBuf;

use lifrecon::estimator::{default_grid_step, SweepConfig};
use lifrecon::reconstruction::{default_stop, WindowSpec};
use lifrecon::sampler::{default_step, SamplerConfig, DEFAULT_CROSSING_TOL};
use lifrecon::signal::{generate_random_bandlimited, BandlimitedSignal};
use lifrecon::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub signal: SignalParams,
    #[serde(default)]
    pub sampler: SamplerParams,
    #[serde(default)]
    pub window: WindowParams,
    #[serde(default)]
    pub sweep: SweepParams,
    #[serde(default)]
    pub audit: AuditParams,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

/// Random sinc-sum generator settings. `omega` has no default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalParams {
    pub omega: f64,
    #[serde(default = "default_n_atoms")]
    pub n_atoms: usize,
    #[serde(default = "default_amplitude")]
    pub amplitude: (f64, f64),
    /// Interval holding the atom centers.
    #[serde(default = "default_atom_window")]
    pub window: (f64, f64),
}

/// `step = None` picks the library default for the bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerParams {
    pub theta: f64,
    pub alpha: f64,
    pub horizon: (f64, f64),
    pub step: Option<f64>,
    pub crossing_tol: f64,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            theta: 0.01,
            alpha: 0.1,
            horizon: (0.0, 88.0),
            step: None,
            crossing_tol: DEFAULT_CROSSING_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindowParams {
    #[serde(rename = "T")]
    pub period: f64,
    pub omega_stop: Option<f64>,
}

impl Default for WindowParams {
    fn default() -> Self {
        Self {
            period: 0.4,
            omega_stop: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepParams {
    pub r_min: usize,
    pub r_max: usize,
    /// Length of the sampled prefix excluded from every error measure.
    pub burn_in: f64,
    pub grid_step: Option<f64>,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            r_min: 30,
            r_max: 54,
            burn_in: 50.0,
            grid_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AuditParams {
    /// Pairs per leak rate.
    pub pairs: usize,
    pub alphas: Vec<f64>,
    pub tol: f64,
    pub grid_step: Option<f64>,
    /// Compare every signal with itself instead of with an independent draw.
    pub identical: bool,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self {
            pairs: 7,
            alphas: vec![0.0, 0.1, 1.0],
            tol: 1e-4,
            grid_step: None,
            identical: false,
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_n_atoms() -> usize {
    42
}

fn default_amplitude() -> (f64, f64) {
    (-1.0, 1.0)
}

fn default_atom_window() -> (f64, f64) {
    (0.0, 128.0)
}

fn invalid(msg: String) -> Error {
    Error::Parameter(msg)
}

impl RunConfig {
    /// Runs every check the library would run when the config is used.
    pub fn validate(&self) -> Result<()> {
        let s = &self.signal;
        if !(s.omega.is_finite() && s.omega > 0.0) {
            return Err(invalid(format!(
                "signal.omega must be positive, got {}",
                s.omega
            )));
        }
        self.sampler_config()?;
        self.window_spec()?;
        self.sweep_config()?;
        let a = &self.audit;
        if a.alphas.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid(
                "audit.alphas must be finite and non-negative".into(),
            ));
        }
        if !(a.tol.is_finite() && a.tol >= 0.0) {
            return Err(invalid(format!(
                "audit.tol must be non-negative, got {}",
                a.tol
            )));
        }
        if let Some(h) = a.grid_step {
            if !(h.is_finite() && h > 0.0) {
                return Err(invalid(format!(
                    "audit.grid_step must be positive, got {h}"
                )));
            }
        }
        generate_random_bandlimited(s.omega, s.n_atoms, s.amplitude, s.window, self.seed)
            .map(|_| ())
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        self.sampler_config_with_alpha(self.sampler.alpha)
    }

    pub fn sampler_config_with_alpha(&self, alpha: f64) -> Result<SamplerConfig> {
        let p = &self.sampler;
        let cfg = SamplerConfig {
            theta: p.theta,
            alpha,
            step: p
                .step
                .unwrap_or_else(|| default_step(self.signal.omega, alpha)),
            crossing_tol: p.crossing_tol,
            horizon: p.horizon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn window_spec(&self) -> Result<WindowSpec> {
        let w = &self.window;
        let stop = w
            .omega_stop
            .unwrap_or_else(|| default_stop(self.signal.omega, w.period));
        WindowSpec::with_stop(self.signal.omega, stop, w.period, self.sampler.alpha)
    }

    pub fn sweep_config(&self) -> Result<SweepConfig> {
        let s = &self.sweep;
        let mut cfg = SweepConfig::centered(
            self.sampler_config()?,
            self.window_spec()?,
            s.burn_in,
            (s.r_min, s.r_max),
        )?;
        cfg.grid_step = s
            .grid_step
            .unwrap_or_else(|| default_grid_step(self.signal.omega));
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn audit_grid_step(&self) -> f64 {
        self.audit
            .grid_step
            .unwrap_or_else(|| default_grid_step(self.signal.omega))
    }

    /// The signal drawn with `seed`.
    pub fn signal_for_seed(&self, seed: u64) -> Result<BandlimitedSignal> {
        let s = &self.signal;
        generate_random_bandlimited(s.omega, s.n_atoms, s.amplitude, s.window, seed)
    }
}
