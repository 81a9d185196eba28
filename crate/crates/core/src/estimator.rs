//! Reconstruction error estimated from events only.
//!
//! The reconstruction is re-sampled with the same LIF sampler and its events
//! are compared with the original events in the event-space discrepancy.
//! Because the LIF map preserves the discrepancy up to an additive `8 theta`
//! in both directions, the event-space value tracks the (unobservable)
//! signal-space discrepancy, so truncation can be tuned without the original
//! signal.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrepancy::{
    event_discrepancy_bruteforce, event_discrepancy_common_anchor, signal_discrepancy_grid,
};
use crate::error::{param, Error, Result};
use crate::reconstruction::{estimate_coefficients, CoefficientSeries, Reconstruction, WindowSpec};
use crate::sampler::{lif_sample, EventSequence, SamplerConfig};
use crate::signal::{max_norm_distance, SampledGrid, Signal};

/// Additive constant of the quasi-isometry, in units of theta.
pub const QUASI_ISOMETRY_FACTOR: f64 = 8.0;
/// Basin membership: `d <= BASIN_RATIO * min`.
pub const BASIN_RATIO: f64 = 1.1;

/// Reconstruction error measured three ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTriple {
    /// Event-space discrepancy between original and re-sampled events.
    pub d_sample: f64,
    /// Grid discrepancy between signal and reconstruction.
    pub d_signal: f64,
    /// Max-norm between signal and reconstruction on the grid.
    pub max_norm: f64,
}

/// Parameters of one truncation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub sampler: SamplerConfig,
    pub window: WindowSpec,
    /// Interval on which every error is measured.
    pub eval_window: (f64, f64),
    /// Time of the coefficient with index `n = 0`.
    pub origin: f64,
    /// Spacing of the grid used for `d_signal` and the max-norm.
    pub grid_step: f64,
    /// Inclusive range of truncation indices.
    pub r_range: (usize, usize),
}

impl SweepConfig {
    /// Standard geometry: sample over `horizon`, discard `burn_in` at the
    /// start, and center the coefficient grid on the remaining window.
    pub fn centered(
        sampler: SamplerConfig,
        window: WindowSpec,
        burn_in: f64,
        r_range: (usize, usize),
    ) -> Result<Self> {
        let (start, end) = sampler.horizon;
        let eval_window = (start + burn_in, end);
        let cfg = Self {
            sampler,
            window,
            eval_window,
            origin: 0.5 * (eval_window.0 + eval_window.1),
            grid_step: default_grid_step(window.omega),
            r_range,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler.validate()?;
        self.window.validate()?;
        if self.sampler.alpha != self.window.alpha {
            return param("sampler and window disagree on alpha");
        }
        let (lo, hi) = self.eval_window;
        let (start, end) = self.sampler.horizon;
        if !(lo < hi && lo >= start && hi <= end) {
            return param(format!("evaluation window [{lo}, {hi}] must be a non-empty part of the horizon [{start}, {end}]"));
        }
        if !(self.grid_step > 0.0 && self.grid_step < hi - lo) {
            return param(format!(
                "grid step {} does not fit the evaluation window",
                self.grid_step
            ));
        }
        if self.r_range.0 > self.r_range.1 {
            return param(format!("empty truncation range {:?}", self.r_range));
        }
        Ok(())
    }
}

/// Default evaluation grid spacing, `1 / (128 omega)`.
pub fn default_grid_step(omega: f64) -> f64 {
    1.0 / (128.0 * omega)
}

/// Default burn-in `5 / alpha` (zero without leak).
pub fn default_burn_in(alpha: f64) -> f64 {
    if alpha > 0.0 {
        5.0 / alpha
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub r: usize,
    pub errors: ErrorTriple,
    /// Per-sequence-anchor event discrepancy, for diagnostics.
    pub d_sample_per_sequence: f64,
    pub events_resampled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub entries: Vec<SweepEntry>,
    pub config: SweepConfig,
    pub events_original: usize,
}

impl SweepResult {
    pub fn d_sample(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.errors.d_sample).collect()
    }

    pub fn d_signal(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.errors.d_signal).collect()
    }

    pub fn max_norm(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.errors.max_norm).collect()
    }

    pub fn r_values(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.r).collect()
    }
}

fn check_matching(eta: &EventSequence, cfg: &SamplerConfig) -> Result<()> {
    if eta.theta != cfg.theta || eta.alpha != cfg.alpha {
        return param(format!(
            "events were sampled with (theta={}, alpha={}) but the sampler uses (theta={}, alpha={})",
            eta.theta, eta.alpha, cfg.theta, cfg.alpha
        ));
    }
    Ok(())
}

/// Re-samples `f_recon` and compares with `eta_a` over all events.
pub fn resample_error(
    eta_a: &EventSequence,
    f_recon: &impl Signal,
    cfg: &SamplerConfig,
) -> Result<(EventSequence, f64)> {
    check_matching(eta_a, cfg)?;
    let eta_b = lif_sample(f_recon, cfg)?;
    let d = event_discrepancy_common_anchor(eta_a, &eta_b)?.value;
    Ok((eta_b, d))
}

/// Assembles the three error measures.
///
/// `eta_a` and `eta_b` are compared as given; restrict them beforehand to
/// the window the grids cover.
pub fn error_triple(
    f: &SampledGrid,
    f_recon: &SampledGrid,
    eta_a: &EventSequence,
    eta_b: &EventSequence,
    alpha: f64,
) -> Result<ErrorTriple> {
    if eta_a.alpha != alpha || eta_b.alpha != alpha {
        return param("event sequences must be sampled with the requested alpha");
    }
    Ok(ErrorTriple {
        d_sample: event_discrepancy_common_anchor(eta_a, eta_b)?.value,
        d_signal: signal_discrepancy_grid(f, f_recon, alpha)?.value,
        max_norm: max_norm_distance(f, f_recon)?,
    })
}

/// Everything a sweep shares across truncation indices.
struct SweepContext<'a> {
    cfg: &'a SweepConfig,
    coeffs: CoefficientSeries,
    eta_window: EventSequence,
    truth: SampledGrid,
}

impl SweepContext<'_> {
    fn entry(&self, r: usize) -> Result<SweepEntry> {
        let cfg = self.cfg;
        let coeffs = self.coeffs.truncated(r)?;
        let recon = Reconstruction::new(&coeffs, &cfg.window)?;
        let recon_grid =
            SampledGrid::sample(&recon, self.truth.t0, self.truth.h, self.truth.len())?;
        let (lo, hi) = cfg.eval_window;
        let eta_b = lif_sample(&recon, &cfg.sampler)?.restricted(lo, hi);
        let errors = error_triple(
            &self.truth,
            &recon_grid,
            &self.eta_window,
            &eta_b,
            cfg.sampler.alpha,
        )?;
        let per_sequence = event_discrepancy_bruteforce(&self.eta_window, &eta_b)?.value;
        Ok(SweepEntry {
            r,
            errors,
            d_sample_per_sequence: per_sequence,
            events_resampled: eta_b.len(),
        })
    }
}

/// Runs the full pipeline once per truncation index.
///
/// Coefficients are estimated once at the largest `r`; each entry truncates
/// them, synthesizes the reconstruction, re-samples it over the whole
/// horizon and measures the errors on `eval_window`. Entries run on up to
/// `jobs` threads (`None` uses the global pool) and are returned in order of `r`.
pub fn sweep_truncation(
    f: &impl Signal,
    cfg: &SweepConfig,
    jobs: Option<usize>,
) -> Result<SweepResult> {
    cfg.validate()?;
    let eta_a = lif_sample(f, &cfg.sampler)?;
    let coeffs = estimate_coefficients(
        &eta_a,
        &cfg.window,
        cfg.origin,
        cfg.r_range.1,
        Some(cfg.sampler.horizon.1),
    )?;
    let (lo, hi) = cfg.eval_window;
    let truth = SampledGrid::covering(f, lo, hi, cfg.grid_step)?;
    let ctx = SweepContext {
        cfg,
        coeffs,
        eta_window: eta_a.restricted(lo, hi),
        truth,
    };

    let indices: Vec<usize> = (cfg.r_range.0..=cfg.r_range.1).collect();
    let run = || -> Result<Vec<SweepEntry>> { indices.par_iter().map(|&r| ctx.entry(r)).collect() };
    let entries = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    Ok(SweepResult {
        entries,
        config: *cfg,
        events_original: ctx.eta_window.len(),
    })
}

/// Tuning outcome from the event-space curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuning {
    pub r_star: usize,
    /// Inclusive range of indices in the basin around `r_star`.
    pub basin: (usize, usize),
}

/// Picks the truncation index minimizing `d_sample` (smallest `r` on ties)
/// and the maximal contiguous run around it with `d_sample <= 1.1 min`.
pub fn tune(sweep: &SweepResult) -> Result<Tuning> {
    tune_curve(&sweep.r_values(), &sweep.d_sample(), BASIN_RATIO)
}

/// [`tune`] on an arbitrary curve.
pub fn tune_curve(r: &[usize], values: &[f64], ratio: f64) -> Result<Tuning> {
    if r.is_empty() || r.len() != values.len() {
        return param("tuning needs a non-empty curve with one value per index");
    }
    let (best, min) =
        values.iter().enumerate().fold(
            (0, f64::INFINITY),
            |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) },
        );
    let limit = ratio * min;
    let mut lo = best;
    while lo > 0 && values[lo - 1] <= limit {
        lo -= 1;
    }
    let mut hi = best;
    while hi + 1 < values.len() && values[hi + 1] <= limit {
        hi += 1;
    }
    Ok(Tuning {
        r_star: r[best],
        basin: (r[lo], r[hi]),
    })
}

/// Outcome of checking both quasi-isometry inequalities on one pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiAuditReport {
    pub d_f: f64,
    pub d_e: f64,
    /// Per-sequence-anchor event discrepancy, for diagnostics.
    pub d_e_per_sequence: f64,
    /// Additive constant `8 theta`.
    pub bound: f64,
    /// Numerical allowance added to both inequalities.
    pub tol: f64,
    /// `d_E + 8 theta - d_F`; negative means the upper inequality fails.
    pub slack_upper: f64,
    /// `d_F + 8 theta - d_E`; negative means the lower inequality fails.
    pub slack_lower: f64,
    pub violation: bool,
    pub events_f: usize,
    pub events_g: usize,
}

impl QuasiAuditReport {
    pub fn from_values(d_f: f64, d_e: f64, theta: f64, tol: f64) -> Self {
        let bound = QUASI_ISOMETRY_FACTOR * theta;
        let slack_upper = d_e + bound - d_f;
        let slack_lower = d_f + bound - d_e;
        Self {
            d_f,
            d_e,
            d_e_per_sequence: d_e,
            bound,
            tol,
            slack_upper,
            slack_lower,
            violation: slack_upper + tol < 0.0 || slack_lower + tol < 0.0,
            events_f: 0,
            events_g: 0,
        }
    }
}

/// Samples both signals over `cfg.horizon` and checks
/// `d_F <= d_E + 8 theta + tol` and `d_E <= d_F + 8 theta + tol`, with `d_F`
/// on a grid of spacing `grid_step` covering the horizon.
pub fn quasi_isometry_audit(
    f: &impl Signal,
    g: &impl Signal,
    cfg: &SamplerConfig,
    grid_step: f64,
    tol: f64,
) -> Result<QuasiAuditReport> {
    cfg.validate()?;
    if !(tol >= 0.0) {
        return param("audit tolerance must be non-negative");
    }
    let eta_f = lif_sample(f, cfg)?;
    let eta_g = lif_sample(g, cfg)?;
    let (start, end) = cfg.horizon;
    let fa = SampledGrid::covering(f, start, end, grid_step)?;
    let fb = SampledGrid::covering(g, start, end, grid_step)?;
    let d_f = signal_discrepancy_grid(&fa, &fb, cfg.alpha)?.value;
    let d_e = event_discrepancy_common_anchor(&eta_f, &eta_g)?.value;
    let mut report = QuasiAuditReport::from_values(d_f, d_e, cfg.theta, tol);
    report.d_e_per_sequence = event_discrepancy_bruteforce(&eta_f, &eta_g)?.value;
    report.events_f = eta_f.len();
    report.events_g = eta_g.len();
    Ok(report)
}
