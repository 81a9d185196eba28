//! Approximate reconstruction from LIF events.
//!
//! The faded integral `F(t) = int_{-inf}^t f(s) exp(alpha (s - t)) ds` solves
//! `F' = f - alpha F`, so `f = F' + alpha F`. Sampling the bandlimited `F` on
//! the oversampled grid `t_n = origin + n T` and synthesizing with the window
//! `phi = psi' + alpha psi` gives `f(t) = T sum_n F(t_n) phi(t - t_n)`. The
//! grid values `F(t_n)` are estimated from the events alone; the finite sum
//! over `|n| <= r` is the truncated reconstruction.
//!
//! `psi` has a trapezoidal spectrum: one on `[-omega, omega]`, linear
//! roll-off to zero at `omega_stop`. Its inverse transform is the product of
//! two sinc functions, which keeps `psi` and `psi'` in closed form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::sampler::EventSequence;
use crate::signal::{sinc, SampledGrid, Signal};

/// Synthesis window parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Passband edge.
    pub omega: f64,
    /// Stopband edge.
    pub omega_stop: f64,
    /// Grid period `T`.
    #[serde(rename = "T")]
    pub period: f64,
    pub alpha: f64,
}

impl WindowSpec {
    /// Window with the default stopband `min(1/T - omega, 2 omega)`.
    pub fn new(omega: f64, period: f64, alpha: f64) -> Result<Self> {
        Self::with_stop(omega, default_stop(omega, period), period, alpha)
    }

    pub fn with_stop(omega: f64, omega_stop: f64, period: f64, alpha: f64) -> Result<Self> {
        let spec = Self {
            omega,
            omega_stop,
            period,
            alpha,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let Self {
            omega,
            omega_stop,
            period,
            alpha,
        } = *self;
        if !(omega.is_finite() && omega > 0.0) {
            return param(format!("omega must be positive, got {omega}"));
        }
        if !(period > 0.0 && period < 1.0 / (2.0 * omega)) {
            return param(format!(
                "T must lie in (0, 1/(2 omega)) = (0, {}), got {period}",
                0.5 / omega
            ));
        }
        if !(omega_stop > omega && omega_stop <= 1.0 / period - omega + 1e-12) {
            return param(format!(
                "omega_stop must lie in (omega, 1/T - omega] = ({omega}, {}], got {omega_stop}",
                1.0 / period - omega
            ));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return param(format!(
                "alpha must be finite and non-negative, got {alpha}"
            ));
        }
        Ok(())
    }

    fn widths(&self) -> (f64, f64) {
        (self.omega_stop + self.omega, self.omega_stop - self.omega)
    }

    /// The trapezoidal spectrum `psi_hat(nu)`.
    pub fn psi_hat(&self, nu: f64) -> f64 {
        let a = nu.abs();
        if a <= self.omega {
            1.0
        } else if a >= self.omega_stop {
            0.0
        } else {
            (self.omega_stop - a) / (self.omega_stop - self.omega)
        }
    }

    /// Upper bound on `sup |phi|` from `int |phi_hat|`.
    pub fn phi_bound(&self) -> f64 {
        let (sum, diff) = self.widths();
        let first_moment =
            self.omega * self.omega + diff * (self.omega_stop + 2.0 * self.omega) / 3.0;
        2.0 * PI * first_moment + self.alpha * sum
    }
}

pub fn default_stop(omega: f64, period: f64) -> f64 {
    (1.0 / period - omega).min(2.0 * omega)
}

/// Derivative of the normalized sinc.
fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // sum_{k>=1} (-1)^k 2k pi^{2k} x^{2k-1} / (2k+1)!
        let px2 = (PI * x) * (PI * x);
        let mut term = -PI * PI * x / 3.0;
        let mut sum = term;
        for k in 2..=8 {
            let kf = k as f64;
            term *= -px2 * kf / ((kf - 1.0) * (2.0 * kf) * (2.0 * kf + 1.0));
            sum += term;
        }
        sum
    } else {
        let px = PI * x;
        (px.cos() - px.sin() / px) / x
    }
}

/// Window `psi(t) = (os + o) sinc((os + o) t) sinc((os - o) t)`.
pub fn psi(t: f64, spec: &WindowSpec) -> f64 {
    let (sum, diff) = spec.widths();
    sum * sinc(sum * t) * sinc(diff * t)
}

pub fn psi_prime(t: f64, spec: &WindowSpec) -> f64 {
    let (sum, diff) = spec.widths();
    sum * (sum * sinc_prime(sum * t) * sinc(diff * t) + diff * sinc(sum * t) * sinc_prime(diff * t))
}

/// Synthesis kernel `phi = psi' + alpha psi`, the inverse transform of
/// `(2 pi i nu + alpha) psi_hat(nu)`.
pub fn phi(t: f64, spec: &WindowSpec) -> f64 {
    psi_prime(t, spec) + spec.alpha * psi(t, spec)
}

/// Provenance of one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientFlag {
    /// Grid point inside the sampled interval.
    Observed,
    /// Grid point before the sampling start; the coefficient is zero.
    BeforeStart,
    /// Grid point after the end of the data; decay-only extrapolation.
    Extrapolated,
}

/// Estimated faded-integral values on the grid `origin + n T`, `|n| <= r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub origin: f64,
    pub period: f64,
    pub r: usize,
    /// `values[i]` belongs to index `n = i - r`.
    pub values: Vec<f64>,
    pub flags: Vec<CoefficientFlag>,
}

impl CoefficientSeries {
    pub fn time(&self, n: i64) -> f64 {
        self.origin + n as f64 * self.period
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        let r = self.r as i64;
        -r..=r
    }

    pub fn get(&self, n: i64) -> Option<f64> {
        let i = n + self.r as i64;
        (i >= 0)
            .then(|| self.values.get(i as usize).copied())
            .flatten()
    }

    /// The same series restricted to `|n| <= r`.
    pub fn truncated(&self, r: usize) -> Result<CoefficientSeries> {
        if r > self.r {
            return param(format!("cannot truncate r = {} series to r = {r}", self.r));
        }
        let skip = self.r - r;
        let keep = 2 * r + 1;
        Ok(CoefficientSeries {
            origin: self.origin,
            period: self.period,
            r,
            values: self.values[skip..skip + keep].to_vec(),
            flags: self.flags[skip..skip + keep].to_vec(),
        })
    }

    /// `sum_{|n| > r} |a_n|` over the coefficients this series holds.
    pub fn tail_sum(&self, r: usize) -> f64 {
        self.indices()
            .zip(&self.values)
            .filter(|(n, _)| n.unsigned_abs() as usize > r)
            .map(|(_, a)| a.abs())
            .sum()
    }
}

/// Estimates `F(origin + n T)` for `|n| <= r` from the events.
///
/// Tracks `z_0 = 0` at `t0` and `z_{k+1} = exp(-alpha (t_{k+1} - t_k)) z_k + v_{k+1}`;
/// a grid point in `[t_k, t_{k+1})` receives `exp(-alpha (t_n - t_k)) z_k`.
/// Grid points past `data_end` are flagged as extrapolated.
pub fn estimate_coefficients(
    eta: &EventSequence,
    spec: &WindowSpec,
    origin: f64,
    r: usize,
    data_end: Option<f64>,
) -> Result<CoefficientSeries> {
    if eta.alpha != spec.alpha {
        return param(format!(
            "event alpha {} does not match window alpha {}",
            eta.alpha, spec.alpha
        ));
    }
    spec.validate()?;
    let alpha = spec.alpha;
    let mut values = Vec::with_capacity(2 * r + 1);
    let mut flags = Vec::with_capacity(2 * r + 1);

    let mut next = 0;
    let mut anchor = eta.t0;
    let mut z = 0.0;
    for i in 0..=2 * r {
        let t = origin + (i as f64 - r as f64) * spec.period;
        if t < eta.t0 {
            values.push(0.0);
            flags.push(CoefficientFlag::BeforeStart);
            continue;
        }
        while let Some(e) = eta.events.get(next) {
            if e.t > t {
                break;
            }
            z = (-alpha * (e.t - anchor)).exp() * z + e.v;
            anchor = e.t;
            next += 1;
        }
        values.push((-alpha * (t - anchor)).exp() * z);
        flags.push(match data_end {
            Some(end) if t > end => CoefficientFlag::Extrapolated,
            _ => CoefficientFlag::Observed,
        });
    }
    Ok(CoefficientSeries {
        origin,
        period: spec.period,
        r,
        values,
        flags,
    })
}

/// Closed-form truncated reconstruction `T sum_{|n|<=r} a_n phi(t - t_n)`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    spec: WindowSpec,
    /// Time of the first stored term; term `k` sits at `start + k T`.
    start: f64,
    /// `T a_n` with leading and trailing zeros removed.
    weights: Vec<f64>,
}

/// Terms between exact re-evaluations of the rotated angles.
const RESYNC_EVERY: usize = 16;

impl Reconstruction {
    pub fn new(coeffs: &CoefficientSeries, spec: &WindowSpec) -> Result<Self> {
        spec.validate()?;
        if coeffs.period != spec.period {
            return param(format!(
                "coefficient period {} does not match window period {}",
                coeffs.period, spec.period
            ));
        }
        let first = coeffs.values.iter().position(|a| *a != 0.0);
        let last = coeffs.values.iter().rposition(|a| *a != 0.0);
        let (start, weights) = match (first, last) {
            (Some(i), Some(j)) => (
                coeffs.time(i as i64 - coeffs.r as i64),
                coeffs.values[i..=j]
                    .iter()
                    .map(|a| spec.period * a)
                    .collect(),
            ),
            _ => (coeffs.origin, Vec::new()),
        };
        Ok(Self {
            spec: *spec,
            start,
            weights,
        })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    /// Term-by-term evaluation with the kernel evaluated directly.
    pub fn eval_direct(&self, t: f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(k, w)| w * phi(t - self.term_time(k), &self.spec))
            .sum()
    }

    fn term_time(&self, k: usize) -> f64 {
        self.start + k as f64 * self.spec.period
    }
}

impl Signal for Reconstruction {
    /// Consecutive terms differ by a shift of `T`, so the sines and cosines
    /// of both sinc factors advance by fixed rotations.
    fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.spec.widths();
        let alpha = self.spec.alpha;
        let (rot_a_sin, rot_a_cos) = (-PI * a * self.spec.period).sin_cos();
        let (rot_b_sin, rot_b_cos) = (-PI * b * self.spec.period).sin_cos();
        let (mut sa, mut ca, mut sb, mut cb) = (0.0, 0.0, 0.0, 0.0);
        let mut total = 0.0;
        for (k, &w) in self.weights.iter().enumerate() {
            let x = t - self.term_time(k);
            if k % RESYNC_EVERY == 0 {
                (sa, ca) = (PI * a * x).sin_cos();
                (sb, cb) = (PI * b * x).sin_cos();
            } else {
                (sa, ca) = (
                    sa * rot_a_cos + ca * rot_a_sin,
                    ca * rot_a_cos - sa * rot_a_sin,
                );
                (sb, cb) = (
                    sb * rot_b_cos + cb * rot_b_sin,
                    cb * rot_b_cos - sb * rot_b_sin,
                );
            }
            let (ax, bx) = (a * x, b * x);
            if w == 0.0 {
                continue;
            }
            if ax.abs() < 0.1 || bx.abs() < 0.1 {
                total += w * phi(x, &self.spec);
                continue;
            }
            let sinc_a = sa / (PI * ax);
            let sinc_b = sb / (PI * bx);
            let dsinc_a = (ca - sinc_a) / ax;
            let dsinc_b = (cb - sinc_b) / bx;
            let psi = a * sinc_a * sinc_b;
            let psi_prime = a * (a * dsinc_a * sinc_b + b * sinc_a * dsinc_b);
            total += w * (psi_prime + alpha * psi);
        }
        total
    }

    fn bandwidth(&self) -> Option<f64> {
        Some(self.spec.omega_stop)
    }
}

/// Evaluates the truncated reconstruction on `len` points `t0 + i h`.
pub fn reconstruct(
    coeffs: &CoefficientSeries,
    spec: &WindowSpec,
    t0: f64,
    h: f64,
    len: usize,
) -> Result<SampledGrid> {
    let recon = Reconstruction::new(coeffs, spec)?;
    SampledGrid::sample(&recon, t0, h, len)
}

/// Bound on how much the discrepancy can move when the terms `|n| > r` are
/// dropped: each term's faded interval measure telescopes to
/// `psi(s - t_n) - exp(alpha (q - s)) psi(q - t_n)`, so it is at most
/// `2 psi(0) T |a_n|`.
pub fn tail_discrepancy_bound(coeffs: &CoefficientSeries, spec: &WindowSpec, r: usize) -> f64 {
    2.0 * psi(0.0, spec) * spec.period * coeffs.tail_sum(r)
}

/// Pointwise bound on the dropped terms: `T sup|phi| sum_{|n|>r} |a_n|`.
pub fn tail_pointwise_bound(coeffs: &CoefficientSeries, spec: &WindowSpec, r: usize) -> f64 {
    spec.phi_bound() * spec.period * coeffs.tail_sum(r)
}
