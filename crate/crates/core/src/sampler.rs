//! Threshold-based samplers: leaky integrate-and-fire (LIF) and send-on-delta (SOD).
//!
//! The LIF state `y(t) = int_{t_k}^{t} f(s) exp(alpha (s - t)) ds` obeys
//! `y' = f - alpha y` and restarts from zero at every event `t_k`. Each
//! integration step evaluates `f` at Gauss-Legendre nodes, builds the
//! interpolating polynomial and propagates `y` exactly through the linear
//! ODE against that polynomial. Threshold contacts are bracketed on a fixed
//! scan lattice of [`SCAN_POINTS_PER_STEP`] points per step and refined by
//! bisection; the reported event time is the upper end of the final bracket,
//! so `|y| >= theta` holds there (closed trigger condition).

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::signal::Signal;

/// Interpolation/quadrature nodes per integration step.
pub const NODES_PER_STEP: usize = 8;
/// Scan points per integration step used to bracket threshold contacts.
pub const SCAN_POINTS_PER_STEP: usize = 8;
pub const DEFAULT_CROSSING_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;
/// A crossing whose state changes by less than this fraction of theta over a
/// full step is flagged as grazing.
const GRAZING_FRACTION: f64 = 1e-3;

/// A single event: time and signed threshold value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub v: f64,
}

/// Ordered output of a threshold sampler.
///
/// The sampling start `t0` carries the implicit zero event and is not stored
/// in `events`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSequence {
    pub events: Vec<Event>,
    pub theta: f64,
    pub alpha: f64,
    pub t0: f64,
}

impl EventSequence {
    pub fn new(events: Vec<Event>, theta: f64, alpha: f64, t0: f64) -> Result<Self> {
        let s = Self {
            events,
            theta,
            alpha,
            t0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn empty(theta: f64, alpha: f64, t0: f64) -> Self {
        Self {
            events: Vec::new(),
            theta,
            alpha,
            t0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return param(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return param(format!(
                "alpha must be finite and non-negative, got {}",
                self.alpha
            ));
        }
        let mut prev = f64::NEG_INFINITY;
        for (k, e) in self.events.iter().enumerate() {
            if !(e.t.is_finite() && e.t > prev) {
                return param(format!(
                    "event times must be finite and strictly increasing (index {k})"
                ));
            }
            if e.v.abs() != self.theta {
                return param(format!(
                    "event {k} has |v| = {} but theta = {}",
                    e.v.abs(),
                    self.theta
                ));
            }
            prev = e.t;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.events.iter().map(|e| e.t)
    }

    /// Events with `lo <= t <= hi`, keeping the sampler parameters.
    pub fn restricted(&self, lo: f64, hi: f64) -> Self {
        Self {
            events: self
                .events
                .iter()
                .copied()
                .filter(|e| e.t >= lo && e.t <= hi)
                .collect(),
            theta: self.theta,
            alpha: self.alpha,
            t0: self.t0,
        }
    }
}

/// Parameters shared by both samplers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub theta: f64,
    pub alpha: f64,
    /// Integration step.
    pub step: f64,
    /// Bisection stops once the bracket is narrower than this.
    pub crossing_tol: f64,
    /// Sampling interval `[start, end]`; `start` is the time origin `t0`.
    pub horizon: (f64, f64),
}

impl SamplerConfig {
    /// Config with the default step for a signal of bandwidth `omega`:
    /// `min(1/(32 omega), 0.1 / max(alpha, 1))`.
    pub fn for_bandwidth(theta: f64, alpha: f64, horizon: (f64, f64), omega: f64) -> Self {
        Self {
            theta,
            alpha,
            step: default_step(omega, alpha),
            crossing_tol: DEFAULT_CROSSING_TOL,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return param(format!("theta must be positive, got {}", self.theta));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return param(format!(
                "alpha must be finite and non-negative, got {}",
                self.alpha
            ));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return param(format!("step must be positive, got {}", self.step));
        }
        if !(self.crossing_tol.is_finite() && self.crossing_tol > 0.0) {
            return param(format!(
                "crossing_tol must be positive, got {}",
                self.crossing_tol
            ));
        }
        let (a, b) = self.horizon;
        if !(a.is_finite() && b.is_finite()) {
            return param("horizon must be finite");
        }
        if !(b > a) {
            return param(format!("horizon [{a}, {b}] has zero length"));
        }
        Ok(())
    }

    /// Checks the step against the resolution rule `step <= 1/(32 omega)`.
    pub fn check_resolution(&self, omega: f64) -> Result<()> {
        if self.step > 1.0 / (32.0 * omega) * (1.0 + 1e-12) {
            return param(format!(
                "step {} is too coarse for bandwidth {omega} (max {})",
                self.step,
                1.0 / (32.0 * omega)
            ));
        }
        Ok(())
    }
}

pub fn default_step(omega: f64, alpha: f64) -> f64 {
    (1.0 / (32.0 * omega)).min(0.1 / alpha.max(1.0))
}

/// Sampler output together with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerRun {
    pub sequence: EventSequence,
    /// Indices of events whose crossing was nearly tangential.
    pub grazing: Vec<usize>,
    pub steps: usize,
}

/// Leaky integrate-and-fire sampling of `f` on `cfg.horizon`.
pub fn lif_sample(f: &impl Signal, cfg: &SamplerConfig) -> Result<EventSequence> {
    lif_sample_detailed(f, cfg).map(|run| run.sequence)
}

/// Polynomial model of `f` over one step plus exact propagation of `y`.
struct StepModel<'a> {
    rule: &'a GaussLegendre,
    a: f64,
    b: f64,
    values: [f64; NODES_PER_STEP],
    alpha: f64,
}

impl StepModel<'_> {
    fn f(&self, s: f64) -> f64 {
        let x = (2.0 * s - self.a - self.b) / (self.b - self.a);
        self.rule.interpolate(&self.values, x)
    }

    /// State at `s` given state `y` at `t <= s`.
    fn propagate(&self, t: f64, y: f64, s: f64) -> f64 {
        if s == t {
            return y;
        }
        let alpha = self.alpha;
        let forced = self
            .rule
            .integrate(t, s, |u| self.f(u) * (alpha * (u - s)).exp());
        (-alpha * (s - t)).exp() * y + forced
    }
}

/// [`lif_sample`] with grazing diagnostics.
pub fn lif_sample_detailed(f: &impl Signal, cfg: &SamplerConfig) -> Result<SamplerRun> {
    cfg.validate()?;
    let rule = GaussLegendre::new(NODES_PER_STEP);
    let (start, end) = cfg.horizon;
    let theta = cfg.theta;
    let n_steps = ((end - start) / cfg.step).ceil().max(1.0) as usize;

    let mut events = Vec::new();
    let mut grazing = Vec::new();
    let mut t = start;
    let mut y = 0.0;

    for i in 0..n_steps {
        let a = start + i as f64 * cfg.step;
        let b = if i + 1 == n_steps { end } else { a + cfg.step };
        if b <= a {
            break;
        }
        let mut model = StepModel {
            rule: &rule,
            a,
            b,
            values: [0.0; NODES_PER_STEP],
            alpha: cfg.alpha,
        };
        for (slot, s) in model.values.iter_mut().zip(rule.mapped_nodes(a, b)) {
            let v = f.eval(s);
            if !v.is_finite() {
                return Err(Error::Evaluation { t: s, value: v });
            }
            *slot = v;
        }

        for j in 1..=SCAN_POINTS_PER_STEP {
            let s = if j == SCAN_POINTS_PER_STEP {
                b
            } else {
                a + (b - a) * j as f64 / SCAN_POINTS_PER_STEP as f64
            };
            loop {
                let ys = model.propagate(t, y, s);
                if !ys.is_finite() {
                    return Err(Error::Numerical(format!("non-finite state at t = {s}")));
                }
                if ys.abs() < theta {
                    y = ys;
                    t = s;
                    break;
                }
                let hit = bisect(t, s, cfg.crossing_tol, |u| {
                    model.propagate(t, y, u).abs() >= theta
                })?;
                let y_hit = model.propagate(t, y, hit);
                if y_hit.abs() < theta {
                    return Err(Error::Numerical(format!(
                        "crossing near t = {hit} lost during refinement"
                    )));
                }
                let slope = model.f(hit) - cfg.alpha * y_hit;
                if slope.abs() * cfg.step < GRAZING_FRACTION * theta {
                    grazing.push(events.len());
                }
                events.push(Event {
                    t: hit,
                    v: theta.copysign(y_hit),
                });
                // Restart the faded integral at the event.
                t = hit;
                y = 0.0;
                if hit >= s {
                    break;
                }
            }
        }
    }

    Ok(SamplerRun {
        sequence: EventSequence {
            events,
            theta,
            alpha: cfg.alpha,
            t0: start,
        },
        grazing,
        steps: n_steps,
    })
}

/// Send-on-delta sampling of `g`: an event fires when `|g(t) - g(t_k)|`
/// reaches `theta`. Uses the same scan lattice and refinement as
/// [`lif_sample`]; `cfg.alpha` is ignored and recorded as 0.
pub fn sod_sample(g: &impl Signal, cfg: &SamplerConfig) -> Result<EventSequence> {
    sod_sample_detailed(g, cfg).map(|run| run.sequence)
}

pub fn sod_sample_detailed(g: &impl Signal, cfg: &SamplerConfig) -> Result<SamplerRun> {
    cfg.validate()?;
    let (start, end) = cfg.horizon;
    let theta = cfg.theta;
    let n_steps = ((end - start) / cfg.step).ceil().max(1.0) as usize;
    let eval = |s: f64| -> Result<f64> {
        let v = g.eval(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation { t: s, value: v })
        }
    };

    let mut events = Vec::new();
    let mut grazing = Vec::new();
    let mut t = start;
    let mut reference = eval(start)?;

    for i in 0..n_steps {
        let a = start + i as f64 * cfg.step;
        let b = if i + 1 == n_steps { end } else { a + cfg.step };
        if b <= a {
            break;
        }
        for j in 1..=SCAN_POINTS_PER_STEP {
            let s = if j == SCAN_POINTS_PER_STEP {
                b
            } else {
                a + (b - a) * j as f64 / SCAN_POINTS_PER_STEP as f64
            };
            loop {
                let gs = eval(s)?;
                if (gs - reference).abs() < theta {
                    t = s;
                    break;
                }
                let r = reference;
                let hit = bisect(t, s, cfg.crossing_tol, |u| (g.eval(u) - r).abs() >= theta)?;
                let g_hit = eval(hit)?;
                let delta = cfg.step * 1e-3;
                let slope = (g.eval(hit + delta) - g.eval(hit - delta)) / (2.0 * delta);
                if slope.abs() * cfg.step < GRAZING_FRACTION * theta {
                    grazing.push(events.len());
                }
                events.push(Event {
                    t: hit,
                    v: theta.copysign(g_hit - r),
                });
                reference = g_hit;
                t = hit;
                if hit >= s {
                    break;
                }
            }
        }
    }

    Ok(SamplerRun {
        sequence: EventSequence {
            events,
            theta,
            alpha: 0.0,
            t0: start,
        },
        grazing,
        steps: n_steps,
    })
}

/// Shrinks `[lo, hi]` (with `reached(hi)` true, `reached(lo)` false) below
/// `tol` and returns the upper end.
fn bisect(mut lo: f64, mut hi: f64, tol: f64, reached: impl Fn(f64) -> bool) -> Result<f64> {
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(hi);
        }
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::Numerical(format!(
        "bisection did not converge on [{lo}, {hi}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::FnSignal;

    fn cfg(theta: f64, alpha: f64, horizon: (f64, f64), step: f64) -> SamplerConfig {
        SamplerConfig {
            theta,
            alpha,
            step,
            crossing_tol: DEFAULT_CROSSING_TOL,
            horizon,
        }
    }

    #[test]
    fn zero_signal_has_no_events() {
        let zero = FnSignal::new(|_| 0.0);
        let seq = lif_sample(&zero, &cfg(0.01, 0.1, (0.0, 10.0), 1.0 / 32.0)).unwrap();
        assert!(seq.is_empty());
        assert_eq!(seq.t0, 0.0);
    }

    #[test]
    fn constant_input_fires_at_closed_form_spacing() {
        let one = FnSignal::new(|_| 1.0);
        let (theta, alpha) = (0.01, 0.1);
        let seq = lif_sample(&one, &cfg(theta, alpha, (0.0, 2.0), 1.0 / 32.0)).unwrap();
        let spacing = -(1.0 - theta * alpha).ln() / alpha;
        assert!((spacing - 0.010005003).abs() < 1e-9);
        assert!(seq.events.iter().all(|e| e.v == theta));
        let mut prev = 0.0;
        for e in &seq.events {
            assert!((e.t - prev - spacing).abs() < 1e-6);
            prev = e.t;
        }
        assert_eq!(seq.len(), (2.0 / spacing).floor() as usize);
    }

    #[test]
    fn negative_constant_fires_down_events() {
        let f = FnSignal::new(|_| -2.0);
        let seq = lif_sample(&f, &cfg(0.01, 0.0, (0.0, 1.0), 1.0 / 32.0)).unwrap();
        assert!(seq.events.iter().all(|e| e.v == -0.01));
        assert!((seq.events[0].t - 0.005).abs() < 1e-8);
    }

    #[test]
    fn zero_length_horizon_is_rejected() {
        let one = FnSignal::new(|_| 1.0);
        assert!(matches!(
            lif_sample(&one, &cfg(0.01, 0.1, (1.0, 1.0), 0.01)),
            Err(Error::Parameter(_))
        ));
        assert!(sod_sample(&one, &cfg(0.01, 0.1, (1.0, 1.0), 0.01)).is_err());
    }

    #[test]
    fn non_finite_values_are_evaluation_errors() {
        let bad = FnSignal::new(|t: f64| if t > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(
            lif_sample(&bad, &cfg(0.01, 0.1, (0.0, 1.0), 0.01)),
            Err(Error::Evaluation { .. })
        ));
        assert!(matches!(
            sod_sample(&bad, &cfg(0.01, 0.1, (0.0, 1.0), 0.01)),
            Err(Error::Evaluation { .. })
        ));
    }

    #[test]
    fn sod_of_constant_and_ramp() {
        let c = FnSignal::new(|_| 3.0);
        assert!(sod_sample(&c, &cfg(0.01, 0.0, (0.0, 1.0), 1.0 / 32.0))
            .unwrap()
            .is_empty());

        let ramp = FnSignal::new(|t| t);
        let seq = sod_sample(&ramp, &cfg(0.01, 0.0, (0.0, 1.0 + 1e-9), 1.0 / 32.0)).unwrap();
        assert_eq!(seq.len(), 100);
        for (k, e) in seq.events.iter().enumerate() {
            assert!(
                (e.t - 0.01 * (k + 1) as f64).abs() < 1e-8,
                "event {k} at {}",
                e.t
            );
            assert_eq!(e.v, 0.01);
        }
        assert_eq!(seq.alpha, 0.0);
    }

    #[test]
    fn tangential_touch_is_flagged() {
        // y(t) = 0.01 (1 + 1e-7) sin^2(pi t) barely exceeds theta around t = 1/2.
        let amp = 0.01 * (1.0 + 1e-7) * std::f64::consts::PI;
        let f = FnSignal::new(move |t: f64| amp * (2.0 * std::f64::consts::PI * t).sin());
        let run = lif_sample_detailed(&f, &cfg(0.01, 0.0, (0.0, 0.75), 1.0 / 64.0)).unwrap();
        assert_eq!(run.sequence.len(), 1);
        assert_eq!(run.grazing, vec![0]);
        assert!((run.sequence.events[0].t - 0.5).abs() < 1e-3);
    }

    #[test]
    fn event_sequence_validation() {
        let ev = |t, v| Event { t, v };
        assert!(EventSequence::new(vec![ev(1.0, 0.1), ev(2.0, -0.1)], 0.1, 0.0, 0.0).is_ok());
        assert!(EventSequence::new(vec![ev(1.0, 0.1), ev(1.0, 0.1)], 0.1, 0.0, 0.0).is_err());
        assert!(EventSequence::new(vec![ev(1.0, 0.2)], 0.1, 0.0, 0.0).is_err());
        assert!(EventSequence::new(vec![], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn default_step_rule() {
        assert_eq!(default_step(1.0, 0.1), 1.0 / 32.0);
        assert_eq!(default_step(0.1, 2.0), 0.05);
        let c = SamplerConfig::for_bandwidth(0.01, 0.1, (0.0, 1.0), 1.0);
        assert!(c.check_resolution(1.0).is_ok());
        assert!(c.check_resolution(2.0).is_err());
    }
}
