//! Weyl discrepancy between interval measures.
//!
//! Signals induce the faded interval function
//! `mu_f((r, s]) = int_r^s f(tau) exp(alpha (tau - s)) dtau`; event sequences
//! induce `mu_eta(I) = sum_{t_j in I} exp(alpha (t_j - t_n)) v_j`, anchored at
//! the last event `t_n` inside `I`. The discrepancy of two measures is the
//! supremum over intervals of the absolute difference.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::sampler::EventSequence;
use crate::signal::{reference_leaky_average, SampledGrid, Signal};

/// Which anchoring rule produced a discrepancy value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semantics {
    /// Each measure is anchored at its own last event in the interval.
    PerSequenceAnchor,
    /// Both measures are anchored at the last event of the merged sequence.
    MergedAnchor,
    /// Continuous interval function restricted to grid endpoints.
    Grid,
}

/// Discrepancy value with the interval attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyResult {
    pub value: f64,
    pub interval: (f64, f64),
    pub semantics: Semantics,
    /// Merged-anchor only: largest distance between a sequence's own last
    /// event and the merged last event inside the maximizing interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor_gap: Option<f64>,
}

/// Fading pseudo-addition of adjacent interval values:
/// `x` measured over `(r, s]`, `y` over `(s, t]`.
pub fn oplus(x: f64, y: f64, alpha: f64, s: f64, t: f64) -> f64 {
    (alpha * (s - t)).exp() * x + y
}

/// `mu_eta` of the closed interval `[lo, hi]`; zero when no event lies inside.
pub fn mu_eta_interval(eta: &EventSequence, interval: (f64, f64), alpha: f64) -> Result<f64> {
    let (lo, hi) = interval;
    if lo > hi {
        return param(format!("interval [{lo}, {hi}] is reversed"));
    }
    let inside = eta.events.iter().filter(|e| e.t >= lo && e.t <= hi);
    let Some(anchor) = inside.clone().next_back().map(|e| e.t) else {
        return Ok(0.0);
    };
    Ok(inside.map(|e| (alpha * (e.t - anchor)).exp() * e.v).sum())
}

/// `mu_f((r, s])` by quadrature.
pub fn mu_signal_interval(f: &impl Signal, interval: (f64, f64), alpha: f64) -> Result<f64> {
    let (r, s) = interval;
    if r == s {
        return Ok(0.0);
    }
    reference_leaky_average(f, s, alpha, r)
}

fn shared_alpha(a: &EventSequence, b: &EventSequence) -> Result<f64> {
    if a.alpha != b.alpha {
        return param(format!(
            "event sequences disagree on alpha: {} vs {}",
            a.alpha, b.alpha
        ));
    }
    if !(a.alpha.is_finite() && a.alpha >= 0.0) {
        return param(format!(
            "alpha must be finite and non-negative, got {}",
            a.alpha
        ));
    }
    Ok(a.alpha)
}

/// One time of the merged sequence with the value contributed by each side.
#[derive(Debug, Clone, Copy)]
struct Merged {
    t: f64,
    a: Option<f64>,
    b: Option<f64>,
}

fn merge(a: &EventSequence, b: &EventSequence) -> Vec<Merged> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ta = a.events.get(i).map_or(f64::INFINITY, |e| e.t);
        let tb = b.events.get(j).map_or(f64::INFINITY, |e| e.t);
        if ta == tb {
            out.push(Merged {
                t: ta,
                a: Some(a.events[i].v),
                b: Some(b.events[j].v),
            });
            i += 1;
            j += 1;
        } else if ta < tb {
            out.push(Merged {
                t: ta,
                a: Some(a.events[i].v),
                b: None,
            });
            i += 1;
        } else {
            out.push(Merged {
                t: tb,
                a: None,
                b: Some(b.events[j].v),
            });
            j += 1;
        }
    }
    out
}

fn empty_result(a: &EventSequence, semantics: Semantics) -> DiscrepancyResult {
    DiscrepancyResult {
        value: 0.0,
        interval: (a.t0, a.t0),
        semantics,
        anchor_gap: None,
    }
}

/// Running faded sum anchored at the latest contributing event.
#[derive(Debug, Clone, Copy, Default)]
struct Anchored {
    sum: f64,
    last: Option<f64>,
}

impl Anchored {
    fn push(&mut self, t: f64, v: f64, alpha: f64) {
        self.sum = match self.last {
            Some(prev) => v + (alpha * (prev - t)).exp() * self.sum,
            None => v,
        };
        self.last = Some(t);
    }
}

/// Reference event-space discrepancy `d_E` with per-sequence anchoring.
///
/// Enumerates every closed interval whose endpoints are merged event times,
/// O(N^2) in the merged length. Left endpoints are processed in parallel;
/// ties resolve to the earliest left, then earliest right endpoint.
pub fn event_discrepancy_bruteforce(
    a: &EventSequence,
    b: &EventSequence,
) -> Result<DiscrepancyResult> {
    let alpha = shared_alpha(a, b)?;
    let merged = merge(a, b);
    if merged.is_empty() {
        return Ok(empty_result(a, Semantics::PerSequenceAnchor));
    }

    let best_from = |p: usize| -> (f64, usize) {
        let mut sa = Anchored::default();
        let mut sb = Anchored::default();
        let mut best = (-1.0, p);
        for (q, m) in merged.iter().enumerate().skip(p) {
            if let Some(v) = m.a {
                sa.push(m.t, v, alpha);
            }
            if let Some(v) = m.b {
                sb.push(m.t, v, alpha);
            }
            let d = (sa.sum - sb.sum).abs();
            if d > best.0 {
                best = (d, q);
            }
        }
        best
    };

    let per_left: Vec<(f64, usize)> = (0..merged.len()).into_par_iter().map(best_from).collect();
    let mut value = 0.0;
    let mut interval = (merged[0].t, merged[0].t);
    for (p, &(d, q)) in per_left.iter().enumerate() {
        if d > value {
            value = d;
            interval = (merged[p].t, merged[q].t);
        }
    }
    Ok(DiscrepancyResult {
        value,
        interval,
        semantics: Semantics::PerSequenceAnchor,
        anchor_gap: None,
    })
}

/// Largest distance, over both sequences, between the sequence's own last
/// event in `window` and the window's last merged event.
fn anchor_gap(window: &[Merged]) -> f64 {
    let Some(end) = window.last().map(|m| m.t) else {
        return 0.0;
    };
    let gap = |pick: fn(&Merged) -> bool| {
        window
            .iter()
            .rev()
            .find(|m| pick(m))
            .map_or(0.0, |m| end - m.t)
    };
    gap(|m| m.a.is_some()).max(gap(|m| m.b.is_some()))
}

/// Event discrepancy with a common anchor, by enumeration.
///
/// Both measures of an interval `[u_p, u_q]` are faded to its right endpoint
/// `u_q`, the last merged event inside it, mirroring how `mu_f((r, s])` is
/// faded to `s`. O(N^2); ties resolve as in [`event_discrepancy_bruteforce`].
pub fn event_discrepancy_common_anchor(
    a: &EventSequence,
    b: &EventSequence,
) -> Result<DiscrepancyResult> {
    let alpha = shared_alpha(a, b)?;
    let merged = merge(a, b);
    if merged.is_empty() {
        let mut r = empty_result(a, Semantics::MergedAnchor);
        r.anchor_gap = Some(0.0);
        return Ok(r);
    }

    let best_from = |p: usize| -> (f64, usize) {
        let (mut sa, mut sb) = (0.0, 0.0);
        let mut prev = merged[p].t;
        let mut best = (-1.0, p);
        for (q, m) in merged.iter().enumerate().skip(p) {
            let decay = (alpha * (prev - m.t)).exp();
            sa = decay * sa + m.a.unwrap_or(0.0);
            sb = decay * sb + m.b.unwrap_or(0.0);
            prev = m.t;
            let d = (sa - sb).abs();
            if d > best.0 {
                best = (d, q);
            }
        }
        best
    };

    let per_left: Vec<(f64, usize)> = (0..merged.len()).into_par_iter().map(best_from).collect();
    let mut value = 0.0;
    let mut span = (0, 0);
    for (p, &(d, q)) in per_left.iter().enumerate() {
        if d > value {
            value = d;
            span = (p, q);
        }
    }
    Ok(DiscrepancyResult {
        value,
        interval: (merged[span.0].t, merged[span.1].t),
        semantics: Semantics::MergedAnchor,
        anchor_gap: Some(anchor_gap(&merged[span.0..=span.1])),
    })
}

/// Linear-time event discrepancy on the merged difference sequence.
///
/// Computes the same quantity as [`event_discrepancy_common_anchor`]. It
/// equals [`event_discrepancy_bruteforce`] when `alpha = 0` or when both
/// sequences share their time stamps; otherwise each per-sequence anchor
/// sits up to `anchor_gap` before the common one, so the per-sequence
/// measures differ by a factor of at most `exp(alpha * anchor_gap)`.
pub fn event_discrepancy_streaming(
    a: &EventSequence,
    b: &EventSequence,
) -> Result<DiscrepancyResult> {
    let alpha = shared_alpha(a, b)?;
    let merged = merge(a, b);
    if merged.is_empty() {
        let mut r = empty_result(a, Semantics::MergedAnchor);
        r.anchor_gap = Some(0.0);
        return Ok(r);
    }

    let mut hi = 0.0f64;
    let mut lo = 0.0f64;
    let (mut hi_start, mut lo_start) = (0, 0);
    let mut value = 0.0;
    let mut span = (0, 0);
    let mut prev_t = merged[0].t;
    for (j, m) in merged.iter().enumerate() {
        let c = m.a.unwrap_or(0.0) - m.b.unwrap_or(0.0);
        let decay = (alpha * (prev_t - m.t)).exp();
        let carried_hi = decay * hi;
        if j > 0 && carried_hi > 0.0 {
            hi = carried_hi + c;
        } else {
            hi = c;
            hi_start = j;
        }
        let carried_lo = decay * lo;
        if j > 0 && carried_lo < 0.0 {
            lo = carried_lo + c;
        } else {
            lo = c;
            lo_start = j;
        }
        if hi > value {
            value = hi;
            span = (hi_start, j);
        }
        if -lo > value {
            value = -lo;
            span = (lo_start, j);
        }
        prev_t = m.t;
    }

    let (s, e) = span;
    Ok(DiscrepancyResult {
        value,
        interval: (merged[s].t, merged[e].t),
        semantics: Semantics::MergedAnchor,
        anchor_gap: Some(anchor_gap(&merged[s..=e])),
    })
}

/// Grid approximation of the signal-space discrepancy `d_F`.
///
/// Interval endpoints are restricted to grid points; each step contributes
/// the faded trapezoid increment `w_i = h/2 (d_{i-1} e^{-alpha h} + d_i)` of
/// the difference `d = fa - fb`, and Kadane-style recurrences track the
/// largest and smallest faded sums ending at each point.
pub fn signal_discrepancy_grid(
    fa: &SampledGrid,
    fb: &SampledGrid,
    alpha: f64,
) -> Result<DiscrepancyResult> {
    fa.check_aligned(fb)?;
    if !(alpha.is_finite() && alpha >= 0.0) {
        return param(format!(
            "alpha must be finite and non-negative, got {alpha}"
        ));
    }
    let h = fa.h;
    let decay = (-alpha * h).exp();
    let d: Vec<f64> = fa
        .values
        .iter()
        .zip(&fb.values)
        .map(|(x, y)| x - y)
        .collect();

    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    let (mut hi_start, mut lo_start) = (0, 0);
    let mut value = 0.0;
    let mut span = (0, 0);
    for i in 1..d.len() {
        let w = 0.5 * h * (d[i - 1] * decay + d[i]);
        let carried = decay * hi;
        if carried > 0.0 {
            hi = carried + w;
        } else {
            hi = w;
            hi_start = i - 1;
        }
        let carried = decay * lo;
        if carried < 0.0 {
            lo = carried + w;
        } else {
            lo = w;
            lo_start = i - 1;
        }
        if hi > value {
            value = hi;
            span = (hi_start, i);
        }
        if -lo > value {
            value = -lo;
            span = (lo_start, i);
        }
    }
    Ok(DiscrepancyResult {
        value,
        interval: (fa.time(span.0), fa.time(span.1)),
        semantics: Semantics::Grid,
        anchor_gap: None,
    })
}

/// Samples `f` and `g` on a common grid over `[start, end]` and returns
/// their grid discrepancy.
pub fn signal_discrepancy(
    f: &impl Signal,
    g: &impl Signal,
    alpha: f64,
    start: f64,
    end: f64,
    max_step: f64,
) -> Result<DiscrepancyResult> {
    let fa = SampledGrid::covering(f, start, end, max_step)?;
    let fb = SampledGrid::covering(g, start, end, max_step)?;
    signal_discrepancy_grid(&fa, &fb, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::Event;

    fn seq(events: &[(f64, f64)], theta: f64, alpha: f64) -> EventSequence {
        EventSequence::new(
            events.iter().map(|&(t, v)| Event { t, v }).collect(),
            theta,
            alpha,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn mu_eta_cases() {
        let th = 0.01;
        let eta = seq(&[(0.0, th), (1.0, th)], th, 2f64.ln());
        assert_eq!(mu_eta_interval(&eta, (2.0, 3.0), 0.3).unwrap(), 0.0);
        let v = mu_eta_interval(&eta, (0.0, 1.0), 2f64.ln()).unwrap();
        assert!((v - 1.5 * th).abs() < 1e-15);
        let plain = seq(&[(0.5, th), (1.0, -th), (1.5, th), (2.0, th)], th, 0.0);
        assert_eq!(mu_eta_interval(&plain, (0.0, 2.0), 0.0).unwrap(), 2.0 * th);
        assert!(mu_eta_interval(&plain, (1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn oplus_cases() {
        assert_eq!(oplus(0.3, 0.4, 0.0, 1.0, 2.0), 0.3 + 0.4);
        let th = 0.01;
        assert!((oplus(th, 0.0, 2f64.ln(), 1.0, 2.0) - th / 2.0).abs() < 1e-16);
    }

    #[test]
    fn identical_sequences_have_zero_discrepancy() {
        let a = seq(&[(0.3, 0.1), (0.7, -0.1), (1.1, 0.1)], 0.1, 0.5);
        assert_eq!(event_discrepancy_bruteforce(&a, &a).unwrap().value, 0.0);
        assert_eq!(event_discrepancy_streaming(&a, &a).unwrap().value, 0.0);
    }

    #[test]
    fn two_ups_against_nothing() {
        let th = 0.01;
        let a = seq(&[(1.0, th), (2.0, th)], th, 0.0);
        let b = EventSequence::empty(th, 0.0, 0.0);
        let r = event_discrepancy_bruteforce(&a, &b).unwrap();
        assert_eq!(r.value, 2.0 * th);
        assert_eq!(r.interval, (1.0, 2.0));
        let s = event_discrepancy_streaming(&a, &b).unwrap();
        assert_eq!(s.value, 2.0 * th);
        assert_eq!(s.interval, (1.0, 2.0));
    }

    #[test]
    fn empty_pair_is_zero() {
        let a = EventSequence::empty(0.1, 0.2, 5.0);
        let r = event_discrepancy_bruteforce(&a, &a).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.interval, (5.0, 5.0));
    }

    #[test]
    fn mismatched_alpha_is_rejected() {
        let a = EventSequence::empty(0.1, 0.2, 0.0);
        let b = EventSequence::empty(0.1, 0.3, 0.0);
        assert!(event_discrepancy_bruteforce(&a, &b).is_err());
        assert!(event_discrepancy_streaming(&a, &b).is_err());
    }

    #[test]
    fn constant_grid_difference() {
        let n = 101;
        let fa = SampledGrid::new(0.0, 0.01, vec![1.0; n]).unwrap();
        let fb = SampledGrid::new(0.0, 0.01, vec![0.0; n]).unwrap();
        let r = signal_discrepancy_grid(&fa, &fb, 0.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(r.interval.0, 0.0);
        assert!((r.interval.1 - 1.0).abs() < 1e-12);
        assert_eq!(signal_discrepancy_grid(&fa, &fa, 0.1).unwrap().value, 0.0);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let fa = SampledGrid::new(0.0, 0.01, vec![1.0; 5]).unwrap();
        let fb = SampledGrid::new(0.0, 0.01, vec![1.0; 6]).unwrap();
        assert!(signal_discrepancy_grid(&fa, &fb, 0.0).is_err());
    }

    #[test]
    fn serializes_with_interval_array() {
        let r = DiscrepancyResult {
            value: 0.5,
            interval: (1.0, 2.0),
            semantics: Semantics::PerSequenceAnchor,
            anchor_gap: None,
        };
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"value":0.5,"interval":[1.0,2.0],"semantics":"per-sequence-anchor"}"#
        );
    }
}
