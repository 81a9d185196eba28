//! Bandlimited test signals, uniform sample grids and reference quantities.
//!
//! Test signals are finite sums of shifted sinc atoms
//! `f(t) = sum_m a_m sinc(2 omega (t - c_m))`, which lie exactly in the
//! Paley-Wiener space of bandwidth `omega` and evaluate in closed form.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::quadrature::{self, GaussLegendre};

/// Normalized sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Anything that can be evaluated pointwise in time.
pub trait Signal: Sync {
    fn eval(&self, t: f64) -> f64;

    /// One-sided bandwidth in cycles per time unit, when known.
    fn bandwidth(&self) -> Option<f64> {
        None
    }
}

impl<S: Signal + ?Sized> Signal for &S {
    fn eval(&self, t: f64) -> f64 {
        (**self).eval(t)
    }

    fn bandwidth(&self) -> Option<f64> {
        (**self).bandwidth()
    }
}

/// Adapts a closure into a [`Signal`].
pub struct FnSignal<F> {
    f: F,
    bandwidth: Option<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> FnSignal<F> {
    pub fn new(f: F) -> Self {
        Self { f, bandwidth: None }
    }

    pub fn with_bandwidth(f: F, omega: f64) -> Self {
        Self {
            f,
            bandwidth: Some(omega),
        }
    }
}

impl<F: Fn(f64) -> f64 + Sync> Signal for FnSignal<F> {
    fn eval(&self, t: f64) -> f64 {
        (self.f)(t)
    }

    fn bandwidth(&self) -> Option<f64> {
        self.bandwidth
    }
}

/// One sinc atom: amplitude `a` centered at time `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub c: f64,
    pub a: f64,
}

/// A finite sinc sum with bandwidth `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSignal {
    pub omega: f64,
    pub atoms: Vec<Atom>,
}

impl BandlimitedSignal {
    pub fn new(omega: f64, atoms: Vec<Atom>) -> Result<Self> {
        let s = Self { omega, atoms };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return param(format!(
                "omega must be positive and finite, got {}",
                self.omega
            ));
        }
        if self.atoms.is_empty() {
            return param("a bandlimited signal needs at least one atom");
        }
        if self
            .atoms
            .iter()
            .any(|a| !(a.c.is_finite() && a.a.is_finite()))
        {
            return param("atom centers and amplitudes must be finite");
        }
        Ok(())
    }

    /// Largest possible magnitude, `sum |a_m|`.
    pub fn amplitude_bound(&self) -> f64 {
        self.atoms.iter().map(|a| a.a.abs()).sum()
    }

    /// Returns a copy with every atom shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            omega: self.omega,
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    c: a.c + dt,
                    a: a.a,
                })
                .collect(),
        }
    }
}

impl Signal for BandlimitedSignal {
    fn eval(&self, t: f64) -> f64 {
        let scale = 2.0 * self.omega;
        self.atoms
            .iter()
            .map(|a| a.a * sinc(scale * (t - a.c)))
            .sum()
    }

    fn bandwidth(&self) -> Option<f64> {
        Some(self.omega)
    }
}

/// Draws a reproducible random sinc sum.
///
/// Centers are uniform in `time_window`, amplitudes uniform in `amp_range`.
/// Degenerate ranges (`lo == hi`) pin the corresponding value.
pub fn generate_random_bandlimited(
    omega: f64,
    n_atoms: usize,
    amp_range: (f64, f64),
    time_window: (f64, f64),
    seed: u64,
) -> Result<BandlimitedSignal> {
    if !(omega.is_finite() && omega > 0.0) {
        return param(format!("omega must be positive, got {omega}"));
    }
    if n_atoms == 0 {
        return param("n_atoms must be at least 1");
    }
    for (name, (lo, hi)) in [("amp_range", amp_range), ("time_window", time_window)] {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return param(format!(
                "{name} must be a finite interval with lo <= hi, got [{lo}, {hi}]"
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |(lo, hi): (f64, f64)| {
        if lo == hi {
            lo
        } else {
            rng.random_range(lo..hi)
        }
    };
    let atoms = (0..n_atoms)
        .map(|_| {
            let c = draw(time_window);
            let a = draw(amp_range);
            Atom { c, a }
        })
        .collect();
    BandlimitedSignal::new(omega, atoms)
}

/// Free function form of [`Signal::eval`] for sinc sums.
pub fn evaluate(f: &BandlimitedSignal, t: f64) -> f64 {
    f.eval(t)
}

/// Uniformly sampled values starting at `t0` with spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub t0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl SampledGrid {
    pub fn new(t0: f64, h: f64, values: Vec<f64>) -> Result<Self> {
        let g = Self { t0, h, values };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return param(format!("grid step must be positive, got {}", self.h));
        }
        if !self.t0.is_finite() {
            return param("grid origin must be finite");
        }
        if self.values.len() < 2 {
            return param(format!(
                "grid needs at least 2 values, got {}",
                self.values.len()
            ));
        }
        Ok(())
    }

    /// Samples `f` at `t0 + i h` for `i = 0..len`.
    pub fn sample(f: &impl Signal, t0: f64, h: f64, len: usize) -> Result<Self> {
        let values = (0..len).map(|i| f.eval(t0 + i as f64 * h)).collect();
        Self::new(t0, h, values)
    }

    /// Samples `f` on `[start, end]` with at most `max_step` spacing; both
    /// endpoints are grid points.
    pub fn covering(f: &impl Signal, start: f64, end: f64, max_step: f64) -> Result<Self> {
        if !(end > start) {
            return param(format!("grid interval [{start}, {end}] is empty"));
        }
        let intervals = ((end - start) / max_step).ceil().max(1.0) as usize;
        let h = (end - start) / intervals as f64;
        Self::sample(f, start, h, intervals + 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.h
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.values.len() - 1)
    }

    /// Fails unless `other` has the same origin, step and length.
    pub fn check_aligned(&self, other: &SampledGrid) -> Result<()> {
        if self.t0 != other.t0 || self.h != other.h || self.values.len() != other.values.len() {
            return param(format!(
                "grid mismatch: (t0={}, h={}, n={}) vs (t0={}, h={}, n={})",
                self.t0,
                self.h,
                self.values.len(),
                other.t0,
                other.h,
                other.values.len()
            ));
        }
        Ok(())
    }

    /// Pointwise difference `self - other` on an aligned grid.
    pub fn difference(&self, other: &SampledGrid) -> Result<SampledGrid> {
        self.check_aligned(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SampledGrid {
            t0: self.t0,
            h: self.h,
            values,
        })
    }
}

/// Cubic Lagrange interpolation between grid points; constant extension
/// outside the grid.
impl Signal for SampledGrid {
    fn eval(&self, t: f64) -> f64 {
        let n = self.values.len();
        let x = (t - self.t0) / self.h;
        if x <= 0.0 {
            return self.values[0];
        }
        if x >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        if n < 4 {
            let i = (x.floor() as usize).min(n - 2);
            let u = x - i as f64;
            return self.values[i] * (1.0 - u) + self.values[i + 1] * u;
        }
        let i = (x.floor() as usize).clamp(1, n - 3);
        let u = x - i as f64;
        let (p0, p1, p2, p3) = (
            self.values[i - 1],
            self.values[i],
            self.values[i + 1],
            self.values[i + 2],
        );
        // Nodes at -1, 0, 1, 2.
        let l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        p0 * l0 + p1 * l1 + p2 * l2 + p3 * l3
    }
}

/// `max_i |a_i - b_i|` over two aligned grids.
pub fn max_norm_distance(a: &SampledGrid, b: &SampledGrid) -> Result<f64> {
    a.check_aligned(b)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Panel width used by [`reference_leaky_average`]: `1 / (64 omega)`.
pub fn default_quadrature_step(omega: f64) -> f64 {
    1.0 / (64.0 * omega)
}

/// Faded integral `int_{t_start}^{t} f(s) exp(alpha (s - t)) ds` by composite
/// Gauss-Legendre quadrature at panel width `1 / (64 omega)`.
///
/// Signals without a known bandwidth use `omega = 1`.
pub fn reference_leaky_average(f: &impl Signal, t: f64, alpha: f64, t_start: f64) -> Result<f64> {
    let omega = f.bandwidth().unwrap_or(1.0);
    reference_leaky_average_with_step(f, t, alpha, t_start, default_quadrature_step(omega))
}

/// [`reference_leaky_average`] with an explicit panel width.
pub fn reference_leaky_average_with_step(
    f: &impl Signal,
    t: f64,
    alpha: f64,
    t_start: f64,
    panel: f64,
) -> Result<f64> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return param(format!(
            "alpha must be finite and non-negative, got {alpha}"
        ));
    }
    if !(t_start < t) {
        return param(format!("t_start ({t_start}) must precede t ({t})"));
    }
    if !(panel > 0.0) {
        return param("quadrature panel must be positive");
    }
    let rule = GaussLegendre::new(6);
    Ok(quadrature::composite(&rule, t_start, t, panel, |s| {
        f.eval(s) * (alpha * (s - t)).exp()
    }))
}

/// Truncation error bound of the faded integral's lower limit,
/// `sup|f| exp(-alpha (t - t_start)) / alpha`.
pub fn lower_limit_truncation_bound(sup_f: f64, alpha: f64, elapsed: f64) -> f64 {
    if alpha <= 0.0 {
        f64::INFINITY
    } else {
        sup_f * (-alpha * elapsed).exp() / alpha
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(c: f64, a: f64) -> BandlimitedSignal {
        BandlimitedSignal::new(1.0, vec![Atom { c, a }]).unwrap()
    }

    #[test]
    fn evaluate_closed_forms() {
        assert_eq!(evaluate(&single(0.0, 1.0), 0.0), 1.0);
        assert!(evaluate(&single(0.0, 1.0), 0.5).abs() < 1e-16);
        let v = evaluate(&single(0.0, 2.0), 0.25);
        assert!((v - 4.0 / PI).abs() < 1e-15);
        assert!((v - 1.27324).abs() < 1e-5);
    }

    #[test]
    fn degenerate_ranges_pin_the_atom() {
        let f = generate_random_bandlimited(1.0, 1, (1.0, 1.0), (0.0, 0.0), 12345).unwrap();
        assert_eq!(f.atoms, vec![Atom { c: 0.0, a: 1.0 }]);
        assert!((f.eval(0.3) - sinc(0.6)).abs() < 1e-16);
    }

    #[test]
    fn generation_is_deterministic_and_in_range() {
        let a = generate_random_bandlimited(1.0, 8, (-1.0, 1.0), (0.0, 20.0), 7).unwrap();
        let b = generate_random_bandlimited(1.0, 8, (-1.0, 1.0), (0.0, 20.0), 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.atoms.len(), 8);
        for atom in &a.atoms {
            assert!((0.0..=20.0).contains(&atom.c));
            assert!((-1.0..=1.0).contains(&atom.a));
        }
        let c = generate_random_bandlimited(1.0, 8, (-1.0, 1.0), (0.0, 20.0), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generation_rejects_bad_parameters() {
        assert!(generate_random_bandlimited(0.0, 1, (0.0, 1.0), (0.0, 1.0), 0).is_err());
        assert!(generate_random_bandlimited(1.0, 0, (0.0, 1.0), (0.0, 1.0), 0).is_err());
        assert!(generate_random_bandlimited(1.0, 1, (1.0, 0.0), (0.0, 1.0), 0).is_err());
        assert!(generate_random_bandlimited(1.0, 1, (0.0, 1.0), (2.0, 1.0), 0).is_err());
    }

    #[test]
    fn leaky_average_of_zero_and_constant() {
        let zero = FnSignal::new(|_| 0.0);
        assert_eq!(reference_leaky_average(&zero, 3.0, 0.1, 0.0).unwrap(), 0.0);

        let one = FnSignal::new(|_| 1.0);
        let v = reference_leaky_average(&one, 50.0, 0.1, 0.0).unwrap();
        let want = (1.0 - (-5f64).exp()) / 0.1;
        assert!((v - want).abs() < 1e-12);
        assert!((v - 9.93262).abs() < 1e-5);
    }

    #[test]
    fn leaky_average_without_leak_is_plain_integral() {
        let f = FnSignal::new(|s: f64| (2.0 * s).cos());
        let v = reference_leaky_average(&f, 3.0, 0.0, -1.0).unwrap();
        let want = ((6f64).sin() - (-2f64).sin()) / 2.0;
        assert!((v - want).abs() <= 1e-9 * want.abs());
    }

    #[test]
    fn leaky_average_rejects_reversed_limits() {
        let f = single(0.0, 1.0);
        assert!(reference_leaky_average(&f, 1.0, 0.1, 1.0).is_err());
        assert!(reference_leaky_average(&f, 1.0, -0.1, 0.0).is_err());
    }

    #[test]
    fn max_norm_cases() {
        let a = SampledGrid::new(0.0, 1.0, vec![0.0, 0.0, 0.0]).unwrap();
        let b = SampledGrid::new(0.0, 1.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(max_norm_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(max_norm_distance(&a, &b).unwrap(), 1.0);
        let c = SampledGrid::new(0.5, 1.0, vec![0.0, 1.0, 0.0]).unwrap();
        assert!(max_norm_distance(&a, &c).is_err());
    }

    #[test]
    fn grid_requires_two_values_and_positive_step() {
        assert!(SampledGrid::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(SampledGrid::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn grid_interpolation_is_exact_for_cubics() {
        let p = |t: f64| t * t * t - 2.0 * t + 1.0;
        let g = SampledGrid::sample(&FnSignal::new(p), -1.0, 0.25, 17).unwrap();
        for i in 0..60 {
            let t = -1.0 + i as f64 * 0.066;
            assert!((g.eval(t) - p(t)).abs() < 1e-12, "t = {t}");
        }
    }
}
