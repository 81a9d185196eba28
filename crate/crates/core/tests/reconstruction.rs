use std::f64::consts::PI;

use lifrecon::discrepancy::signal_discrepancy_grid;
use lifrecon::estimator::{sweep_truncation, SweepConfig};
use lifrecon::reconstruction::{
    estimate_coefficients, phi, psi, reconstruct, tail_discrepancy_bound, CoefficientFlag,
    CoefficientSeries, WindowSpec,
};
use lifrecon::sampler::{lif_sample, SamplerConfig};
use lifrecon::signal::{generate_random_bandlimited, reference_leaky_average, SampledGrid, Signal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

const THETA: f64 = 0.01;

/// `int psi(t) exp(-2 pi i nu t) dt` and the same for `phi`, by Riemann sum
/// over `[-half, half]`.
fn transforms(spec: &WindowSpec, nu: f64, half: f64, dt: f64) -> (Complex<f64>, Complex<f64>) {
    let n = (2.0 * half / dt) as i64;
    let (mut p, mut q) = (Complex::new(0.0, 0.0), Complex::new(0.0, 0.0));
    for j in -n / 2..=n / 2 {
        let t = j as f64 * dt;
        let e = Complex::from_polar(dt, -2.0 * PI * nu * t);
        p += e * psi(t, spec);
        q += e * phi(t, spec);
    }
    (p, q)
}

#[test]
fn window_spectrum_is_the_trapezoid() {
    let spec = WindowSpec::new(1.0, 0.4, 0.1).unwrap();
    assert_eq!(psi(0.0, &spec), 2.5);
    for k in 1..5 {
        assert!(psi(k as f64 / 2.5, &spec).abs() < 1e-15);
    }
    assert!((phi(0.0, &spec) - 0.1 * 2.5).abs() < 1e-15);
    for i in 0..=40 {
        let nu = -2.0 + 0.1 * i as f64;
        let (p, q) = transforms(&spec, nu, 2000.0, 0.05);
        let trapezoid = spec.psi_hat(nu);
        assert!(
            (p.re - trapezoid).abs() < 1e-3 && p.im.abs() < 1e-3,
            "psi_hat({nu}) = {p}"
        );
        let expected = Complex::new(spec.alpha, 2.0 * PI * nu) * trapezoid;
        assert!(
            (q - expected).norm() < 2e-3,
            "phi_hat({nu}) = {q} vs {expected}"
        );
    }
}

#[test]
fn corpus_signals_are_bandlimited() {
    let dt = 0.05;
    let n = 1 << 16;
    let omega = 1.0;
    for seed in 0..3 {
        let f = generate_random_bandlimited(omega, 12, (-1.0, 1.0), (-20.0, 20.0), seed).unwrap();
        let mut buf: Vec<Complex<f64>> = (0..n)
            .map(|j| Complex::new(f.eval((j as f64 - n as f64 / 2.0) * dt), 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let (mut inside, mut outside) = (0.0, 0.0);
        for (k, x) in buf.iter().enumerate() {
            let nu = if k <= n / 2 {
                k as f64
            } else {
                k as f64 - n as f64
            } / (n as f64 * dt);
            if nu.abs() <= 1.05 * omega {
                inside += x.norm_sqr();
            } else {
                outside += x.norm_sqr();
            }
        }
        assert!(outside / (inside + outside) < 1e-3, "seed {seed}");
    }
}

#[test]
fn exact_coefficients_reproduce_the_signal() {
    for alpha in [0.1, 1.0] {
        let spec = WindowSpec::new(1.0, 0.4, alpha).unwrap();
        let f = generate_random_bandlimited(1.0, 6, (-1.0, 1.0), (-5.0, 5.0), 21).unwrap();
        let r = 150;
        let lookback = 25.0 / alpha;
        let values = (-r..=r)
            .map(|n| {
                let t = n as f64 * spec.period;
                reference_leaky_average(&f, t, alpha, t - lookback).unwrap()
            })
            .collect();
        let coeffs = CoefficientSeries {
            origin: 0.0,
            period: spec.period,
            r: r as usize,
            values,
            flags: vec![CoefficientFlag::Observed; 2 * r as usize + 1],
        };
        let recon = reconstruct(&coeffs, &spec, -5.0, 0.01, 1001).unwrap();
        let worst = recon
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (v - f.eval(recon.time(i))).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-2, "alpha {alpha}: {worst}");
    }
}

struct Pipeline {
    f: lifrecon::signal::BandlimitedSignal,
    cfg: SweepConfig,
    coeffs: CoefficientSeries,
}

fn pipeline(seed: u64, r: usize) -> Pipeline {
    let f = generate_random_bandlimited(1.0, 42, (-1.0, 1.0), (0.0, 128.0), seed).unwrap();
    let sampler = SamplerConfig::for_bandwidth(THETA, 0.1, (0.0, 88.0), 1.0);
    let window = WindowSpec::new(1.0, 0.4, 0.1).unwrap();
    let cfg = SweepConfig::centered(sampler, window, 50.0, (30, 54)).unwrap();
    let eta = lif_sample(&f, &cfg.sampler).unwrap();
    let coeffs = estimate_coefficients(
        &eta,
        &cfg.window,
        cfg.origin,
        r,
        Some(cfg.sampler.horizon.1),
    )
    .unwrap();
    Pipeline { f, cfg, coeffs }
}

#[test]
fn estimated_coefficients_stay_within_two_thresholds() {
    for seed in 0..3 {
        let p = pipeline(seed, 160);
        let mut checked = 0;
        for (n, (a, flag)) in p
            .coeffs
            .indices()
            .zip(p.coeffs.values.iter().zip(&p.coeffs.flags))
        {
            if *flag != CoefficientFlag::Observed {
                continue;
            }
            let t = p.coeffs.time(n);
            let exact = if t > p.cfg.sampler.horizon.0 {
                reference_leaky_average(&p.f, t, 0.1, p.cfg.sampler.horizon.0).unwrap()
            } else {
                0.0
            };
            assert!(
                (a - exact).abs() <= 2.0 * THETA + 1e-6,
                "seed {seed}, n {n}"
            );
            checked += 1;
        }
        assert!(checked > 200);
    }
}

fn d_signal(p: &Pipeline, coeffs: &CoefficientSeries) -> f64 {
    let (lo, hi) = p.cfg.eval_window;
    let truth = SampledGrid::covering(&p.f, lo, hi, p.cfg.grid_step).unwrap();
    let recon = reconstruct(coeffs, &p.cfg.window, truth.t0, truth.h, truth.len()).unwrap();
    signal_discrepancy_grid(&truth, &recon, 0.1).unwrap().value
}

#[test]
fn doubling_r_is_covered_by_the_tail_bound() {
    for seed in 0..2 {
        let p = pipeline(seed, 60);
        for r in [15, 20, 25, 30] {
            let small = p.coeffs.truncated(r).unwrap();
            let large = p.coeffs.truncated(2 * r).unwrap();
            let bound = tail_discrepancy_bound(&large, &p.cfg.window, r);
            let (ds, dl) = (d_signal(&p, &small), d_signal(&p, &large));
            assert!(
                dl <= ds + bound + 1e-6,
                "seed {seed}, r {r}: {dl} > {ds} + {bound}"
            );
        }
    }
}

#[test]
fn errors_plateau_once_the_window_is_covered() {
    let f = generate_random_bandlimited(1.0, 30, (-1.0, 1.0), (0.0, 100.0), 3).unwrap();
    let sampler = SamplerConfig::for_bandwidth(THETA, 0.1, (0.0, 70.0), 1.0);
    let window = WindowSpec::new(1.0, 0.4, 0.1).unwrap();
    let cfg = SweepConfig::centered(sampler, window, 50.0, (50, 54)).unwrap();
    let sweep = sweep_truncation(&f, &cfg, None).unwrap();
    let d = sweep.d_signal();
    let (lo, hi) = d
        .iter()
        .fold((f64::MAX, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    assert!((hi - lo) / hi < 0.05, "{d:?}");
}
