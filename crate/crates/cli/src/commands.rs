use std::path::Path;

use lifrecon::estimator::{quasi_isometry_audit, sweep_truncation, tune, QuasiAuditReport};
use lifrecon::io::{self, EventMetadata};
use lifrecon::reconstruction::{estimate_coefficients, reconstruct as synthesize};
use lifrecon::sampler::lif_sample;
use lifrecon::signal::BandlimitedSignal;
use lifrecon::Result;
use serde::Serialize;

use crate::config::RunConfig;

fn load_signal(cfg: &RunConfig, path: Option<&Path>) -> Result<BandlimitedSignal> {
    match path {
        Some(p) => io::read_signal(p),
        None => cfg.signal_for_seed(cfg.seed),
    }
}

pub fn generate(cfg: &RunConfig) -> Result<()> {
    let f = cfg.signal_for_seed(cfg.seed)?;
    let out = cfg.output_dir.join("signal.json");
    io::write_signal(&out, &f)?;
    println!("wrote {} ({} atoms)", out.display(), f.atoms.len());
    Ok(())
}

pub fn sample(cfg: &RunConfig, signal: Option<&Path>) -> Result<()> {
    let f = load_signal(cfg, signal)?;
    let sampler = cfg.sampler_config()?;
    sampler.check_resolution(f.omega)?;
    let eta = lif_sample(&f, &sampler)?;
    let out = cfg.output_dir.join("events.csv");
    io::write_events(&out, &eta, &EventMetadata::from(&sampler))?;
    println!("wrote {} ({} events)", out.display(), eta.len());
    Ok(())
}

pub fn reconstruct(cfg: &RunConfig, events: &Path, r: Option<usize>) -> Result<()> {
    let (eta, meta) = io::read_events(events)?;
    let mut run = cfg.clone();
    run.sampler.theta = meta.theta;
    run.sampler.alpha = meta.alpha;
    run.sampler.horizon = meta.horizon;
    let sweep = run.sweep_config()?;
    let r = r.unwrap_or(sweep.r_range.1);
    let coeffs = estimate_coefficients(&eta, &sweep.window, sweep.origin, r, Some(meta.horizon.1))?;
    let (lo, hi) = sweep.eval_window;
    let len = ((hi - lo) / sweep.grid_step).ceil() as usize + 1;
    let h = (hi - lo) / (len - 1) as f64;
    let grid = synthesize(&coeffs, &sweep.window, lo, h, len)?;
    let coeff_path = cfg.output_dir.join("coefficients.csv");
    let grid_path = cfg.output_dir.join("reconstruction.csv");
    io::write_coefficients(&coeff_path, &coeffs)?;
    io::write_grid(&grid_path, &grid)?;
    io::write_json(&cfg.output_dir.join("window.json"), &sweep.window)?;
    println!(
        "wrote {} and {} (r = {r})",
        coeff_path.display(),
        grid_path.display()
    );
    Ok(())
}

pub fn sweep(cfg: &RunConfig, signal: Option<&Path>, jobs: Option<usize>) -> Result<()> {
    let f = load_signal(cfg, signal)?;
    let sweep = cfg.sweep_config()?;
    sweep.sampler.check_resolution(f.omega)?;
    let result = sweep_truncation(&f, &sweep, jobs)?;
    let out = cfg.output_dir.join("sweep.csv");
    io::write_sweep(&out, &result.entries)?;
    let tuning = tune(&result)?;
    println!(
        "wrote {} ({} rows); r_star={} basin=[{}, {}]",
        out.display(),
        result.entries.len(),
        tuning.r_star,
        tuning.basin.0,
        tuning.basin.1
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct AuditEntry {
    alpha: f64,
    seed_f: u64,
    seed_g: u64,
    #[serde(flatten)]
    report: QuasiAuditReport,
}

#[derive(Debug, Serialize)]
struct AuditFile {
    violations: usize,
    grid_step: f64,
    entries: Vec<AuditEntry>,
}

/// Pair `k` draws `f` from `seed + 2k` and `g` from `seed + 2k + 1` (or `f`
/// itself when `audit.identical` is set), for every configured leak rate.
pub fn audit(cfg: &RunConfig) -> Result<()> {
    let grid_step = cfg.audit_grid_step();
    let mut entries = Vec::new();
    for &alpha in &cfg.audit.alphas {
        let sampler = cfg.sampler_config_with_alpha(alpha)?;
        for k in 0..cfg.audit.pairs as u64 {
            let seed_f = cfg.seed.wrapping_add(2 * k);
            let seed_g = if cfg.audit.identical {
                seed_f
            } else {
                seed_f.wrapping_add(1)
            };
            let f = cfg.signal_for_seed(seed_f)?;
            let g = cfg.signal_for_seed(seed_g)?;
            let report = quasi_isometry_audit(&f, &g, &sampler, grid_step, cfg.audit.tol)?;
            entries.push(AuditEntry {
                alpha,
                seed_f,
                seed_g,
                report,
            });
        }
    }
    let violations = entries.iter().filter(|e| e.report.violation).count();
    let out = cfg.output_dir.join("audit.json");
    io::write_json(
        &out,
        &AuditFile {
            violations,
            grid_step,
            entries,
        },
    )?;
    println!("wrote {}", out.display());
    println!("violations={violations}");
    Ok(())
}
