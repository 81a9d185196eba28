//! File formats.
//!
//! CSV files carry a fixed header and shortest round-trip float text, so a
//! value read back is bit-identical to the value written. Event and
//! coefficient files keep their parameters in a JSON sidecar next to the CSV
//! (`events.csv` pairs with `events.json`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{ErrorTriple, SweepEntry};
use crate::reconstruction::{CoefficientFlag, CoefficientSeries};
use crate::sampler::{Event, EventSequence, SamplerConfig};
use crate::signal::{BandlimitedSignal, SampledGrid};

/// Relative spacing deviation tolerated when reading a grid file.
const GRID_SPACING_TOL: f64 = 1e-9;

/// Path of the JSON sidecar belonging to `csv_path`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
}

pub fn write_signal(path: &Path, f: &BandlimitedSignal) -> Result<()> {
    write_json(path, f)
}

pub fn read_signal(path: &Path) -> Result<BandlimitedSignal> {
    let f: BandlimitedSignal = read_json(path)?;
    f.validate()?;
    Ok(f)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    Ok(csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)?)
}

fn csv_reader(path: &Path, header: &[&str]) -> Result<csv::Reader<File>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(Error::Format(format!(
            "{}: expected header {:?}, found {:?}",
            path.display(),
            header.join(","),
            found.join(",")
        )));
    }
    Ok(r)
}

pub fn write_grid(path: &Path, grid: &SampledGrid) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["t", "value"])?;
    for (i, v) in grid.values.iter().enumerate() {
        w.serialize((grid.time(i), v))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,value` file; the times must be uniformly spaced.
pub fn read_grid(path: &Path) -> Result<SampledGrid> {
    let mut r = csv_reader(path, &["t", "value"])?;
    let rows: Vec<(f64, f64)> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    let Some(&(t0, _)) = rows.first() else {
        return Err(Error::Format(format!(
            "{}: grid has no rows",
            path.display()
        )));
    };
    let h = if rows.len() > 1 {
        rows[1].0 - rows[0].0
    } else {
        1.0
    };
    for (i, &(t, _)) in rows.iter().enumerate() {
        let expected = t0 + i as f64 * h;
        if (t - expected).abs() > GRID_SPACING_TOL * h.abs().max(expected.abs()) {
            return Err(Error::Format(format!(
                "{}: row {i} breaks the uniform spacing",
                path.display()
            )));
        }
    }
    SampledGrid::new(t0, h, rows.into_iter().map(|(_, v)| v).collect())
}

/// Sampler parameters stored next to an event file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventMetadata {
    pub theta: f64,
    pub alpha: f64,
    pub t0: f64,
    pub horizon: (f64, f64),
    pub step: f64,
    pub crossing_tol: f64,
}

impl From<&SamplerConfig> for EventMetadata {
    fn from(cfg: &SamplerConfig) -> Self {
        Self {
            theta: cfg.theta,
            alpha: cfg.alpha,
            t0: cfg.horizon.0,
            horizon: cfg.horizon,
            step: cfg.step,
            crossing_tol: cfg.crossing_tol,
        }
    }
}

impl EventMetadata {
    pub fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            theta: self.theta,
            alpha: self.alpha,
            step: self.step,
            crossing_tol: self.crossing_tol,
            horizon: self.horizon,
        }
    }
}

/// Writes `t,v` rows and the sidecar.
pub fn write_events(path: &Path, eta: &EventSequence, meta: &EventMetadata) -> Result<()> {
    if meta.theta != eta.theta || meta.alpha != eta.alpha || meta.t0 != eta.t0 {
        return Err(Error::Parameter(
            "event metadata does not describe the sequence".into(),
        ));
    }
    let mut w = csv_writer(path)?;
    w.write_record(["t", "v"])?;
    for e in &eta.events {
        w.serialize((e.t, e.v))?;
    }
    w.flush()?;
    write_json(&sidecar_path(path), meta)
}

pub fn read_events(path: &Path) -> Result<(EventSequence, EventMetadata)> {
    let meta: EventMetadata = read_json(&sidecar_path(path))?;
    let mut r = csv_reader(path, &["t", "v"])?;
    let events: Vec<Event> = r
        .deserialize()
        .map(|row| row.map(|(t, v)| Event { t, v }))
        .collect::<std::result::Result<_, _>>()?;
    let eta = EventSequence::new(events, meta.theta, meta.alpha, meta.t0)?;
    Ok((eta, meta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CoefficientMetadata {
    origin: f64,
    #[serde(rename = "T")]
    period: f64,
    flags: Vec<CoefficientFlag>,
}

/// Writes `n,a_n` rows; origin, period and flags go to the sidecar.
pub fn write_coefficients(path: &Path, coeffs: &CoefficientSeries) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", "a_n"])?;
    for (n, a) in coeffs.indices().zip(&coeffs.values) {
        w.serialize((n, a))?;
    }
    w.flush()?;
    let meta = CoefficientMetadata {
        origin: coeffs.origin,
        period: coeffs.period,
        flags: coeffs.flags.clone(),
    };
    write_json(&sidecar_path(path), &meta)
}

pub fn read_coefficients(path: &Path) -> Result<CoefficientSeries> {
    let meta: CoefficientMetadata = read_json(&sidecar_path(path))?;
    let mut r = csv_reader(path, &["n", "a_n"])?;
    let rows: Vec<(i64, f64)> = r.deserialize().collect::<std::result::Result<_, _>>()?;
    let len = rows.len();
    if len.is_multiple_of(2) || meta.flags.len() != len {
        return Err(Error::Format(format!(
            "{}: expected an odd number of rows matching the sidecar flags",
            path.display()
        )));
    }
    let r_max = (len / 2) as i64;
    if rows
        .iter()
        .zip(-r_max..=r_max)
        .any(|(&(n, _), expected)| n != expected)
    {
        return Err(Error::Format(format!(
            "{}: indices must run from -r to r",
            path.display()
        )));
    }
    Ok(CoefficientSeries {
        origin: meta.origin,
        period: meta.period,
        r: r_max as usize,
        values: rows.into_iter().map(|(_, a)| a).collect(),
        flags: meta.flags,
    })
}

/// Writes `r,d_sample,d_signal,max_norm`.
pub fn write_sweep(path: &Path, entries: &[SweepEntry]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["r", "d_sample", "d_signal", "max_norm"])?;
    for e in entries {
        w.serialize((e.r, e.errors.d_sample, e.errors.d_signal, e.errors.max_norm))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sweep file back as `(r, errors)` rows.
pub fn read_sweep(path: &Path) -> Result<Vec<(usize, ErrorTriple)>> {
    let mut r = csv_reader(path, &["r", "d_sample", "d_signal", "max_norm"])?;
    r.deserialize()
        .map(|row| {
            let (r, d_sample, d_signal, max_norm): (usize, f64, f64, f64) = row?;
            Ok((
                r,
                ErrorTriple {
                    d_sample,
                    d_signal,
                    max_norm,
                },
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spacing_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "t,value\n0,1\n0.5,2\n1.5,3\n").unwrap();
        assert!(matches!(read_grid(&p), Err(Error::Format(_))));
        std::fs::write(&p, "t,value\n0,1\n0.5,2\n1,3\n").unwrap();
        let g = read_grid(&p).unwrap();
        assert_eq!((g.t0, g.h, g.values), (0.0, 0.5, vec![1.0, 2.0, 3.0]));
    }

    #[test]
    fn wrong_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.csv");
        std::fs::write(&p, "time,v\n").unwrap();
        let meta = EventMetadata::from(&SamplerConfig::for_bandwidth(0.01, 0.1, (0.0, 1.0), 1.0));
        write_json(&sidecar_path(&p), &meta).unwrap();
        assert!(matches!(read_events(&p), Err(Error::Format(_))));
    }
}
