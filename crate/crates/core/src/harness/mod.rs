//! Experiment driver: single runs, seeded Monte-Carlo batches and analytic
//! or simulated curves, with their on-disk outputs.
//!
//! A run directory holds `report.json`, `timeseries.csv` and
//! `confirmation-trace.jsonl`. A batch directory holds `batch.json` with the
//! mean, standard deviation and 95% confidence half-width of every numeric
//! report field, plus `runs.csv` with one row per seed.

pub mod curves;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::config::{ConfigError, ExperimentConfig};
use crate::metrics::{MetricsReport, SimOutput};
use crate::netsim::{self, SimError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

/// Loads a config: the named profile (default `desk`) with the JSON file at
/// `path`, if any, merged on top.
pub fn load_config(path: Option<&Path>, profile: Option<&str>) -> Result<ExperimentConfig, HarnessError> {
    let overlay = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            Some(serde_json::from_str::<Value>(&text).map_err(ConfigError::from)?)
        }
        None => None,
    };
    Ok(ExperimentConfig::from_profile(profile.unwrap_or("desk"), overlay)?)
}

/// Writes a run's report, time series and confirmation trace into `dir`.
pub fn write_run(dir: &Path, out: &SimOutput) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report = dir.join("report.json");
    fs::write(&report, serde_json::to_string_pretty(&out.report)?).map_err(io_err(&report))?;

    let series = dir.join("timeseries.csv");
    let mut w = csv::Writer::from_path(&series)?;
    for row in &out.timeseries {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(&series))?;

    let trace = dir.join("confirmation-trace.jsonl");
    let mut f = BufWriter::new(File::create(&trace).map_err(io_err(&trace))?);
    for rec in &out.trace {
        serde_json::to_writer(&mut f, rec)?;
        f.write_all(b"\n").map_err(io_err(&trace))?;
    }
    f.flush().map_err(io_err(&trace))?;
    Ok(())
}

/// Mean, sample standard deviation and normal-approximation 95% confidence
/// half-width of one metric across a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub ci95: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n.max(1) as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std = var.sqrt();
        Stat {
            n,
            mean,
            std,
            ci95: 1.96 * std / (n.max(1) as f64).sqrt(),
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Aggregate of a seeded batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub seeds: Vec<u64>,
    /// Every numeric or boolean report field, keyed by its dotted path.
    pub metrics: BTreeMap<String, Stat>,
    /// Fraction of runs whose attack succeeded, when an attack ran.
    pub attack_success_frequency: Option<f64>,
    /// Runs with at least one post-confirmation reversal.
    pub runs_with_reversals: usize,
    pub reports: Vec<MetricsReport>,
}

/// Flattens numeric and boolean leaves of a JSON value into dotted paths.
pub fn flatten(v: &Value, prefix: &str, out: &mut BTreeMap<String, f64>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Number(n) => {
            if let Some(x) = n.as_f64() {
                out.insert(prefix.to_string(), x);
            }
        }
        Value::Bool(b) => {
            out.insert(prefix.to_string(), if *b { 1.0 } else { 0.0 });
        }
        Value::Object(map) => {
            for (k, v) in map {
                flatten(v, &key(k), out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, &key(&i.to_string()), out);
            }
        }
        _ => {}
    }
}

/// Runs `seeds` concurrently and aggregates the reports.
pub fn batch(cfg: &ExperimentConfig, seeds: &[u64]) -> Result<BatchReport, HarnessError> {
    if seeds.is_empty() {
        return Err(HarnessError::Parameter { name: "seeds", reason: "at least one seed is required".into() });
    }
    cfg.validate()?;
    let reports: Vec<MetricsReport> = seeds
        .par_iter()
        .map(|&s| netsim::run(cfg, s).map(|o| o.report))
        .collect::<Result<_, _>>()?;
    Ok(aggregate(seeds.to_vec(), reports))
}

/// Aggregates already-computed reports.
pub fn aggregate(seeds: Vec<u64>, reports: Vec<MetricsReport>) -> BatchReport {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &reports {
        let mut flat = BTreeMap::new();
        flatten(&serde_json::to_value(r).expect("reports serialize"), "", &mut flat);
        for (k, v) in flat {
            columns.entry(k).or_default().push(v);
        }
    }
    let metrics = columns.into_iter().map(|(k, xs)| (k, Stat::from_values(&xs))).collect();
    let attacks: Vec<bool> = reports.iter().filter_map(|r| r.attack.as_ref().map(|a| a.success)).collect();
    BatchReport {
        seeds,
        metrics,
        attack_success_frequency: (!attacks.is_empty())
            .then(|| attacks.iter().filter(|s| **s).count() as f64 / attacks.len() as f64),
        runs_with_reversals: reports.iter().filter(|r| r.post_confirmation_reversals > 0).count(),
        reports,
    }
}

/// Writes `batch.json` and `runs.csv` into `dir`.
pub fn write_batch(dir: &Path, b: &BatchReport) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let summary = dir.join("batch.json");
    fs::write(&summary, serde_json::to_string_pretty(b)?).map_err(io_err(&summary))?;

    let runs = dir.join("runs.csv");
    let mut w = csv::Writer::from_path(&runs)?;
    let header: Vec<&str> = b.metrics.keys().map(String::as_str).collect();
    w.write_record(&header)?;
    for r in &b.reports {
        let mut flat = BTreeMap::new();
        flatten(&serde_json::to_value(r)?, "", &mut flat);
        w.write_record(header.iter().map(|k| flat.get(*k).map(|x| x.to_string()).unwrap_or_default()))?;
    }
    w.flush().map_err(io_err(&runs))?;
    Ok(())
}

/// Writes serializable rows as CSV.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}
