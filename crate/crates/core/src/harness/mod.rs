//! Command metrics, the evaluation procedures and report emission.

mod eval;
mod plot;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use eval::{
    eval_execution, eval_generative, eval_inverse, eval_pipeline, subject_distortion, ExecutionSetup,
    InverseModels, PipelineModels, DEFAULT_FRAMES, DEFAULT_SUBJECTS, SUBJECT_BABBLE_FRAMES,
};
pub use plot::bar_chart_png;

use crate::csvio;
use crate::error::{Error, Result};
use crate::simface::MotorCommand;

fn check_lengths(a: &MotorCommand, b: &MotorCommand) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("commands have {} and {} motors", a.len(), b.len())));
    }
    Ok(())
}

/// Euclidean norm of the difference of two commands.
pub fn command_distance(a: &MotorCommand, b: &MotorCommand) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Fraction of motors whose grid class agrees.
pub fn command_accuracy(a: &MotorCommand, b: &MotorCommand) -> Result<f64> {
    check_lengths(a, b)?;
    if a.is_empty() {
        return Err(Error::Argument("accuracy of empty commands".into()));
    }
    let same = a.levels().iter().zip(b.levels()).filter(|(x, y)| **x == *y).count();
    Ok(same as f64 / a.len() as f64)
}

/// Mean and standard error (sample standard deviation over √n); the error is
/// 0 for a single value.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Seed for item `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(b"mimicface-derive");
    h.update(seed.to_le_bytes());
    h.update(index.to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub n_seeds: usize,
}

pub const REPORT_COLUMNS: [&str; 5] = ["method", "metric", "mean", "stderr", "n_seeds"];

/// Rows of one experiment plus everything needed to regenerate them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub experiment: String,
    pub rows: Vec<ReportRow>,
    pub seeds: Vec<u64>,
    pub dataset_hash: String,
    pub config: serde_json::Value,
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn new(experiment: &str, seeds: &[u64], dataset_hash: &str, config: serde_json::Value) -> Self {
        EvalReport {
            experiment: experiment.into(),
            rows: Vec::new(),
            seeds: seeds.to_vec(),
            dataset_hash: dataset_hash.into(),
            config,
            notes: Vec::new(),
        }
    }

    /// Adds a row aggregated from one value per seed.
    pub fn push(&mut self, method: &str, metric: &str, per_seed: &[f64]) {
        let (mean, stderr) = mean_stderr(per_seed);
        self.rows.push(ReportRow {
            method: method.into(),
            metric: metric.into(),
            mean,
            stderr,
            n_seeds: per_seed.len(),
        });
    }

    pub fn row(&self, method: &str, metric: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.metric == metric)
    }

    /// Mean of a row; panics if absent.
    pub fn mean(&self, method: &str, metric: &str) -> f64 {
        self.row(method, metric)
            .unwrap_or_else(|| panic!("report {} has no row {method}/{metric}", self.experiment))
            .mean
    }

    pub fn to_csv(&self) -> String {
        csvio::to_string(&self.rows)
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<ReportRow>> {
        csvio::from_str(text, &REPORT_COLUMNS, "report")
    }

    pub fn to_json(&self) -> String {
        canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format("report", e))
    }

    /// Writes `<experiment>.json` (full report) into `dir` and returns its path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(format!("{}.json", self.experiment));
        std::fs::write(&path, self.to_json()).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Loads every `*.json` report in `dir`, sorted by file name.
    pub fn load_dir(dir: &Path) -> Result<Vec<Self>> {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut out = Vec::new();
        for p in paths {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
            // other JSON files (config snapshots) are skipped
            if let Ok(r) = Self::from_json(&text) {
                out.push(r);
            }
        }
        Ok(out)
    }

    /// Bar chart of the means of one metric, error bars at ±stderr.
    pub fn plot(&self, metric: &str, path: &Path) -> Result<()> {
        let bars: Vec<(String, f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| (r.method.clone(), r.mean, r.stderr))
            .collect();
        if bars.is_empty() {
            return Err(Error::Argument(format!("report {} has no metric {metric}", self.experiment)));
        }
        bar_chart_png(&format!("{} {}", self.experiment, metric), &bars, path)
    }

    pub fn metrics(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.metric) {
                out.push(r.metric.clone());
            }
        }
        out
    }
}

/// JSON with object keys sorted, no whitespace.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    // serde_json's default map is ordered by key
    let v = serde_json::to_value(value).expect("value serialises");
    serde_json::to_string(&v).expect("value serialises")
}

/// Writes `config.json` (canonical) into `dir`.
pub fn write_config_snapshot<T: Serialize>(dir: &Path, config: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("config.json");
    std::fs::write(&path, canonical_json(config)).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cmd(levels: &[u8]) -> MotorCommand {
        MotorCommand::from_levels(levels).unwrap()
    }

    #[test]
    fn distance_and_accuracy_fixtures() {
        let a = cmd(&[0, 1, 2, 3, 4]);
        assert_eq!(command_distance(&a, &a).unwrap(), 0.0);
        assert_eq!(command_distance(&a, &cmd(&[0, 1, 2, 3, 3])).unwrap(), 0.25);
        assert_eq!(command_accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(command_accuracy(&a, &cmd(&[1, 2, 3, 4, 0])).unwrap(), 0.0);
        assert_eq!(command_accuracy(&a, &cmd(&[0, 1, 0, 0, 0])).unwrap(), 0.4);
        assert!(command_distance(&a, &cmd(&[0])).is_err());
        assert!(command_accuracy(&a, &cmd(&[0])).is_err());
    }

    #[test]
    fn mean_stderr_on_three_numbers() {
        // 1, 2, 6: mean 3, sample variance ((4 + 1 + 9) / 2) = 7, stderr √(7/3)
        let (m, s) = mean_stderr(&[1.0, 2.0, 6.0]);
        assert_eq!(m, 3.0);
        assert!((s - (7.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_stderr(&[4.0]), (4.0, 0.0));
    }

    #[test]
    fn expected_random_distance_by_enumeration() {
        // E[(a - b)^2] over independent uniform grid levels
        let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
        let mut e = 0.0;
        for a in grid {
            for b in grid {
                e += (a - b) * (a - b) / 25.0;
            }
        }
        assert!((e - 0.25f64).abs() < 1e-15);
        assert!(((10.0 * e).sqrt() - 1.5811).abs() < 1e-4);
    }

    #[test]
    fn report_csv_and_json_round_trip() {
        let mut r = EvalReport::new("table_x", &[0, 1, 2], "abc", serde_json::json!({"b": 1, "a": 2}));
        r.push("GM", "image_distance", &[0.1, 0.2, 0.3]);
        r.push("RS", "image_distance", &[0.5, 0.5, 0.5]);
        let rows = EvalReport::rows_from_csv(&r.to_csv()).unwrap();
        assert_eq!(rows, r.rows);
        assert!(r.to_csv().starts_with("method,metric,mean,stderr,n_seeds\n"));
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);
        assert!(r.to_json().contains(r#"{"a":2,"b":1}"#));
        assert_eq!(r.mean("RS", "image_distance"), 0.5);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(0, 0), derive_seed(0, 1));
        assert_ne!(derive_seed(0, 1), derive_seed(1, 0));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            a in prop::collection::vec(0u8..5, 6),
            b in prop::collection::vec(0u8..5, 6),
            c in prop::collection::vec(0u8..5, 6),
        ) {
            let (a, b, c) = (cmd(&a), cmd(&b), cmd(&c));
            let ab = command_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, command_distance(&b, &a).unwrap());
            prop_assert!(ab <= command_distance(&a, &c).unwrap() + command_distance(&c, &b).unwrap() + 1e-12);
            let acc = command_accuracy(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
            prop_assert_eq!(acc == 1.0, ab == 0.0);
        }
    }
}
