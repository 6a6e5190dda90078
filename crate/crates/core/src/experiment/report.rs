use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::manifest::{file_digest, sha256_hex, CommandRecord, Manifest};
use super::run::{EvaluationFile, Family};
use crate::data::Label;
use crate::error::{Error, Result};

/// Mean and sample standard deviation over seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n_features: usize,
    pub model_kind: Family,
    pub anomaly_kind: Label,
    pub n_seeds: usize,
    pub auc: MeanStd,
    pub f1: MeanStd,
    pub accuracy: MeanStd,
    pub precision: MeanStd,
    pub recall: MeanStd,
    /// Best α of each run, in input order.
    pub alpha_max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub manifest_digest: String,
    pub rows: Vec<SummaryRow>,
}

/// One row per (feature count, model kind, anomaly kind) over the
/// `report.json` files of `runs`.
pub fn summarize(runs: &[EvaluationFile]) -> Vec<SummaryRow> {
    type Key = (usize, Family, Label);
    let mut groups: BTreeMap<Key, Vec<&crate::anomaly::AnomalyReport>> = BTreeMap::new();
    for r in runs {
        for e in &r.entries {
            groups.entry((r.features, e.model_kind, e.anomaly_kind)).or_default().push(&e.report);
        }
    }
    groups
        .into_iter()
        .map(|((n_features, model_kind, anomaly_kind), reps)| {
            let stat = |f: fn(&crate::anomaly::AnomalyReport) -> f64| {
                MeanStd::of(&reps.iter().map(|r| f(r)).collect::<Vec<_>>())
            };
            SummaryRow {
                n_features,
                model_kind,
                anomaly_kind,
                n_seeds: reps.len(),
                auc: stat(|r| r.auc_max),
                f1: stat(|r| r.f1),
                accuracy: stat(|r| r.accuracy),
                precision: stat(|r| r.precision),
                recall: stat(|r| r.recall),
                alpha_max: reps.iter().map(|r| r.alpha_max).collect(),
            }
        })
        .collect()
}

fn summary_csv(rows: &[SummaryRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "n_features", "model_kind", "anomaly_kind", "n_seeds", "auc_mean", "auc_std", "f1_mean", "f1_std",
        "accuracy_mean", "accuracy_std", "precision_mean", "precision_std", "recall_mean", "recall_std",
    ])?;
    for r in rows {
        let mut rec = vec![
            r.n_features.to_string(),
            r.model_kind.as_str().to_string(),
            r.anomaly_kind.as_str().to_string(),
            r.n_seeds.to_string(),
        ];
        for m in [r.auc, r.f1, r.accuracy, r.precision, r.recall] {
            rec.push(format!("{:?}", m.mean));
            rec.push(format!("{:?}", m.std));
        }
        w.write_record(&rec)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Aggregates the evaluation reports of `runs` into `out/summary.{csv,json}`.
pub fn aggregate(runs: &[PathBuf], out: &Path) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("report needs at least one run directory".into()));
    }
    let mut inputs = BTreeMap::new();
    let mut files = Vec::with_capacity(runs.len());
    for dir in runs {
        let path = dir.join("report.json");
        inputs.insert(path.display().to_string(), file_digest(&path)?);
        files.push(serde_json::from_str::<EvaluationFile>(&std::fs::read_to_string(&path)?)?);
    }
    std::fs::create_dir_all(out)?;
    let mut manifest = Manifest::new(ExperimentConfig::default(), inputs)?;
    let summary = Summary {
        manifest_digest: manifest.digest.clone(),
        rows: summarize(&files),
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    let csv = summary_csv(&summary.rows)?;
    for (name, bytes) in [("summary.json", json.as_bytes()), ("summary.csv", csv.as_slice())] {
        std::fs::write(out.join(name), bytes)?;
        manifest.artifacts.insert(name.to_string(), sha256_hex(bytes));
    }
    manifest.commands.push(CommandRecord {
        name: "report".into(),
        args: runs.iter().map(|p| p.display().to_string()).collect(),
    });
    manifest.save(out)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std() {
        let m = MeanStd::of(&[1.0, 2.0, 3.0]);
        assert_eq!(m.mean, 2.0);
        assert!((m.std - 1.0).abs() < 1e-15);
        assert_eq!(MeanStd::of(&[4.0]).std, 0.0);
    }
}
