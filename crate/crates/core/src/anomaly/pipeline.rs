use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::score::{
    classical_score, label_event, ClassicalScoreSettings, Decision, QuantumScorer, ScoreOrientation,
};
use crate::data::{EncodedEvent, Label};
use crate::error::{Error, Result};
use crate::gan::ClassicalGanModel;
use crate::metrics::{confusion_metrics, roc_auc, ConfusionCounts, ConfusionMetrics, RocPoint, ScoredSample, Truth};
use crate::qgan::QGanModel;
use crate::rng::{child_seed, rng_from, substream};
use crate::scalar::Real;
use crate::sim::ExpectationMode;
use rand::RngCore;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `δ` halfway between the mean normal and mean anomaly scores.
    #[default]
    MeanMidpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnomalyConfig {
    pub alpha_grid: Vec<f64>,
    pub threshold: ThresholdRule,
    pub classical: ClassicalScoreSettings,
    pub orientation: ScoreOrientation,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        Self {
            alpha_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            threshold: ThresholdRule::MeanMidpoint,
            classical: ClassicalScoreSettings::default(),
            orientation: ScoreOrientation::AsWritten,
        }
    }
}

impl AnomalyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::InvalidConfig("alpha grid must lie in [0, 1]".into()));
        }
        if !self.alpha_grid.contains(&0.0) || !self.alpha_grid.contains(&1.0) {
            return Err(Error::InvalidConfig("alpha grid must contain 0 and 1".into()));
        }
        if self.classical.restarts == 0 || !(self.classical.step_size > 0.0) {
            return Err(Error::InvalidConfig(
                "classical scoring needs at least one restart and a positive step".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredEvent {
    pub id: usize,
    pub label: Label,
    pub truth: Truth,
}

/// Scores of every event at every α: `scores[a][e]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub alphas: Vec<f64>,
    pub events: Vec<ScoredEvent>,
    pub scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    /// Events restricted to the normal class plus the given anomaly labels.
    pub fn restrict(&self, anomaly_labels: &[Label]) -> Self {
        let keep: Vec<usize> = (0..self.events.len())
            .filter(|&i| {
                let e = &self.events[i];
                e.truth == Truth::Normal || anomaly_labels.contains(&e.label)
            })
            .collect();
        Self {
            alphas: self.alphas.clone(),
            events: keep.iter().map(|&i| self.events[i].clone()).collect(),
            scores: self
                .scores
                .iter()
                .map(|row| keep.iter().map(|&i| row[i]).collect())
                .collect(),
        }
    }

    /// CSV with columns `event_id,label,alpha,score`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["event_id", "label", "alpha", "score"])?;
        for (a, row) in self.alphas.iter().zip(&self.scores) {
            for (e, s) in self.events.iter().zip(row) {
                w.write_record([
                    e.id.to_string(),
                    truth_label(e).to_string(),
                    format!("{a:?}"),
                    format!("{s:?}"),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Reads a table written by [`ScoreTable::write_csv`]. Events labelled
    /// `SM` are the normal class.
    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut alphas: Vec<f64> = Vec::new();
        let mut events: Vec<ScoredEvent> = Vec::new();
        let mut scores: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |reason: String| Error::MalformedRow { line: line + 2, reason };
            if rec.len() != 4 {
                return Err(bad(format!("expected 4 fields, got {}", rec.len())));
            }
            let id: usize = rec[0].parse().map_err(|e| bad(format!("event_id: {e}")))?;
            let label: Label = rec[1].parse().map_err(bad)?;
            let alpha: f64 = rec[2].parse().map_err(|e| bad(format!("alpha: {e}")))?;
            let score: f64 = rec[3].parse().map_err(|e| bad(format!("score: {e}")))?;
            if alphas.last() != Some(&alpha) {
                if alphas.contains(&alpha) {
                    return Err(bad("alpha blocks must be contiguous".into()));
                }
                alphas.push(alpha);
                scores.push(Vec::new());
            }
            let a = alphas.len() - 1;
            let e = scores[a].len();
            if a == 0 {
                let truth = if label == Label::Sm { Truth::Normal } else { Truth::Anomaly };
                events.push(ScoredEvent { id, label, truth });
            } else if events.get(e).map(|ev| ev.id) != Some(id) {
                return Err(bad("event order differs between alpha blocks".into()));
            }
            scores[a].push(score);
        }
        if scores.iter().any(|row| row.len() != events.len()) {
            return Err(Error::InvalidConfig("alpha blocks have different lengths".into()));
        }
        Ok(Self { alphas, events, scores })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::read_csv(std::fs::File::open(path)?)
    }
}

fn truth_label(e: &ScoredEvent) -> Label {
    match (e.truth, e.label) {
        (Truth::Normal, _) => Label::Sm,
        (Truth::Anomaly, Label::Sm | Label::Unlabeled) => Label::Unlabeled,
        (Truth::Anomaly, l) => l,
    }
}

/// A trained model together with how it is to be scored.
#[derive(Debug, Clone, Copy)]
pub enum Detector<'a, T> {
    Quantum {
        model: &'a QGanModel<T>,
        mode: ExpectationMode,
        seed: u64,
    },
    Classical {
        model: &'a ClassicalGanModel<T>,
        seed: u64,
    },
}

impl<'a, T: Real> Detector<'a, T> {
    pub fn quantum(model: &'a QGanModel<T>) -> Self {
        Detector::Quantum { model, mode: ExpectationMode::Exact, seed: 0 }
    }

    /// Scores normal events (ids `0..n`) followed by anomalies (ids `n..`)
    /// at every α of the grid.
    pub fn score_table(
        &self,
        normal: &[EncodedEvent],
        anomalies: &[EncodedEvent],
        config: &AnomalyConfig,
    ) -> Result<ScoreTable> {
        config.validate()?;
        let events: Vec<(&EncodedEvent, ScoredEvent)> = normal
            .iter()
            .map(|e| (e, Truth::Normal))
            .chain(anomalies.iter().map(|e| (e, Truth::Anomaly)))
            .enumerate()
            .map(|(id, (e, truth))| (e, ScoredEvent { id, label: e.label, truth }))
            .collect();
        let per_event: Vec<Vec<f64>> = match *self {
            Detector::Quantum { model, mode, seed } => {
                let scorer = QuantumScorer::new(model, mode, seed)?;
                events
                    .par_iter()
                    .map(|(e, meta)| {
                        let t = scorer.terms(e, meta.id as u64)?;
                        Ok(config.alpha_grid.iter().map(|&a| t.score(T::lit(a)).as_f64()).collect())
                    })
                    .collect::<Result<_>>()?
            }
            Detector::Classical { model, seed } => events
                .par_iter()
                .map(|(e, meta)| {
                    let x = e.angles_as::<T>();
                    // same restart points at every α
                    let event_seed = child_seed(seed, meta.id as u64);
                    config
                        .alpha_grid
                        .iter()
                        .map(|&a| {
                            let mut rng = rng_from(event_seed);
                            Ok(classical_score(&x, model, T::lit(a), &config.classical, &mut rng)?.as_f64())
                        })
                        .collect()
                })
                .collect::<Result<_>>()?,
        };
        let scores = (0..config.alpha_grid.len())
            .map(|a| per_event.iter().map(|row| row[a]).collect())
            .collect();
        Ok(ScoreTable {
            alphas: config.alpha_grid.clone(),
            events: events.into_iter().map(|(_, m)| m).collect(),
            scores,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaResult {
    pub alpha: f64,
    /// AUC in the configured orientation.
    pub auc: f64,
    /// AUC with the orientation flipped, `1 − auc`.
    pub auc_flipped: f64,
    pub delta: f64,
    pub counts: ConfusionCounts,
    pub metrics: ConfusionMetrics,
    /// All scores identical.
    pub degenerate: bool,
    /// Written separately as CSV.
    #[serde(skip)]
    pub roc: Vec<RocPoint<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub orientation: ScoreOrientation,
    pub n_normal: usize,
    pub n_anomaly: usize,
    pub per_alpha: Vec<AlphaResult>,
    pub alpha_max: f64,
    pub auc_max: f64,
    pub delta: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub accuracy_as_printed: f64,
    pub precision: f64,
    pub recall: f64,
    pub degenerate: bool,
}

impl AnomalyReport {
    pub fn best(&self) -> &AlphaResult {
        self.per_alpha
            .iter()
            .find(|r| r.alpha == self.alpha_max)
            .expect("alpha_max is taken from per_alpha")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// ROC points of one α as CSV (`fpr,tpr,threshold`).
    pub fn write_roc_csv<W: Write>(&self, alpha_index: usize, writer: W) -> Result<()> {
        let r = self
            .per_alpha
            .get(alpha_index)
            .ok_or_else(|| Error::InvalidConfig(format!("no alpha with index {alpha_index}")))?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["fpr", "tpr", "threshold"])?;
        for p in &r.roc {
            w.write_record([format!("{:?}", p.fpr), format!("{:?}", p.tpr), format!("{:?}", p.threshold)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// ROC, AUC and thresholded metrics per α; α_max is the first α reaching
/// the largest AUC.
pub fn evaluate(table: &ScoreTable, orientation: ScoreOrientation) -> Result<AnomalyReport> {
    if table.alphas.is_empty() {
        return Err(Error::InvalidConfig("empty alpha grid".into()));
    }
    let n_anomaly = table.events.iter().filter(|e| e.truth == Truth::Anomaly).count();
    let n_normal = table.events.len() - n_anomaly;
    let mut per_alpha = Vec::with_capacity(table.alphas.len());
    for (&alpha, row) in table.alphas.iter().zip(&table.scores) {
        let samples: Vec<ScoredSample<f64>> = row
            .iter()
            .zip(&table.events)
            .map(|(&score, e)| ScoredSample { score, truth: e.truth })
            .collect();
        let curve = roc_auc(&samples, orientation.direction())?;
        let mean = |t: Truth| {
            let v: Vec<f64> = samples.iter().filter(|s| s.truth == t).map(|s| s.score).collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        let delta = 0.5 * (mean(Truth::Normal) + mean(Truth::Anomaly));
        let counts = ConfusionCounts::tally(&samples, |s| label_event(s, delta, orientation) == Decision::Anomalous);
        let degenerate = row.iter().all(|&s| s == row[0]);
        per_alpha.push(AlphaResult {
            alpha,
            auc: curve.auc,
            auc_flipped: 1.0 - curve.auc,
            delta,
            counts,
            metrics: confusion_metrics(&counts)?,
            degenerate,
            roc: curve.points,
        });
    }
    let best = per_alpha
        .iter()
        .fold(&per_alpha[0], |b, r| if r.auc > b.auc { r } else { b })
        .clone();
    Ok(AnomalyReport {
        orientation,
        n_normal,
        n_anomaly,
        alpha_max: best.alpha,
        auc_max: best.auc,
        delta: best.delta,
        f1: best.metrics.f1,
        accuracy: best.metrics.accuracy,
        accuracy_as_printed: best.metrics.accuracy_as_printed,
        precision: best.metrics.precision,
        recall: best.metrics.recall,
        degenerate: best.degenerate,
        per_alpha,
    })
}

/// Scores both sets with `detector` and evaluates the result.
pub fn run_pipeline<T: Real>(
    detector: &Detector<'_, T>,
    normal: &[EncodedEvent],
    anomalies: &[EncodedEvent],
    config: &AnomalyConfig,
) -> Result<(ScoreTable, AnomalyReport)> {
    if normal.is_empty() || anomalies.is_empty() {
        return Err(Error::SingleClass);
    }
    let table = detector.score_table(normal, anomalies, config)?;
    let report = evaluate(&table, config.orientation)?;
    Ok((table, report))
}

/// Seed for classical scoring restarts derived from a run seed.
pub fn restart_seed(seed: u64) -> u64 {
    substream(seed, "restarts").next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(normal: &[f64], anomaly: &[f64], alphas: usize) -> ScoreTable {
        let events: Vec<ScoredEvent> = normal
            .iter()
            .map(|_| (Label::Sm, Truth::Normal))
            .chain(anomaly.iter().map(|_| (Label::Graviton, Truth::Anomaly)))
            .enumerate()
            .map(|(id, (label, truth))| ScoredEvent { id, label, truth })
            .collect();
        let row: Vec<f64> = normal.iter().chain(anomaly).copied().collect();
        ScoreTable {
            alphas: (0..alphas).map(|i| i as f64 / (alphas - 1).max(1) as f64).collect(),
            events,
            scores: vec![row; alphas],
        }
    }

    #[test]
    fn separable_scores() {
        let t = table(&[0.1, 0.2, 0.15], &[0.8, 0.9], 2);
        let r = evaluate(&t, ScoreOrientation::AsWritten).unwrap();
        assert_eq!((r.auc_max, r.f1, r.accuracy), (1.0, 1.0, 1.0));
        let inv = evaluate(&t, ScoreOrientation::Inverted).unwrap();
        assert_eq!(inv.auc_max, 0.0);
        assert_eq!(inv.best().auc_flipped, 1.0);
    }

    #[test]
    fn identical_scores_flagged() {
        let t = table(&[0.4; 5], &[0.4; 5], 2);
        let r = evaluate(&t, ScoreOrientation::AsWritten).unwrap();
        assert_eq!(r.auc_max, 0.5);
        assert!(r.degenerate);
        assert!(r.per_alpha.iter().all(|a| a.metrics.precision_degenerate));
    }

    #[test]
    fn alpha_max_is_argmax() {
        let mut t = table(&[0.1, 0.5], &[0.4, 0.9], 2);
        t.scores[1] = vec![0.1, 0.2, 0.3, 0.4];
        let r = evaluate(&t, ScoreOrientation::AsWritten).unwrap();
        assert_eq!(r.per_alpha[0].auc, 0.75);
        assert_eq!(r.per_alpha[1].auc, 1.0);
        assert_eq!(r.alpha_max, 1.0);
        for a in &r.per_alpha {
            for m in [a.metrics.f1, a.metrics.accuracy, a.metrics.precision, a.metrics.recall] {
                assert!((0.0..=1.0).contains(&m));
            }
        }
    }

    #[test]
    fn csv_round_trip_reproduces_report() {
        let mut t = table(&[0.1, 0.35, 0.2], &[0.3, 0.9, 0.25], 3);
        t.scores[2] = vec![0.3, 0.1, 0.2, 0.7, 0.6, 0.05];
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = ScoreTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert_eq!(
            evaluate(&back, ScoreOrientation::Inverted).unwrap(),
            evaluate(&t, ScoreOrientation::Inverted).unwrap()
        );
    }

    #[test]
    fn restrict_keeps_normals() {
        let mut t = table(&[0.1], &[0.8, 0.9], 2);
        t.events[2].label = Label::Higgs;
        let r = t.restrict(&[Label::Higgs]);
        assert_eq!(r.events.len(), 2);
        assert_eq!(r.scores[0], vec![0.1, 0.9]);
    }

    #[test]
    fn config_validation() {
        assert!(AnomalyConfig::default().validate().is_ok());
        let bad = AnomalyConfig { alpha_grid: vec![0.0, 0.5], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AnomalyConfig { alpha_grid: vec![0.0, 1.0, 1.5], ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
