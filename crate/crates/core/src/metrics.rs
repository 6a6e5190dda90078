//! ROC analysis and confusion-matrix metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truth {
    Anomaly,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample<T> {
    pub score: T,
    pub truth: Truth,
}

/// Which end of the score axis indicates the positive (anomaly) class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsPositive,
    LowerIsPositive,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::HigherIsPositive => Direction::LowerIsPositive,
            Direction::LowerIsPositive => Direction::HigherIsPositive,
        }
    }
}

/// Operating point: samples at or beyond `threshold` (in the positive
/// direction) are predicted anomalous.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint<T> {
    pub fpr: T,
    pub tpr: T,
    pub threshold: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve<T> {
    pub points: Vec<RocPoint<T>>,
    pub auc: T,
}

/// ROC curve over every distinct score, and its trapezoidal area.
///
/// Equal scores form a single threshold step, so the area equals the
/// Mann–Whitney statistic with ties counted one half.
pub fn roc_auc<T: Real>(samples: &[ScoredSample<T>], direction: Direction) -> Result<RocCurve<T>> {
    let n_pos = samples.iter().filter(|s| s.truth == Truth::Anomaly).count();
    let n_neg = samples.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    if let Some(s) = samples.iter().find(|s| !s.score.is_finite()) {
        return Err(Error::InvalidConfig(format!("non-finite score {}", s.score)));
    }
    let mut sorted: Vec<&ScoredSample<T>> = samples.iter().collect();
    match direction {
        Direction::HigherIsPositive => sorted.sort_by(|a, b| b.score.partial_cmp(&a.score).unwrap()),
        Direction::LowerIsPositive => sorted.sort_by(|a, b| a.score.partial_cmp(&b.score).unwrap()),
    }
    let (pos, neg) = (T::from_usize(n_pos).unwrap(), T::from_usize(n_neg).unwrap());
    let start = match direction {
        Direction::HigherIsPositive => T::infinity(),
        Direction::LowerIsPositive => T::neg_infinity(),
    };
    let mut points = vec![RocPoint {
        fpr: T::zero(),
        tpr: T::zero(),
        threshold: start,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = T::zero();
    let mut i = 0;
    while i < sorted.len() {
        let t = sorted[i].score;
        while i < sorted.len() && sorted[i].score == t {
            match sorted[i].truth {
                Truth::Anomaly => tp += 1,
                Truth::Normal => fp += 1,
            }
            i += 1;
        }
        let prev = *points.last().unwrap();
        let p = RocPoint {
            fpr: T::from_usize(fp).unwrap() / neg,
            tpr: T::from_usize(tp).unwrap() / pos,
            threshold: t,
        };
        auc += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) * T::half();
        points.push(p);
    }
    Ok(RocCurve { points, auc })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    /// True anomalies.
    pub tp: usize,
    /// False anomalies.
    pub fp: usize,
    /// False non-anomalies.
    pub fn_: usize,
    /// True non-anomalies.
    pub tn: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Tallies predictions; `predict(score)` is `true` for "anomalous".
    pub fn tally<T: Real>(samples: &[ScoredSample<T>], predict: impl Fn(T) -> bool) -> Self {
        let mut c = Self::default();
        for s in samples {
            match (s.truth, predict(s.score)) {
                (Truth::Anomaly, true) => c.tp += 1,
                (Truth::Anomaly, false) => c.fn_ += 1,
                (Truth::Normal, true) => c.fp += 1,
                (Truth::Normal, false) => c.tn += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    /// `TP / total`.
    pub accuracy_as_printed: f64,
    /// `(TP + TN) / total`.
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when `TP + FP == 0` (precision reported as 0).
    pub precision_degenerate: bool,
    /// Set when `TP + FN == 0` (recall reported as 0).
    pub recall_degenerate: bool,
}

pub fn confusion_metrics(c: &ConfusionCounts) -> Result<ConfusionMetrics> {
    let total = c.total();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision > 0.0 && recall > 0.0 {
        2.0 / (1.0 / recall + 1.0 / precision)
    } else {
        0.0
    };
    Ok(ConfusionMetrics {
        accuracy_as_printed: ratio(c.tp, total),
        accuracy: ratio(c.tp + c.tn, total),
        precision,
        recall,
        f1,
        precision_degenerate: c.tp + c.fp == 0,
        recall_degenerate: c.tp + c.fn_ == 0,
    })
}
