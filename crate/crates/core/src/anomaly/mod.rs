//! Anomaly scores, thresholding and the α grid-search pipeline.

mod pipeline;
mod score;

pub use pipeline::{
    evaluate, restart_seed, run_pipeline, AlphaResult, AnomalyConfig, AnomalyReport, Detector,
    ScoreTable, ScoredEvent, ThresholdRule,
};
pub use score::{
    classical_loss, classical_score, label_event, quantum_score, ClassicalScoreSettings, Decision,
    QuantumScorer, QuantumTerms, ScoreOrientation,
};
