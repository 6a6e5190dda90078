use std::path::PathBuf;

use thiserror::Error;

/// One epoch of adversarial training: generator loss and discriminator objective.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub generator_loss: f64,
    pub discriminator_objective: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("gate addresses qubit {0} more than once")]
    DuplicateQubit(usize),
    #[error("gate references undeclared parameter slot {0}")]
    UnboundParameter(usize),
    #[error("parameter slot {0} is not referenced by any rotation gate")]
    UnusedParameter(usize),
    #[error("expected {expected} parameters, got {got}")]
    ParameterCount { expected: usize, got: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),
    #[error("probability {name} = {value} outside [0, 1]")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training data has rank {rank}, fewer than the {requested} requested components")]
    RankDeficient { rank: usize, requested: usize },
    #[error("need at least {needed} records, got {got}")]
    NotEnoughRecords { needed: usize, got: usize },
    #[error("malformed record at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("non-positive spread {0} in mixture component")]
    NonPositiveSpread(f64),
    #[error("ROC analysis needs samples of both classes")]
    SingleClass,
    #[error("kappa = {0} must exceed 1 (increase gamma or n_data)")]
    KappaTooSmall(f64),
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize, history: Vec<EpochLoss> },
    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
    #[error(transparent)]
    TomlSer(#[from] toml::ser::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
