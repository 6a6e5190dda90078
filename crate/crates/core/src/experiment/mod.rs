//! Run directories, configuration, manifests and the end-to-end pipeline.

mod config;
mod manifest;
mod report;
mod run;

pub use config::{
    DataConfig, DataSource, EffdimSettings, ExperimentConfig, GanSettings, ModeKind, Overrides, QganSettings,
};
pub use manifest::{file_digest, sha256_hex, CommandRecord, Manifest, MANIFEST_FILE};
pub use report::{aggregate, summarize, MeanStd, Summary, SummaryRow};
pub use run::{
    effdim_rows, matched_generators, replay, EncodedSets, EvaluationFile, Experiment, Family, GanArtifact,
    QganArtifact, ReportEntry, Split, COMMANDS,
};
