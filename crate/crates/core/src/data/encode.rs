use std::path::Path;

use serde::{Deserialize, Serialize};

use super::normalize::RangeNormalizer;
use super::pca::PcaModel;
use super::record::{EventRecord, Label};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::StateVector;

/// Rotation angles of one event, one per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedEvent {
    pub angles: Vec<f64>,
    pub label: Label,
}

impl EncodedEvent {
    pub fn angles_as<T: Real>(&self) -> Vec<T> {
        self.angles.iter().map(|&a| T::lit(a)).collect()
    }
}

/// `|x⟩ = ⊗_i RY(x_i)|0⟩`.
pub fn encode_angles<T: Real>(angles: &[T]) -> StateVector<T> {
    StateVector::product_ry(angles)
}

/// PCA projection followed by range normalization, fitted on training events.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    pub pca: PcaModel,
    pub normalizer: RangeNormalizer,
}

/// On-disk form of [`Preprocessor`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PreprocessorFile {
    d: usize,
    n_input: usize,
    mean: Vec<f64>,
    /// `d × n_input`, row-major.
    components: Vec<f64>,
    explained_variance: Vec<f64>,
    residual_variance: f64,
    min: Vec<f64>,
    max: Vec<f64>,
}

impl Preprocessor {
    pub fn fit(train: &[EventRecord], d: usize) -> Result<Self> {
        let pca = PcaModel::fit(train, d)?;
        let coords: Vec<Vec<f64>> = train.iter().map(|e| pca.project(&e.features)).collect();
        let normalizer = RangeNormalizer::fit(&coords)?;
        Ok(Self { pca, normalizer })
    }

    pub fn dim(&self) -> usize {
        self.pca.dim()
    }

    pub fn transform(&self, e: &EventRecord) -> EncodedEvent {
        transform(&self.pca, &self.normalizer, e)
    }

    pub fn transform_all(&self, events: &[EventRecord]) -> Vec<EncodedEvent> {
        events.iter().map(|e| self.transform(e)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let file = PreprocessorFile {
            d: self.pca.dim(),
            n_input: self.pca.mean.len(),
            mean: self.pca.mean.clone(),
            components: self.pca.components.concat(),
            explained_variance: self.pca.explained_variance.clone(),
            residual_variance: self.pca.residual_variance,
            min: self.normalizer.min.clone(),
            max: self.normalizer.max.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: PreprocessorFile = serde_json::from_str(s)?;
        if f.components.len() != f.d * f.n_input
            || f.mean.len() != f.n_input
            || f.min.len() != f.d
            || f.max.len() != f.d
        {
            return Err(Error::InvalidConfig("inconsistent preprocessor dimensions".into()));
        }
        Ok(Self {
            pca: PcaModel {
                mean: f.mean,
                components: f.components.chunks(f.n_input).map(<[f64]>::to_vec).collect(),
                explained_variance: f.explained_variance,
                residual_variance: f.residual_variance,
            },
            normalizer: RangeNormalizer {
                min: f.min,
                max: f.max,
            },
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&s)
    }
}

/// `angles = normalizer(components · (features − mean))`.
pub fn transform(pca: &PcaModel, normalizer: &RangeNormalizer, e: &EventRecord) -> EncodedEvent {
    EncodedEvent {
        angles: normalizer.apply(&pca.project(&e.features)),
        label: e.label,
    }
}
