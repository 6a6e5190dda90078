use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anomaly::{AnomalyConfig, ScoreOrientation};
use crate::ansatz::{DiscriminatorSpec, GeneratorSpec};
use crate::effdim::FisherMethod;
use crate::error::{Error, Result};
use crate::gan::{GanDiscObjective, GanTrainConfig};
use crate::optim::AmsgradConfig;
use crate::qgan::{default_disc_ratio, default_specs, DiscriminatorObjective, TrainConfig};
use crate::sim::{ExpectationMode, NoiseModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    /// Gaussian-mixture surrogate; anomalies are shifted by `shift` spreads.
    Synthetic { shift: f64 },
    /// Event CSV files with columns `f0..f22`.
    Files {
        sm: PathBuf,
        higgs: Option<PathBuf>,
        graviton: Option<PathBuf>,
    },
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic { shift: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    /// Quantum training-set size.
    pub n_train: usize,
    /// Quantum test-set size per class.
    pub n_test: usize,
    /// The classical baseline sees this many times more events.
    pub classical_multiplier: usize,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            source: DataSource::default(),
            n_train: 100,
            n_test: 100,
            classical_multiplier: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    #[default]
    Exact,
    Shots,
}

impl std::str::FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ModeKind::Exact),
            "shots" => Ok(ModeKind::Shots),
            other => Err(Error::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

/// Quantum training settings; unset values take the per-mode defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QganSettings {
    pub mode: ModeKind,
    pub shots: u64,
    pub noise: NoiseModel,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub disc_steps: Option<usize>,
    pub generator_depth: Option<usize>,
    pub discriminator_depth: Option<usize>,
    pub objective: DiscriminatorObjective,
    pub init_range: f64,
}

impl Default for QganSettings {
    fn default() -> Self {
        Self {
            mode: ModeKind::Exact,
            shots: 10_000,
            noise: NoiseModel {
                p_depol_1q: 0.001,
                p_depol_2q: 0.01,
                p_readout_flip: 0.0,
            },
            epochs: None,
            learning_rate: None,
            beta1: 0.7,
            beta2: 0.99,
            batch_size: 10,
            disc_steps: None,
            generator_depth: None,
            discriminator_depth: None,
            objective: DiscriminatorObjective::Adversarial,
            init_range: 0.1,
        }
    }
}

impl QganSettings {
    pub fn expectation_mode(&self) -> ExpectationMode {
        match self.mode {
            ModeKind::Exact => ExpectationMode::Exact,
            ModeKind::Shots => ExpectationMode::Shots {
                shots: self.shots,
                noise: self.noise,
            },
        }
    }

    pub fn specs(&self, features: usize) -> (GeneratorSpec, DiscriminatorSpec) {
        let (mut g, mut d) = default_specs(features);
        if let Some(k) = self.generator_depth {
            g.depth = k;
        }
        if let Some(k) = self.discriminator_depth {
            d.depth = k;
        }
        (g, d)
    }

    pub fn train_config(&self, features: usize, seed: u64) -> TrainConfig {
        let mut c = match self.mode {
            ModeKind::Exact => TrainConfig::exact(features, seed),
            ModeKind::Shots => TrainConfig::shots(features, seed, self.shots, self.noise),
        };
        if let Some(e) = self.epochs {
            c.epochs = e;
        }
        if let Some(lr) = self.learning_rate {
            c.optimizer.learning_rate = lr;
        }
        c.optimizer.beta1 = self.beta1;
        c.optimizer.beta2 = self.beta2;
        c.batch_size = self.batch_size;
        c.disc_steps_per_gen_step = self.disc_steps.unwrap_or_else(|| default_disc_ratio(features));
        c.objective = self.objective;
        c.init_range = self.init_range;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GanSettings {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub batch_size: usize,
    pub disc_steps: usize,
    pub hidden: usize,
    pub objective: GanDiscObjective,
}

impl Default for GanSettings {
    fn default() -> Self {
        let c = GanTrainConfig::standard(0);
        Self {
            epochs: c.epochs,
            learning_rate: c.optimizer.learning_rate,
            beta1: c.optimizer.beta1,
            beta2: c.optimizer.beta2,
            batch_size: c.batch_size,
            disc_steps: c.disc_steps_per_gen_step,
            hidden: c.hidden,
            objective: c.objective,
        }
    }
}

impl GanSettings {
    pub fn train_config(&self, seed: u64) -> GanTrainConfig {
        GanTrainConfig {
            epochs: self.epochs,
            optimizer: AmsgradConfig {
                learning_rate: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: 1e-8,
            },
            batch_size: self.batch_size,
            disc_steps_per_gen_step: self.disc_steps,
            seed,
            hidden: self.hidden,
            objective: self.objective,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffdimSettings {
    pub features: Vec<usize>,
    pub n_theta: usize,
    pub method: FisherMethod,
    pub gamma: f64,
    pub n_data: usize,
    pub latent_samples: usize,
    pub temperature: f64,
    pub seeds: usize,
}

impl Default for EffdimSettings {
    fn default() -> Self {
        Self {
            features: (3..=8).collect(),
            n_theta: 30,
            method: FisherMethod::default(),
            gamma: 1.0,
            n_data: 100,
            latent_samples: 100,
            temperature: 0.1,
            seeds: 5,
        }
    }
}

/// Every setting of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub features: usize,
    pub data: DataConfig,
    pub qgan: QganSettings,
    pub gan: GanSettings,
    pub anomaly: AnomalyConfig,
    pub effdim: EffdimSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            features: 3,
            data: DataConfig::default(),
            qgan: QganSettings::default(),
            gan: GanSettings::default(),
            anomaly: AnomalyConfig::default(),
            effdim: EffdimSettings::default(),
        }
    }
}

/// Command-line overrides applied on top of a configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub features: Option<usize>,
    pub mode: Option<ModeKind>,
    pub shots: Option<u64>,
    pub epochs: Option<usize>,
    pub orientation: Option<ScoreOrientation>,
}

impl Overrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingArtifact(path.to_path_buf()));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// `--epochs` applies to both the quantum and the classical training.
    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(f) = o.features {
            self.features = f;
        }
        if let Some(m) = o.mode {
            self.qgan.mode = m;
        }
        if let Some(s) = o.shots {
            self.qgan.shots = s;
        }
        if let Some(e) = o.epochs {
            self.qgan.epochs = Some(e);
            self.gan.epochs = e;
        }
        if let Some(r) = o.orientation {
            self.anomaly.orientation = r;
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features == 0 || self.features > crate::data::N_FEATURES {
            return Err(Error::InvalidConfig(format!(
                "features must lie in 1..={}, got {}",
                crate::data::N_FEATURES,
                self.features
            )));
        }
        let d = &self.data;
        if d.n_train == 0 || d.n_test == 0 || d.classical_multiplier == 0 {
            return Err(Error::InvalidConfig("data sizes must be positive".into()));
        }
        if let DataSource::Synthetic { shift } = d.source {
            if !shift.is_finite() {
                return Err(Error::InvalidConfig(format!("shift {shift}")));
            }
        }
        self.qgan.train_config(self.features, self.seed).validate()?;
        self.gan.train_config(self.seed).validate()?;
        self.anomaly.validate()?;
        let e = &self.effdim;
        if e.features.iter().any(|&n| n == 0 || n > 12) || e.n_theta == 0 || e.seeds == 0 {
            return Err(Error::InvalidConfig("effdim: features in 1..=12, n_theta and seeds positive".into()));
        }
        Ok(())
    }
}
