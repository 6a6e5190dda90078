use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::model::{
    discriminator_gradient, generator_gradient, generator_loss_for_gates, objective_for_gates,
    DiscriminatorObjective, PreparedState, QGanModel,
};
use crate::ansatz::{DiscriminatorSpec, GeneratorSpec};
use crate::error::{EpochLoss, Error, Result};
use crate::optim::{AmsgradConfig, AmsgradState};
use crate::rng::substream;
use crate::scalar::Real;
use crate::sim::{ExpectationMode, NoiseModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: AmsgradConfig,
    pub batch_size: usize,
    pub disc_steps_per_gen_step: usize,
    pub mode: ExpectationMode,
    pub seed: u64,
    #[serde(default)]
    pub objective: DiscriminatorObjective,
    /// Initial parameters are uniform in `[-init_range, init_range]`.
    #[serde(default = "default_init_range")]
    pub init_range: f64,
}

fn default_init_range() -> f64 {
    0.1
}

/// Discriminator steps per generator step: 5 up to four features, 10 beyond.
pub fn default_disc_ratio(n_features: usize) -> usize {
    if n_features <= 4 {
        5
    } else {
        10
    }
}

/// Ansatz depths `(k_G, k_D)` per feature count: (3, 2) at 3 features and
/// (9, 3) at 7, interpolated linearly in between and extrapolated beyond.
pub fn default_depths(n_features: usize) -> (usize, usize) {
    let k_g = match n_features {
        0..=3 => 3,
        n => 3 + (3 * (n - 3) + 1) / 2,
    };
    let k_d = if n_features <= 4 { 2 } else { 3 };
    (k_g, k_d)
}

pub fn default_specs(n_features: usize) -> (GeneratorSpec, DiscriminatorSpec) {
    let (k_g, k_d) = default_depths(n_features);
    (
        GeneratorSpec {
            n_qubits: n_features,
            depth: k_g,
        },
        DiscriminatorSpec {
            n_qubits: n_features,
            depth: k_d,
        },
    )
}

impl TrainConfig {
    /// Noiseless statevector training: 500 epochs, lr 1e-3, β = (0.7, 0.99), batches of 10.
    pub fn exact(n_features: usize, seed: u64) -> Self {
        Self {
            epochs: 500,
            optimizer: AmsgradConfig {
                learning_rate: 1e-3,
                beta1: 0.7,
                beta2: 0.99,
                epsilon: 1e-8,
            },
            batch_size: 10,
            disc_steps_per_gen_step: default_disc_ratio(n_features),
            mode: ExpectationMode::Exact,
            seed,
            objective: DiscriminatorObjective::Adversarial,
            init_range: default_init_range(),
        }
    }

    /// Shot-based training under noise: ten times fewer epochs, lr 1e-2.
    pub fn shots(n_features: usize, seed: u64, shots: u64, noise: NoiseModel) -> Self {
        let mut c = Self::exact(n_features, seed);
        c.epochs = 50;
        c.optimizer.learning_rate = 1e-2;
        c.mode = ExpectationMode::Shots { shots, noise };
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.disc_steps_per_gen_step == 0 {
            return Err(Error::InvalidConfig(
                "epochs, batch_size and disc_steps_per_gen_step must be at least 1".into(),
            ));
        }
        if let ExpectationMode::Shots { shots, noise } = &self.mode {
            if *shots == 0 {
                return Err(Error::InvalidConfig("shots must be at least 1".into()));
            }
            noise.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct QGanTraining<T> {
    pub model: QGanModel<T>,
    pub history: Vec<EpochLoss>,
}

/// Adversarial training on angle-encoded data.
///
/// Each epoch shuffles the data and splits it into batches. Per batch the
/// discriminator takes `disc_steps_per_gen_step` ascent steps, then the
/// generator one descent step, both with AMSGRAD on parameter-shift
/// gradients. The history stores per-epoch means of the two objectives,
/// evaluated after each batch.
pub fn train_qgan<T: Real>(
    generator: GeneratorSpec,
    discriminator: DiscriminatorSpec,
    config: &TrainConfig,
    data: &[Vec<T>],
) -> Result<QGanTraining<T>> {
    config.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if let Some(x) = data.iter().find(|x| x.len() != generator.n_qubits) {
        return Err(Error::DimensionMismatch {
            expected: generator.n_qubits,
            got: x.len(),
        });
    }
    let mut init_rng = substream(config.seed, "init");
    let mut model = QGanModel::random(generator, discriminator, config.init_range, &mut init_rng)?;
    let prepared: Vec<PreparedState<T>> = data.iter().map(|x| PreparedState::encoded(x)).collect();

    let mut shuffle_rng = substream(config.seed, "shuffle");
    let mut shot_rng = substream(config.seed, "shots");
    let mut opt_d = AmsgradState::new(model.theta_d.len());
    let mut opt_g = AmsgradState::new(model.theta_g.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mode = config.mode;
    let n = model.n_qubits();

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut gen_sum = 0.0;
        let mut disc_sum = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<PreparedState<T>> = chunk.iter().map(|&i| prepared[i].clone()).collect();
            let diverged = |e: Error| match e {
                Error::NonFiniteGradient(_) => Error::Divergence {
                    epoch,
                    history: history.clone(),
                },
                other => other,
            };
            for _ in 0..config.disc_steps_per_gen_step {
                let grad = discriminator_gradient(&model, &batch, &mode, config.objective, shot_rng.next_u64())
                    .map_err(diverged)?;
                let ascent: Vec<T> = grad.iter().map(|g| -*g).collect();
                opt_d
                    .step(&config.optimizer, &mut model.theta_d, &ascent)
                    .map_err(diverged)?;
            }
            let grad = generator_gradient(&model, &mode, shot_rng.next_u64()).map_err(diverged)?;
            opt_g
                .step(&config.optimizer, &mut model.theta_g, &grad)
                .map_err(diverged)?;

            let disc = model.discriminator_gates()?;
            let generated = model.generated()?;
            let d_obj = objective_for_gates(
                &disc,
                &batch,
                &generated,
                &mode,
                config.objective,
                shot_rng.next_u64(),
            )?;
            let g_loss =
                generator_loss_for_gates(n, generated.gates, &disc, &mode, shot_rng.next_u64())?;
            gen_sum += g_loss.as_f64();
            disc_sum += d_obj.as_f64();
            batches += 1;
        }
        let entry = EpochLoss {
            epoch,
            generator_loss: gen_sum / batches as f64,
            discriminator_objective: disc_sum / batches as f64,
        };
        let finite = entry.generator_loss.is_finite() && entry.discriminator_objective.is_finite();
        history.push(entry);
        if !finite {
            return Err(Error::Divergence { epoch, history });
        }
    }
    Ok(QGanTraining { model, history })
}
