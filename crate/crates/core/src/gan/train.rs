use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::Mode;
use super::model::{
    discriminator_gradient, gan_losses, generator_gradient, ClassicalGanModel, GanArchitecture,
    GanDiscObjective,
};
use crate::error::{EpochLoss, Error, Result};
use crate::optim::{AmsgradConfig, AmsgradState};
use crate::rng::substream;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanTrainConfig {
    pub epochs: usize,
    pub optimizer: AmsgradConfig,
    pub batch_size: usize,
    pub disc_steps_per_gen_step: usize,
    pub seed: u64,
    pub hidden: usize,
    #[serde(default)]
    pub objective: GanDiscObjective,
}

impl GanTrainConfig {
    pub fn standard(seed: u64) -> Self {
        Self {
            epochs: 100,
            optimizer: AmsgradConfig {
                learning_rate: 1e-3,
                beta1: 0.7,
                beta2: 0.99,
                epsilon: 1e-8,
            },
            batch_size: 10,
            disc_steps_per_gen_step: 1,
            seed,
            hidden: 8,
            objective: GanDiscObjective::Minimize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.disc_steps_per_gen_step == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig(
                "epochs, batch_size, disc_steps_per_gen_step and hidden must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GanTraining<T> {
    pub model: ClassicalGanModel<T>,
    pub history: Vec<EpochLoss>,
}

/// Alternating AMSGRAD updates on `C_D` and `C_G`, with the standard
/// architecture of width `config.hidden`.
pub fn train_gan<T: Real>(config: &GanTrainConfig, data: &[Vec<T>]) -> Result<GanTraining<T>> {
    let d = data.first().ok_or(Error::EmptyBatch)?.len();
    train_gan_with(config, &GanArchitecture::standard(d, config.hidden), data)
}

pub fn train_gan_with<T: Real>(
    config: &GanTrainConfig,
    arch: &GanArchitecture,
    data: &[Vec<T>],
) -> Result<GanTraining<T>> {
    config.validate()?;
    let d = data.first().ok_or(Error::EmptyBatch)?.len();
    if let Some(x) = data.iter().find(|x| x.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: x.len() });
    }
    let mut model = ClassicalGanModel::new(d, arch, &mut substream(config.seed, "init"))?;
    model.seed = Some(config.seed);
    let mut shuffle_rng = substream(config.seed, "shuffle");
    let mut noise_rng = substream(config.seed, "noise");
    let mut dropout_rng = substream(config.seed, "dropout");
    let mut opt_d = AmsgradState::new(model.discriminator.n_params());
    let mut opt_g = AmsgradState::new(model.generator.n_params());
    let mut theta_d = model.discriminator.params();
    let mut theta_g = model.generator.params();
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut shuffle_rng);
        let (mut g_sum, mut d_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Vec<T>> = chunk.iter().map(|&i| data[i].clone()).collect();
            let diverged = |e: Error| match e {
                Error::NonFiniteGradient(_) => Error::Divergence { epoch, history: history.clone() },
                other => other,
            };
            for _ in 0..config.disc_steps_per_gen_step {
                let noise = model.sample_latents(batch.len(), &mut noise_rng);
                let (_, mut g) =
                    discriminator_gradient(&model, &batch, &noise, Mode::Train, &mut dropout_rng)?;
                if config.objective == GanDiscObjective::Ascend {
                    g.iter_mut().for_each(|v| *v = -*v);
                }
                opt_d.step(&config.optimizer, &mut theta_d, &g).map_err(diverged)?;
                model.discriminator.set_params(&theta_d)?;
            }
            let noise = model.sample_latents(batch.len(), &mut noise_rng);
            let (_, g) = generator_gradient(&model, &noise, Mode::Train, &mut dropout_rng)?;
            opt_g.step(&config.optimizer, &mut theta_g, &g).map_err(diverged)?;
            model.generator.set_params(&theta_g)?;

            let (c_g, c_d) = gan_losses(&model, &batch, &noise)?;
            g_sum += c_g.as_f64();
            d_sum += c_d.as_f64();
            batches += 1;
        }
        let entry = EpochLoss {
            epoch,
            generator_loss: g_sum / batches as f64,
            discriminator_objective: d_sum / batches as f64,
        };
        let finite = entry.generator_loss.is_finite() && entry.discriminator_objective.is_finite();
        history.push(entry);
        if !finite {
            return Err(Error::Divergence { epoch, history });
        }
    }
    Ok(GanTraining { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn learns_gaussian_mean() {
        let mut r = rng_from(21);
        let data: Vec<Vec<f64>> = (0..500)
            .map(|_| vec![1.5 + 0.5 * r.sample::<f64, _>(StandardNormal)])
            .collect();
        let t = train_gan(&GanTrainConfig::standard(1), &data).unwrap();
        assert!(t.history.iter().all(|h| h.generator_loss.is_finite() && h.discriminator_objective.is_finite()));
        let mut zr = rng_from(1);
        let n = 2000;
        let mean = (0..n)
            .map(|_| t.model.generate(&t.model.sample_latent(&mut zr)).unwrap()[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.5).abs() < 0.2, "generated mean {mean}");
    }

    #[test]
    fn seeded_runs_match() {
        let data: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64 / 30.0, 0.5]).collect();
        let mut config = GanTrainConfig::standard(9);
        config.epochs = 3;
        let a = train_gan(&config, &data).unwrap();
        let b = train_gan(&config, &data).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn rejects_empty_data() {
        assert!(matches!(
            train_gan::<f64>(&GanTrainConfig::standard(0), &[]),
            Err(Error::EmptyBatch)
        ));
    }
}
