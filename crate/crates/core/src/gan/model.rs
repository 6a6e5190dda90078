use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, LayerSpec, Mlp, Mode};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Discriminator outputs are clamped to `[CLAMP, 1 − CLAMP]` before logs.
pub const CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentPrior {
    #[default]
    StandardNormal,
}

/// Direction of the discriminator update on `C_D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GanDiscObjective {
    /// Descend `C_D`, driving `D(x) → 1` and `D(G(z)) → 0`.
    #[default]
    Minimize,
    /// Ascend `C_D`.
    Ascend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GanArchitecture {
    pub generator: Vec<LayerSpec>,
    pub discriminator: Vec<LayerSpec>,
}

impl GanArchitecture {
    /// Generator `d → hidden → d` (LeakyReLU hidden, linear out);
    /// discriminator `d → hidden → 1` (LeakyReLU and dropout 0.25 hidden,
    /// sigmoid out).
    pub fn standard(d: usize, hidden: usize) -> Self {
        Self {
            generator: vec![
                LayerSpec { n_out: hidden, activation: Activation::LeakyRelu, dropout: None },
                LayerSpec { n_out: d, activation: Activation::Identity, dropout: None },
            ],
            discriminator: vec![
                LayerSpec { n_out: hidden, activation: Activation::LeakyRelu, dropout: Some(0.25) },
                LayerSpec { n_out: 1, activation: Activation::Sigmoid, dropout: None },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalGanModel<T> {
    pub generator: Mlp<T>,
    pub discriminator: Mlp<T>,
    pub z_dim: usize,
    #[serde(default)]
    pub prior: LatentPrior,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl<T: Real> ClassicalGanModel<T> {
    pub fn new<R: Rng + ?Sized>(d: usize, arch: &GanArchitecture, rng: &mut R) -> Result<Self> {
        let generator = Mlp::new(d, &arch.generator, rng)?;
        let discriminator = Mlp::new(d, &arch.discriminator, rng)?;
        Self::from_parts(generator, discriminator, d)
    }

    pub fn from_parts(generator: Mlp<T>, discriminator: Mlp<T>, z_dim: usize) -> Result<Self> {
        if generator.n_in() != z_dim {
            return Err(Error::DimensionMismatch { expected: z_dim, got: generator.n_in() });
        }
        if discriminator.n_in() != generator.n_out() {
            return Err(Error::DimensionMismatch {
                expected: generator.n_out(),
                got: discriminator.n_in(),
            });
        }
        let last = discriminator.layers.last().unwrap();
        if last.n_out != 1 || last.activation != Activation::Sigmoid {
            return Err(Error::InvalidConfig(
                "discriminator must end in a single sigmoid unit".into(),
            ));
        }
        Ok(Self {
            generator,
            discriminator,
            z_dim,
            prior: LatentPrior::StandardNormal,
            seed: None,
        })
    }

    pub fn data_dim(&self) -> usize {
        self.generator.n_out()
    }

    pub fn sample_latent<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.z_dim)
            .map(|_| T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect()
    }

    pub fn sample_latents<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<T>> {
        (0..n).map(|_| self.sample_latent(rng)).collect()
    }

    /// `G(z)` in evaluation mode.
    pub fn generate(&self, z: &[T]) -> Result<Vec<T>> {
        self.generator.eval(z)
    }

    /// `D(x)` in evaluation mode.
    pub fn discriminate(&self, x: &[T]) -> Result<T> {
        Ok(self.discriminator.eval(x)?[0])
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s)?;
        let mut checked = Self::from_parts(m.generator, m.discriminator, m.z_dim)?;
        checked.prior = m.prior;
        checked.seed = m.seed;
        Ok(checked)
    }
}

fn clamp<T: Real>(p: T) -> (T, bool) {
    let lo = T::lit(CLAMP);
    let hi = T::one() - lo;
    if p < lo {
        (lo, false)
    } else if p > hi {
        (hi, false)
    } else {
        (p, true)
    }
}

fn check_batches<T>(data: &[Vec<T>], noise: &[Vec<T>]) -> Result<()> {
    if data.is_empty() || noise.is_empty() {
        return Err(Error::EmptyBatch);
    }
    Ok(())
}

/// `(C_G, C_D)` with both networks in evaluation mode:
/// `C_G = −½ E log D(G(z))`, `C_D = −½ E log(1 − D(G(z))) − ½ E log D(x)`.
pub fn gan_losses<T: Real>(model: &ClassicalGanModel<T>, data: &[Vec<T>], noise: &[Vec<T>]) -> Result<(T, T)> {
    check_batches(data, noise)?;
    let half = T::half();
    let mut c_g = T::zero();
    let mut fake = T::zero();
    for z in noise {
        let p = clamp(model.discriminate(&model.generate(z)?)?).0;
        c_g -= p.ln();
        fake -= (T::one() - p).ln();
    }
    let mut real = T::zero();
    for x in data {
        real -= clamp(model.discriminate(x)?).0.ln();
    }
    let nz = T::from_usize(noise.len()).unwrap();
    let nx = T::from_usize(data.len()).unwrap();
    Ok((half * c_g / nz, half * (fake / nz + real / nx)))
}

/// `C_D` and its gradient with respect to the discriminator parameters.
/// Dropout masks come from `rng` when `mode` is [`Mode::Train`].
pub fn discriminator_gradient<T: Real, R: Rng + ?Sized>(
    model: &ClassicalGanModel<T>,
    data: &[Vec<T>],
    noise: &[Vec<T>],
    mode: Mode,
    rng: &mut R,
) -> Result<(T, Vec<T>)> {
    check_batches(data, noise)?;
    let d = &model.discriminator;
    let half = T::half();
    let nz = T::from_usize(noise.len()).unwrap();
    let nx = T::from_usize(data.len()).unwrap();
    let mut grad = vec![T::zero(); d.n_params()];
    let mut loss = T::zero();
    let mut accumulate = |input: &[T], real: bool, rng: &mut R| -> Result<()> {
        let trace = d.forward_trace(input, mode, rng)?;
        let (p, live) = clamp(trace.output[0]);
        let (value, slope) = if real {
            (-half * p.ln() / nx, -half / (nx * p))
        } else {
            (-half * (T::one() - p).ln() / nz, half / (nz * (T::one() - p)))
        };
        loss += value;
        if live {
            let (g, _) = d.backward(&trace, &[slope])?;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += *b;
            }
        }
        Ok(())
    };
    for z in noise {
        accumulate(&model.generate(z)?, false, rng)?;
    }
    for x in data {
        accumulate(x, true, rng)?;
    }
    Ok((loss, grad))
}

/// `C_G` and its gradient with respect to the generator parameters.
pub fn generator_gradient<T: Real, R: Rng + ?Sized>(
    model: &ClassicalGanModel<T>,
    noise: &[Vec<T>],
    mode: Mode,
    rng: &mut R,
) -> Result<(T, Vec<T>)> {
    if noise.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let half = T::half();
    let nz = T::from_usize(noise.len()).unwrap();
    let mut grad = vec![T::zero(); model.generator.n_params()];
    let mut loss = T::zero();
    for z in noise {
        let g_trace = model.generator.forward_trace(z, mode, rng)?;
        let d_trace = model.discriminator.forward_trace(&g_trace.output, mode, rng)?;
        let (p, live) = clamp(d_trace.output[0]);
        loss -= half * p.ln() / nz;
        if live {
            let (_, dx) = model.discriminator.backward(&d_trace, &[-half / (nz * p)])?;
            let (g, _) = model.generator.backward(&g_trace, &dx)?;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += *b;
            }
        }
    }
    Ok((loss, grad))
}
