//! Classical fully connected GAN baseline.

mod mlp;
mod model;
mod train;

pub use mlp::{sigmoid, Activation, Dense, LayerSpec, Mlp, Mode, Trace, LEAKY_SLOPE};
pub use model::{
    discriminator_gradient, gan_losses, generator_gradient, ClassicalGanModel, GanArchitecture,
    GanDiscObjective, LatentPrior, CLAMP,
};
pub use train::{train_gan, train_gan_with, GanTrainConfig, GanTraining};
