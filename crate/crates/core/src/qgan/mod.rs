//! Quantum GAN: circuit model, objectives, parameter-shift gradients and training.

mod model;
mod train;

pub use model::{
    disc_expectation, discriminator_gradient, generator_gradient, generator_loss_for_gates,
    label_real_prob, objective_for_gates, DiscriminatorObjective, PreparedState, QGanModel,
    QGanParams,
};
pub use train::{
    default_depths, default_disc_ratio, default_specs, train_qgan, QGanTraining, TrainConfig,
};
