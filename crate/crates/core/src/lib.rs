//! Anomaly detection with quantum and classical generative adversarial networks.
//!
//! The numerical core ([`sim`], [`ansatz`], [`optim`], [`qgan`], [`gan`],
//! [`metrics`], [`effdim`]) is generic over the scalar type through [`Real`];
//! the aliases below fix it to `f64` (and `f32` for the simulator).

pub mod ansatz;
pub mod anomaly;
pub mod data;
pub mod effdim;
pub mod error;
pub mod experiment;
pub mod gan;
pub mod metrics;
pub mod optim;
pub mod qgan;
pub mod rng;
pub mod scalar;
pub mod sim;

pub use error::{EpochLoss, Error, Result};
pub use scalar::Real;

pub type StateVector = sim::StateVector<f64>;
pub type StateVectorF32 = sim::StateVector<f32>;
pub type Circuit = sim::Circuit<f64>;
pub type CircuitF32 = sim::Circuit<f32>;
pub type Gate = sim::Gate<f64>;
pub type QGanModel = qgan::QGanModel<f64>;
pub type Mlp = gan::Mlp<f64>;
pub type ClassicalGanModel = gan::ClassicalGanModel<f64>;
pub type AmsgradState = optim::AmsgradState<f64>;
