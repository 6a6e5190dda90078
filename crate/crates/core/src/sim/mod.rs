//! Statevector simulation: gates, circuits, exact and shot-sampled expectations,
//! and parameter-shift gradients.

mod circuit;
mod gate;
mod gradient;
mod noise;
mod state;

pub use circuit::{run_circuit, Circuit};
pub use gate::{Angle, Gate, Pauli};
pub use gradient::{finite_difference_gradient, parameter_shift_gradient};
pub use noise::{estimate_expectation_shots, sample_z_last, ExpectationMode, NoiseModel};
pub use state::{apply_gate, fidelity, StateVector};
