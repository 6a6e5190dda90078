use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_discriminator, build_generator, DiscriminatorSpec, GeneratorSpec};
use crate::error::{Error, Result};
use crate::rng::{child_seed, rng_from};
use crate::scalar::Real;
use crate::sim::{
    parameter_shift_gradient, sample_z_last, Circuit, ExpectationMode, Gate, StateVector,
};

/// Which sign convention the discriminator ascends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminatorObjective {
    /// `C_data − C_generated`: the discriminator labels data real and generated states fake.
    #[default]
    Adversarial,
    /// `C_generated − C_data`, the reversed sign.
    AsPrinted,
}

/// Input state to the discriminator, kept both as gates from `|0…0⟩` (for
/// shot sampling, so that state preparation is also subject to noise) and as
/// the resulting exact state.
#[derive(Debug, Clone)]
pub struct PreparedState<T> {
    pub gates: Vec<Gate<T>>,
    pub state: StateVector<T>,
}

impl<T: Real> PreparedState<T> {
    pub fn from_gates(n_qubits: usize, gates: Vec<Gate<T>>) -> Result<Self> {
        let mut state = StateVector::zero(n_qubits);
        state.apply_all(&gates)?;
        Ok(Self { gates, state })
    }

    /// Angle-encoded data point `⊗ RY(x_i)|0⟩`.
    pub fn encoded(angles: &[T]) -> Self {
        Self {
            gates: angles.iter().enumerate().map(|(q, &a)| Gate::Ry(q, a)).collect(),
            state: StateVector::product_ry(angles),
        }
    }
}

/// `⟨Z⟩` on the last qubit after `disc` acts on `input`.
pub fn disc_expectation<T: Real>(
    input: &PreparedState<T>,
    disc: &[Gate<T>],
    mode: &ExpectationMode,
    seed: u64,
) -> Result<T> {
    match mode {
        ExpectationMode::Exact => {
            let mut s = input.state.clone();
            s.apply_all(disc)?;
            Ok(s.expectation_z_last())
        }
        ExpectationMode::Shots { shots, noise } => {
            let mut chain = Vec::with_capacity(input.gates.len() + disc.len());
            chain.extend_from_slice(&input.gates);
            chain.extend_from_slice(disc);
            let n = input.state.n_qubits();
            sample_z_last(&chain, &StateVector::zero(n), *shots, noise, &mut rng_from(seed))
        }
    }
}

/// Probability that the discriminator labels the state real (the `−1` outcome).
#[inline]
pub fn label_real_prob<T: Real>(z: T) -> T {
    (T::one() - z) * T::half()
}

/// Quantum generator and discriminator with their parameters.
#[derive(Debug, Clone)]
pub struct QGanModel<T> {
    pub generator_spec: GeneratorSpec,
    pub discriminator_spec: DiscriminatorSpec,
    pub generator: Circuit<T>,
    pub discriminator: Circuit<T>,
    pub theta_g: Vec<T>,
    pub theta_d: Vec<T>,
}

/// Serializable form of [`QGanModel`]: circuits are rebuilt from the specs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QGanParams<T> {
    pub generator_spec: GeneratorSpec,
    pub discriminator_spec: DiscriminatorSpec,
    pub theta_g: Vec<T>,
    pub theta_d: Vec<T>,
}

impl<T: Real> QGanModel<T> {
    pub fn new(
        generator_spec: GeneratorSpec,
        discriminator_spec: DiscriminatorSpec,
        theta_g: Vec<T>,
        theta_d: Vec<T>,
    ) -> Result<Self> {
        if generator_spec.n_qubits != discriminator_spec.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: generator_spec.n_qubits,
                got: discriminator_spec.n_qubits,
            });
        }
        let generator = build_generator(generator_spec)?;
        let discriminator = build_discriminator(discriminator_spec)?;
        for (circuit, params) in [(&generator, &theta_g), (&discriminator, &theta_d)] {
            if circuit.n_params() != params.len() {
                return Err(Error::ParameterCount {
                    expected: circuit.n_params(),
                    got: params.len(),
                });
            }
        }
        Ok(Self {
            generator_spec,
            discriminator_spec,
            generator,
            discriminator,
            theta_g,
            theta_d,
        })
    }

    /// Parameters drawn uniformly from `[-range, range]`.
    pub fn random<R: Rng + ?Sized>(
        generator_spec: GeneratorSpec,
        discriminator_spec: DiscriminatorSpec,
        range: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut draw = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| T::lit(rng.gen_range(-range..=range)))
                .collect()
        };
        let g = draw(generator_spec.n_params());
        let d = draw(discriminator_spec.n_params());
        Self::new(generator_spec, discriminator_spec, g, d)
    }

    pub fn from_params(p: QGanParams<T>) -> Result<Self> {
        Self::new(p.generator_spec, p.discriminator_spec, p.theta_g, p.theta_d)
    }

    pub fn params(&self) -> QGanParams<T> {
        QGanParams {
            generator_spec: self.generator_spec,
            discriminator_spec: self.discriminator_spec,
            theta_g: self.theta_g.clone(),
            theta_d: self.theta_d.clone(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.generator_spec.n_qubits
    }

    pub fn generator_gates(&self) -> Result<Vec<Gate<T>>> {
        self.generator.bind(&self.theta_g)
    }

    pub fn discriminator_gates(&self) -> Result<Vec<Gate<T>>> {
        self.discriminator.bind(&self.theta_d)
    }

    pub fn generated(&self) -> Result<PreparedState<T>> {
        PreparedState::from_gates(self.n_qubits(), self.generator_gates()?)
    }

    /// `|G⟩ = G(θ_G)|0…0⟩`.
    pub fn generator_state(&self) -> Result<StateVector<T>> {
        Ok(self.generated()?.state)
    }

    /// Exact `⟨Z⟩_{D|ψ⟩}`.
    pub fn disc_z(&self, state: &StateVector<T>) -> Result<T> {
        let mut s = state.clone();
        s.apply_all(&self.discriminator_gates()?)?;
        Ok(s.expectation_z_last())
    }

    /// `C^generated = 1/2 − 1/2 ⟨G|D† Ô D|G⟩`.
    pub fn c_generated(&self) -> Result<T> {
        Ok(label_real_prob(self.disc_z(&self.generator_state()?)?))
    }

    /// `C^data = 1/2 − 1/(2M) Σ ⟨x_i|D† Ô D|x_i⟩`.
    pub fn c_data(&self, batch: &[StateVector<T>]) -> Result<T> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let d = self.discriminator_gates()?;
        let mut acc = T::zero();
        for x in batch {
            let mut s = x.clone();
            s.apply_all(&d)?;
            acc += label_real_prob(s.expectation_z_last());
        }
        Ok(acc / T::from_usize(batch.len()).unwrap())
    }

    /// `C_G = −C^generated`, minimized over `θ_G`.
    pub fn generator_loss(&self) -> Result<T> {
        Ok(-self.c_generated()?)
    }

    /// Objective maximized over `θ_D`.
    pub fn discriminator_objective(
        &self,
        batch: &[StateVector<T>],
        objective: DiscriminatorObjective,
    ) -> Result<T> {
        let diff = self.c_data(batch)? - self.c_generated()?;
        Ok(match objective {
            DiscriminatorObjective::Adversarial => diff,
            DiscriminatorObjective::AsPrinted => -diff,
        })
    }
}

/// Discriminator objective for bound discriminator gates, under `mode`.
///
/// Seeds for shot sampling are `child_seed(seed, i)` for data sample `i` and
/// `child_seed(seed, M)` for the generated state.
pub fn objective_for_gates<T: Real>(
    disc: &[Gate<T>],
    batch: &[PreparedState<T>],
    generated: &PreparedState<T>,
    mode: &ExpectationMode,
    objective: DiscriminatorObjective,
    seed: u64,
) -> Result<T> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut data = T::zero();
    for (i, x) in batch.iter().enumerate() {
        data += label_real_prob(disc_expectation(x, disc, mode, child_seed(seed, i as u64))?);
    }
    data /= T::from_usize(batch.len()).unwrap();
    let gen = label_real_prob(disc_expectation(
        generated,
        disc,
        mode,
        child_seed(seed, batch.len() as u64),
    )?);
    Ok(match objective {
        DiscriminatorObjective::Adversarial => data - gen,
        DiscriminatorObjective::AsPrinted => gen - data,
    })
}

/// Generator loss `−C^generated` for bound generator gates.
pub fn generator_loss_for_gates<T: Real>(
    n_qubits: usize,
    gen: Vec<Gate<T>>,
    disc: &[Gate<T>],
    mode: &ExpectationMode,
    seed: u64,
) -> Result<T> {
    let prepared = PreparedState::from_gates(n_qubits, gen)?;
    Ok(-label_real_prob(disc_expectation(&prepared, disc, mode, seed)?))
}

/// Gradient of the discriminator objective with respect to `θ_D`.
pub fn discriminator_gradient<T: Real>(
    model: &QGanModel<T>,
    batch: &[PreparedState<T>],
    mode: &ExpectationMode,
    objective: DiscriminatorObjective,
    seed: u64,
) -> Result<Vec<T>> {
    let generated = model.generated()?;
    parameter_shift_gradient(&model.discriminator, &model.theta_d, |disc, k| {
        objective_for_gates(disc, batch, &generated, mode, objective, child_seed(seed, k as u64))
    })
}

/// Gradient of `C_G` with respect to `θ_G`.
pub fn generator_gradient<T: Real>(
    model: &QGanModel<T>,
    mode: &ExpectationMode,
    seed: u64,
) -> Result<Vec<T>> {
    let disc = model.discriminator_gates()?;
    let n = model.n_qubits();
    parameter_shift_gradient(&model.generator, &model.theta_g, |gen, k| {
        generator_loss_for_gates(n, gen.to_vec(), &disc, mode, child_seed(seed, k as u64))
    })
}
