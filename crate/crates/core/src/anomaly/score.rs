use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::EncodedEvent;
use crate::error::{Error, Result};
use crate::gan::ClassicalGanModel;
use crate::qgan::{disc_expectation, PreparedState, QGanModel};
use crate::rng::{child_seed, rng_from};
use crate::scalar::Real;
use crate::sim::{ExpectationMode, Gate, StateVector};

/// How a score is compared with the threshold `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreOrientation {
    /// Anomalous iff `S > δ`.
    #[default]
    AsWritten,
    /// Anomalous iff `S < δ`.
    Inverted,
}

impl ScoreOrientation {
    pub fn direction(self) -> crate::metrics::Direction {
        match self {
            ScoreOrientation::AsWritten => crate::metrics::Direction::HigherIsPositive,
            ScoreOrientation::Inverted => crate::metrics::Direction::LowerIsPositive,
        }
    }
}

impl std::str::FromStr for ScoreOrientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(Self::AsWritten),
            "inverted" => Ok(Self::Inverted),
            other => Err(Error::InvalidConfig(format!("unknown score orientation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Anomalous,
    Normal,
}

pub fn label_event<T: Real>(score: T, delta: T, orientation: ScoreOrientation) -> Decision {
    let anomalous = match orientation {
        ScoreOrientation::AsWritten => score > delta,
        ScoreOrientation::Inverted => score < delta,
    };
    if anomalous {
        Decision::Anomalous
    } else {
        Decision::Normal
    }
}

/// The two α-independent ingredients of the quantum score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumTerms<T> {
    /// `|⟨x|G⟩|²`.
    pub fidelity: T,
    /// `(1 + ⟨Z⟩_{D|x⟩} ⟨Z⟩_{D|G⟩}) / 2`.
    pub agreement: T,
}

impl<T: Real> QuantumTerms<T> {
    /// `(1 − α)·fidelity + α·agreement`.
    pub fn score(&self, alpha: T) -> T {
        (T::one() - alpha) * self.fidelity + alpha * self.agreement
    }
}

/// Scores events against a trained quantum model. The generator state and
/// its discriminator expectation are computed once.
#[derive(Debug, Clone)]
pub struct QuantumScorer<T> {
    generated: StateVector<T>,
    disc: Vec<Gate<T>>,
    z_generated: T,
    mode: ExpectationMode,
    seed: u64,
}

impl<T: Real> QuantumScorer<T> {
    pub fn exact(model: &QGanModel<T>) -> Result<Self> {
        Self::new(model, ExpectationMode::Exact, 0)
    }

    /// In shot mode the discriminator expectations are sampled with the
    /// configured noise and the fidelity is a binomial estimate over the
    /// same number of shots.
    pub fn new(model: &QGanModel<T>, mode: ExpectationMode, seed: u64) -> Result<Self> {
        let disc = model.discriminator_gates()?;
        let generated = model.generated()?;
        let z_generated = disc_expectation(&generated, &disc, &mode, child_seed(seed, u64::MAX))?;
        Ok(Self {
            generated: generated.state,
            disc,
            z_generated,
            mode,
            seed,
        })
    }

    pub fn z_generated(&self) -> T {
        self.z_generated
    }

    /// Terms for event number `index` (the index only seeds shot sampling).
    pub fn terms(&self, x: &EncodedEvent, index: u64) -> Result<QuantumTerms<T>> {
        let n = self.generated.n_qubits();
        if x.angles.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.angles.len() });
        }
        let input = PreparedState::encoded(&x.angles_as::<T>());
        let seed = child_seed(self.seed, index);
        let mut fidelity = input.state.fidelity(&self.generated)?;
        if let ExpectationMode::Shots { shots, .. } = self.mode {
            let p = fidelity.as_f64().clamp(0.0, 1.0);
            let hits = rand_distr::Binomial::new(shots, p)
                .map_err(|_| Error::InvalidProbability { name: "fidelity", value: p })?;
            let k = rng_from(child_seed(seed, 1)).sample(hits);
            fidelity = T::lit(k as f64 / shots as f64);
        }
        let z_x = disc_expectation(&input, &self.disc, &self.mode, seed)?;
        Ok(QuantumTerms {
            fidelity,
            agreement: (T::one() + z_x * self.z_generated) * T::half(),
        })
    }
}

/// `S_Q(x; α)` by exact statevector evaluation.
pub fn quantum_score<T: Real>(x: &EncodedEvent, model: &QGanModel<T>, alpha: T) -> Result<T> {
    Ok(QuantumScorer::exact(model)?.terms(x, 0)?.score(alpha))
}

/// Inner minimization over the latent input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClassicalScoreSettings {
    pub restarts: usize,
    pub iterations: usize,
    pub step_size: f64,
}

impl Default for ClassicalScoreSettings {
    fn default() -> Self {
        Self {
            restarts: 5,
            iterations: 100,
            step_size: 1e-2,
        }
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt()
}

/// `L_C(z) = (1 − α)‖x − G(z)‖ + α|D(x) − D(G(z))|` and its gradient in `z`.
pub fn classical_loss<T: Real>(
    model: &ClassicalGanModel<T>,
    x: &[T],
    d_x: T,
    z: &[T],
    alpha: T,
) -> Result<(T, Vec<T>)> {
    use crate::gan::Mode;
    // evaluation mode: the rng is never drawn from
    let mut unused = rng_from(0);
    let g_trace = model.generator.forward_trace(z, Mode::Eval, &mut unused)?;
    let d_trace = model.discriminator.forward_trace(&g_trace.output, Mode::Eval, &mut unused)?;
    let residual: Vec<T> = x.iter().zip(&g_trace.output).map(|(a, b)| *a - *b).collect();
    let r = norm(&residual);
    let s = d_x - d_trace.output[0];
    let w = T::one() - alpha;
    let loss = w * r + alpha * s.abs();

    let mut grad_out: Vec<T> = if r > T::zero() {
        residual.iter().map(|v| -w * *v / r).collect()
    } else {
        vec![T::zero(); residual.len()]
    };
    if alpha > T::zero() && s != T::zero() {
        let (_, dx) = model.discriminator.backward(&d_trace, &[-alpha * s.signum()])?;
        for (a, b) in grad_out.iter_mut().zip(&dx) {
            *a += *b;
        }
    }
    let (_, dz) = model.generator.backward(&g_trace, &grad_out)?;
    Ok((loss, dz))
}

/// `S_C(x; α) ≈ min_z L_C(z)`: gradient descent from `restarts` prior
/// draws, returning the smallest value seen.
pub fn classical_score<T: Real, R: Rng + ?Sized>(
    x: &[T],
    model: &ClassicalGanModel<T>,
    alpha: T,
    settings: &ClassicalScoreSettings,
    rng: &mut R,
) -> Result<T> {
    if x.len() != model.data_dim() {
        return Err(Error::DimensionMismatch { expected: model.data_dim(), got: x.len() });
    }
    if settings.restarts == 0 {
        return Err(Error::InvalidConfig("at least one restart is required".into()));
    }
    let d_x = model.discriminate(x)?;
    let step = T::lit(settings.step_size);
    let mut best = T::infinity();
    for _ in 0..settings.restarts {
        let mut z = model.sample_latent(rng);
        for it in 0..=settings.iterations {
            let (loss, g) = classical_loss(model, x, d_x, &z, alpha)?;
            if loss < best {
                best = loss;
            }
            if it == settings.iterations {
                break;
            }
            for (zi, gi) in z.iter_mut().zip(&g) {
                *zi -= step * *gi;
            }
        }
    }
    Ok(best)
}
