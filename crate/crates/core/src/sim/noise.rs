use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::{Gate, Pauli};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stochastic Pauli noise: depolarizing errors after each gate plus classical readout flips.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    pub p_depol_1q: f64,
    pub p_depol_2q: f64,
    pub p_readout_flip: f64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p_depol_1q", self.p_depol_1q),
            ("p_depol_2q", self.p_depol_2q),
            ("p_readout_flip", self.p_readout_flip),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidProbability { name, value });
            }
        }
        Ok(())
    }

    fn gate_error_prob<T>(&self, gate: &Gate<T>) -> f64 {
        if gate.is_two_qubit() {
            self.p_depol_2q
        } else {
            self.p_depol_1q
        }
    }

    fn has_gate_noise(&self) -> bool {
        self.p_depol_1q > 0.0 || self.p_depol_2q > 0.0
    }
}

/// How expectation values are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ExpectationMode {
    /// Exact statevector expectation.
    Exact,
    /// Finite-shot estimate under a noise model.
    Shots { shots: u64, noise: NoiseModel },
}

impl ExpectationMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, ExpectationMode::Exact)
    }
}

/// Shot-sampled `⟨Z⟩` on the last qubit of `circuit(params)|0…0⟩`.
pub fn estimate_expectation_shots<T: Real, R: Rng + ?Sized>(
    circuit: &Circuit<T>,
    params: &[T],
    shots: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<T> {
    let gates = circuit.bind(params)?;
    sample_z_last(&gates, &StateVector::zero(circuit.n_qubits()), shots, noise, rng)
}

/// Shot-sampled `⟨Z⟩` on the last qubit after running `gates` on `initial`.
///
/// Every shot follows its own Pauli trajectory: after each gate, with the
/// gate's depolarizing probability, a uniformly random non-identity Pauli on
/// the gate's qubits is inserted. The measured bit of the last qubit is then
/// flipped with probability `p_readout_flip`.
///
/// Trajectories are drawn exactly but evaluated lazily: the error-free shots
/// share one ideal state, and erroneous trajectories restart from the cached
/// ideal prefix preceding their first error, with identical error patterns
/// simulated once.
pub fn sample_z_last<T: Real, R: Rng + ?Sized>(
    gates: &[Gate<T>],
    initial: &StateVector<T>,
    shots: u64,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<T> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shot count must be at least 1".into()));
    }
    noise.validate()?;
    for g in gates {
        g.validate(initial.n_qubits())?;
    }
    let flip = noise.p_readout_flip;
    let read_one = |p1: f64| (p1 * (1.0 - flip) + (1.0 - p1) * flip).clamp(0.0, 1.0);

    let ones = if !noise.has_gate_noise() {
        let mut s = initial.clone();
        for g in gates {
            s.apply_unchecked(g);
        }
        binomial(rng, shots, read_one(s.prob_last_one().as_f64()))
    } else {
        let sampler = TrajectorySampler::new(gates, initial, noise);
        let n_err = binomial(rng, shots, sampler.p_any_error());
        let mut ones = binomial(rng, shots - n_err, read_one(sampler.ideal_p1()));
        let mut cache: HashMap<Vec<(u32, u8)>, f64> = HashMap::new();
        let mut pattern = Vec::new();
        for _ in 0..n_err {
            sampler.draw_pattern(rng, &mut pattern);
            let p1 = match cache.get(&pattern) {
                Some(&p) => p,
                None => {
                    let p = sampler.simulate(&pattern);
                    cache.insert(pattern.clone(), p);
                    p
                }
            };
            if rng.gen_bool(read_one(p1)) {
                ones += 1;
            }
        }
        ones
    };
    let shots_f = shots as f64;
    Ok(T::lit((shots_f - 2.0 * ones as f64) / shots_f))
}

fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u64, p: f64) -> u64 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n, p).expect("valid binomial").sample(rng)
}

struct TrajectorySampler<'a, T> {
    gates: &'a [Gate<T>],
    /// `prefix[j]` = ideal state after the first `j` gates.
    prefix: Vec<StateVector<T>>,
    /// `hazard[j]` = Σ_{i<j} −ln(1 − p_i); infinite once a certain error occurs.
    hazard: Vec<f64>,
}

impl<'a, T: Real> TrajectorySampler<'a, T> {
    fn new(gates: &'a [Gate<T>], initial: &StateVector<T>, noise: &NoiseModel) -> Self {
        let mut prefix = Vec::with_capacity(gates.len() + 1);
        let mut s = initial.clone();
        prefix.push(s.clone());
        let mut hazard = Vec::with_capacity(gates.len() + 1);
        let mut acc = 0.0f64;
        hazard.push(acc);
        for g in gates {
            s.apply_unchecked(g);
            prefix.push(s.clone());
            let p = noise.gate_error_prob(g);
            acc += if p >= 1.0 { f64::INFINITY } else { -(-p).ln_1p() };
            hazard.push(acc);
        }
        Self {
            gates,
            prefix,
            hazard,
        }
    }

    fn total_hazard(&self) -> f64 {
        *self.hazard.last().unwrap()
    }

    fn p_any_error(&self) -> f64 {
        -(-self.total_hazard()).exp_m1()
    }

    fn ideal_p1(&self) -> f64 {
        self.prefix.last().unwrap().prob_last_one().as_f64()
    }

    /// First gate `m > after` (or from the start when `after` is `None`) whose
    /// cumulative hazard reaches `after`'s hazard plus `e`.
    fn locate(&self, start_hazard: f64, e: f64, from: usize) -> Option<usize> {
        let target = start_hazard + e;
        // hazard[m + 1] ≥ target, smallest m ≥ from
        let idx = self.hazard[from + 1..].partition_point(|&h| h < target);
        let m = from + idx;
        (m < self.gates.len()).then_some(m)
    }

    /// Error pattern of one shot, conditioned on at least one error.
    fn draw_pattern<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<(u32, u8)>) {
        out.clear();
        let total = self.total_hazard();
        let u: f64 = rng.gen();
        // Exp(1) truncated to [0, total)
        let e = if total.is_finite() {
            -(-u * -(-total).exp_m1()).ln_1p()
        } else {
            -(-u).ln_1p()
        };
        let mut k = self.locate(0.0, e, 0).unwrap_or(self.gates.len() - 1);
        loop {
            out.push((k as u32, self.draw_pauli(rng, k)));
            let e: f64 = -(-rng.gen::<f64>()).ln_1p();
            if k + 1 >= self.gates.len() {
                break;
            }
            match self.locate(self.hazard[k + 1], e, k + 1) {
                Some(m) => k = m,
                None => break,
            }
        }
    }

    fn draw_pauli<R: Rng + ?Sized>(&self, rng: &mut R, gate: usize) -> u8 {
        if self.gates[gate].is_two_qubit() {
            rng.gen_range(1..16)
        } else {
            rng.gen_range(1..4)
        }
    }

    fn simulate(&self, pattern: &[(u32, u8)]) -> f64 {
        let first = pattern[0].0 as usize;
        let mut s = self.prefix[first + 1].clone();
        let mut next = 0;
        for (j, g) in self.gates.iter().enumerate().skip(first) {
            if j > first {
                s.apply_unchecked(g);
            }
            while next < pattern.len() && pattern[next].0 as usize == j {
                let code = pattern[next].1;
                match g.qubits() {
                    (a, Some(b)) => {
                        s.apply_pauli(a, Pauli::from_index(code >> 2));
                        s.apply_pauli(b, Pauli::from_index(code & 3));
                    }
                    (a, None) => s.apply_pauli(a, Pauli::from_index(code)),
                }
                next += 1;
            }
        }
        s.prob_last_one().as_f64()
    }
}
