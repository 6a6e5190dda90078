use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, Pauli};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pure state of an `n`-qubit register.
///
/// Basis ordering: qubit 0 is the most significant bit of the basis index, so
/// the last qubit (`n - 1`) is the least significant bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        assert!(n_qubits >= 1, "register needs at least one qubit");
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index {index} out of range");
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self {
            n_qubits,
            amplitudes,
        }
    }

    /// Wraps raw amplitudes; the length must be `2^n_qubits` and the norm 1 within `1e-6`.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if n_qubits == 0 || amplitudes.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: 1usize << n_qubits,
                got: amplitudes.len(),
            });
        }
        let s = Self {
            n_qubits,
            amplitudes,
        };
        let norm = s.norm_sqr().as_f64();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "state norm {norm} is not 1"
            )));
        }
        Ok(s)
    }

    /// Product state `⊗_i RY(angles[i])|0⟩`, built directly from the per-qubit amplitudes.
    pub fn product_ry(angles: &[T]) -> Self {
        let n = angles.len();
        assert!(n >= 1, "register needs at least one qubit");
        let mut amps = vec![T::one()];
        for &a in angles {
            let (s, c) = (a * T::half()).sin_cos();
            let mut next = Vec::with_capacity(amps.len() * 2);
            for &x in &amps {
                next.push(x * c);
                next.push(x * s);
            }
            amps = next;
        }
        Self {
            n_qubits: n,
            amplitudes: amps
                .into_iter()
                .map(|r| Complex::new(r, T::zero()))
                .collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    /// Applies a concrete gate in place.
    pub fn apply(&mut self, gate: &Gate<T>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    /// Consuming form of [`apply`](Self::apply).
    pub fn applied(mut self, gate: &Gate<T>) -> Result<Self> {
        self.apply(gate)?;
        Ok(self)
    }

    pub fn apply_all(&mut self, gates: &[Gate<T>]) -> Result<()> {
        for g in gates {
            g.validate(self.n_qubits)?;
        }
        for g in gates {
            self.apply_unchecked(g);
        }
        Ok(())
    }

    /// Applies a gate whose qubit indices have already been validated.
    pub(crate) fn apply_unchecked(&mut self, gate: &Gate<T>) {
        match *gate {
            Gate::H(q) => {
                let r = T::FRAC_1_SQRT_2();
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = (x + y) * r;
                    *b = (x - y) * r;
                });
            }
            Gate::Ry(q, theta) => {
                let (s, c) = (theta * T::half()).sin_cos();
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c - y * s;
                    *b = x * s + y * c;
                });
            }
            Gate::Rx(q, theta) => {
                let (s, c) = (theta * T::half()).sin_cos();
                let mis = Complex::new(T::zero(), -s);
                self.for_pairs(q, |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * c + y * mis;
                    *b = x * mis + y * c;
                });
            }
            Gate::Rz(q, theta) => {
                let (s, c) = (theta * T::half()).sin_cos();
                let p0 = Complex::new(c, -s);
                let p1 = Complex::new(c, s);
                self.for_pairs(q, |a, b| {
                    *a = *a * p0;
                    *b = *b * p1;
                });
            }
            Gate::Cz(qa, qb) => {
                let both = self.mask(qa) | self.mask(qb);
                for (i, amp) in self.amplitudes.iter_mut().enumerate() {
                    if i & both == both {
                        *amp = -*amp;
                    }
                }
            }
            Gate::Cnot { control, target } => {
                let cm = self.mask(control);
                let tm = self.mask(target);
                for i in 0..self.amplitudes.len() {
                    if i & cm != 0 && i & tm == 0 {
                        self.amplitudes.swap(i, i | tm);
                    }
                }
            }
        }
    }

    pub(crate) fn apply_pauli(&mut self, qubit: usize, pauli: Pauli) {
        match pauli {
            Pauli::I => {}
            Pauli::X => self.for_pairs(qubit, |a, b| std::mem::swap(a, b)),
            Pauli::Z => self.for_pairs(qubit, |_, b| *b = -*b),
            Pauli::Y => self.for_pairs(qubit, |a, b| {
                let (x, y) = (*a, *b);
                // Y = [[0, -i], [i, 0]]
                *a = Complex::new(y.im, -y.re);
                *b = Complex::new(-x.im, x.re);
            }),
        }
    }

    /// Visits every amplitude pair differing only in `qubit`: `(bit clear, bit set)`.
    #[inline]
    fn for_pairs(&mut self, qubit: usize, mut f: impl FnMut(&mut Complex<T>, &mut Complex<T>)) {
        let m = self.mask(qubit);
        let dim = self.amplitudes.len();
        let mut start = 0;
        while start < dim {
            let (lo, hi) = self.amplitudes[start..start + 2 * m].split_at_mut(m);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a, b);
            }
            start += 2 * m;
        }
    }

    /// Probability that measuring the last qubit yields `1`.
    pub fn prob_last_one(&self) -> T {
        self.amplitudes
            .iter()
            .skip(1)
            .step_by(2)
            .map(|a| a.norm_sqr())
            .sum()
    }

    /// `⟨ψ| 1 ⊗ … ⊗ 1 ⊗ Z |ψ⟩`, clamped into `[-1, 1]`.
    pub fn expectation_z_last(&self) -> T {
        let mut acc = T::zero();
        for pair in self.amplitudes.chunks_exact(2) {
            acc += pair[0].norm_sqr() - pair[1].norm_sqr();
        }
        acc.max(-T::one()).min(T::one())
    }

    /// Born probabilities over the computational basis.
    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: other.n_qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |s, x| s + x))
    }

    /// `|⟨self|other⟩|²`, clamped into `[0, 1]`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr().min(T::one()))
    }
}

/// Functional form of [`StateVector::apply`].
pub fn apply_gate<T: Real>(state: StateVector<T>, gate: &Gate<T>) -> Result<StateVector<T>> {
    state.applied(gate)
}

/// `|⟨a|b⟩|²`.
pub fn fidelity<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<T> {
    a.fidelity(b)
}
