use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_generator, GeneratorSpec};
use crate::error::{Error, Result};
use crate::gan::{sigmoid, Activation, Dense, Mlp, Mode};
use crate::rng::rng_from;
use crate::scalar::Real;
use crate::sim::{Circuit, StateVector};

/// Hypercube `[lo, hi]^P` of admissible parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamDomain {
    pub lo: f64,
    pub hi: f64,
}

impl ParamDomain {
    pub fn symmetric(r: f64) -> Self {
        Self { lo: -r, hi: r }
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(self.lo..=self.hi)).collect()
    }
}

/// Outcome probabilities and their parameter derivatives at one `θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub probs: Vec<f64>,
    /// `grads[b][j] = ∂p(b|θ)/∂θ_j`.
    pub grads: Vec<Vec<f64>>,
}

/// A parametrized distribution over a finite outcome set.
pub trait StatModel: Sync {
    fn n_params(&self) -> usize;
    fn n_outcomes(&self) -> usize;
    fn domain(&self) -> ParamDomain;
    fn probabilities(&self, theta: &[f64]) -> Result<Vec<f64>>;
    fn jacobian(&self, theta: &[f64]) -> Result<Jacobian>;

    fn check(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::ParameterCount { expected: self.n_params(), got: theta.len() });
        }
        Ok(())
    }
}

/// Born distribution of a parametrized circuit over computational basis states.
#[derive(Debug, Clone)]
pub struct QuantumBornModel<T> {
    pub circuit: Circuit<T>,
    pub domain: ParamDomain,
}

impl<T: Real> QuantumBornModel<T> {
    /// Generator ansatz on `[−π, π]^P`.
    pub fn generator(spec: GeneratorSpec) -> Result<Self> {
        Ok(Self {
            circuit: build_generator(spec)?,
            domain: ParamDomain::symmetric(std::f64::consts::PI),
        })
    }

    fn born(&self, theta: &[T]) -> Result<Vec<f64>> {
        let mut s = StateVector::zero(self.circuit.n_qubits());
        s.apply_all(&self.circuit.bind(theta)?)?;
        Ok(s.probabilities().into_iter().map(|p| p.as_f64()).collect())
    }
}

impl<T: Real> StatModel for QuantumBornModel<T> {
    fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    fn n_outcomes(&self) -> usize {
        1 << self.circuit.n_qubits()
    }

    fn domain(&self) -> ParamDomain {
        self.domain
    }

    fn probabilities(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(theta)?;
        let t: Vec<T> = theta.iter().map(|&v| T::lit(v)).collect();
        self.born(&t)
    }

    /// Parameter shift applied to each probability.
    fn jacobian(&self, theta: &[f64]) -> Result<Jacobian> {
        self.check(theta)?;
        let t: Vec<T> = theta.iter().map(|&v| T::lit(v)).collect();
        let probs = self.born(&t)?;
        let mut grads = vec![vec![0.0; theta.len()]; probs.len()];
        let shift = T::FRAC_PI_2();
        let n = self.circuit.n_qubits();
        for (gate, slot) in self.circuit.slot_occurrences() {
            let run = |s: T| -> Result<Vec<f64>> {
                let mut st = StateVector::zero(n);
                st.apply_all(&self.circuit.bind_shifted(&t, gate, s)?)?;
                Ok(st.probabilities().into_iter().map(|p| p.as_f64()).collect())
            };
            let (plus, minus) = (run(shift)?, run(-shift)?);
            for b in 0..probs.len() {
                grads[b][slot] += 0.5 * (plus[b] - minus[b]);
            }
        }
        Ok(Jacobian { probs, grads })
    }
}

/// A classical generator turned into a distribution over `2^n` cells: each
/// output coordinate is soft-thresholded at `threshold`, and the cell
/// probabilities are averaged over a fixed set of latent draws.
#[derive(Debug, Clone)]
pub struct BinnedClassicalModel<T> {
    pub net: Mlp<T>,
    pub latents: Vec<Vec<T>>,
    pub threshold: f64,
    pub temperature: f64,
    pub domain: ParamDomain,
}

impl<T: Real> BinnedClassicalModel<T> {
    /// Single dense `n → n` sigmoid layer (`n² + n` parameters), parameters
    /// on `[−1, 1]^P`, cells split at 0.5.
    pub fn dense(n: usize, latent_samples: usize, temperature: f64, seed: u64) -> Result<Self> {
        let net = Mlp::from_layers(vec![Dense::zeros(n, n, Activation::Sigmoid)])?;
        Self::new(net, latent_samples, 0.5, temperature, ParamDomain::symmetric(1.0), seed)
    }

    pub fn new(
        net: Mlp<T>,
        latent_samples: usize,
        threshold: f64,
        temperature: f64,
        domain: ParamDomain,
        seed: u64,
    ) -> Result<Self> {
        if latent_samples == 0 {
            return Err(Error::InvalidConfig("at least one latent sample is needed".into()));
        }
        if !(temperature > 0.0) {
            return Err(Error::InvalidConfig(format!("temperature {temperature}")));
        }
        if net.n_out() > 20 {
            return Err(Error::InvalidConfig("too many output cells".into()));
        }
        let mut rng = rng_from(seed);
        let latents = (0..latent_samples)
            .map(|_| {
                (0..net.n_in())
                    .map(|_| T::lit(rng.sample::<f64, _>(rand_distr::StandardNormal)))
                    .collect()
            })
            .collect();
        Ok(Self { net, latents, threshold, temperature, domain })
    }

    fn with_params(&self, theta: &[f64]) -> Result<Mlp<T>> {
        let mut net = self.net.clone();
        net.set_params(&theta.iter().map(|&v| T::lit(v)).collect::<Vec<T>>())?;
        Ok(net)
    }

    /// Soft cell membership of each coordinate and its derivative.
    fn soft(&self, y: f64) -> (f64, f64) {
        let q = sigmoid((y - self.threshold) / self.temperature);
        (q, q * (1.0 - q) / self.temperature)
    }
}

impl<T: Real> BinnedClassicalModel<T> {
    fn cell_factors(&self, q: &[f64], b: usize) -> Vec<f64> {
        let n = q.len();
        (0..n)
            .map(|i| if (b >> (n - 1 - i)) & 1 == 1 { q[i] } else { 1.0 - q[i] })
            .collect()
    }
}

impl<T: Real> StatModel for BinnedClassicalModel<T> {
    fn n_params(&self) -> usize {
        self.net.n_params()
    }

    fn n_outcomes(&self) -> usize {
        1 << self.net.n_out()
    }

    fn domain(&self) -> ParamDomain {
        self.domain
    }

    fn probabilities(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check(theta)?;
        let net = self.with_params(theta)?;
        let mut probs = vec![0.0; self.n_outcomes()];
        for z in &self.latents {
            let q: Vec<f64> = net.eval(z)?.iter().map(|y| self.soft(y.as_f64()).0).collect();
            for (b, p) in probs.iter_mut().enumerate() {
                *p += self.cell_factors(&q, b).iter().product::<f64>();
            }
        }
        let s = self.latents.len() as f64;
        probs.iter_mut().for_each(|p| *p /= s);
        Ok(probs)
    }

    fn jacobian(&self, theta: &[f64]) -> Result<Jacobian> {
        self.check(theta)?;
        let net = self.with_params(theta)?;
        let (n, n_par, n_cells) = (net.n_out(), self.n_params(), self.n_outcomes());
        let s = self.latents.len() as f64;
        let mut probs = vec![0.0; n_cells];
        let mut grads = vec![vec![0.0; n_par]; n_cells];
        let mut unused = rng_from(0);
        for z in &self.latents {
            let trace = net.forward_trace(z, Mode::Eval, &mut unused)?;
            let soft: Vec<(f64, f64)> = trace.output.iter().map(|y| self.soft(y.as_f64())).collect();
            let q: Vec<f64> = soft.iter().map(|s| s.0).collect();
            // rows of ∂y_i/∂θ
            let mut jac = Vec::with_capacity(n);
            for i in 0..n {
                let mut e = vec![T::zero(); n];
                e[i] = T::one();
                let (g, _) = net.backward(&trace, &e)?;
                jac.push(g.iter().map(|v| v.as_f64()).collect::<Vec<f64>>());
            }
            for b in 0..n_cells {
                let f = self.cell_factors(&q, b);
                probs[b] += f.iter().product::<f64>() / s;
                for i in 0..n {
                    let others: f64 = (0..n).filter(|&k| k != i).map(|k| f[k]).product();
                    let sign = if (b >> (n - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 };
                    let dp_dy = sign * others * soft[i].1 / s;
                    if dp_dy != 0.0 {
                        for (g, j) in grads[b].iter_mut().zip(&jac[i]) {
                            *g += dp_dy * j;
                        }
                    }
                }
            }
        }
        Ok(Jacobian { probs, grads })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_jacobian(model: &dyn StatModel, theta: &[f64], tol: f64) {
        let j = model.jacobian(theta).unwrap();
        assert!((j.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let h = 1e-6;
        for k in 0..theta.len() {
            let mut a = theta.to_vec();
            a[k] += h;
            let mut b = theta.to_vec();
            b[k] -= h;
            let (pa, pb) = (model.probabilities(&a).unwrap(), model.probabilities(&b).unwrap());
            for o in 0..pa.len() {
                let fd = (pa[o] - pb[o]) / (2.0 * h);
                assert!((fd - j.grads[o][k]).abs() < tol, "outcome {o} param {k}: {fd} vs {}", j.grads[o][k]);
            }
        }
    }

    #[test]
    fn zero_parameter_generator_is_uniform() {
        let m = QuantumBornModel::<f64>::generator(GeneratorSpec { n_qubits: 2, depth: 2 }).unwrap();
        let p = m.probabilities(&vec![0.0; m.n_params()]).unwrap();
        for v in p {
            assert!((v - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn quantum_jacobian_matches_differences() {
        let m = QuantumBornModel::<f64>::generator(GeneratorSpec { n_qubits: 3, depth: 2 }).unwrap();
        let mut r = rng_from(4);
        for _ in 0..5 {
            let theta = m.domain().sample(m.n_params(), &mut r);
            check_jacobian(&m, &theta, 1e-7);
        }
    }

    #[test]
    fn classical_jacobian_matches_differences() {
        let m = BinnedClassicalModel::<f64>::dense(3, 40, 0.1, 9).unwrap();
        let mut r = rng_from(5);
        for _ in 0..5 {
            let theta = m.domain().sample(m.n_params(), &mut r);
            check_jacobian(&m, &theta, 1e-6);
        }
    }

    #[test]
    fn probabilities_normalized_and_deterministic() {
        let q = QuantumBornModel::<f64>::generator(GeneratorSpec { n_qubits: 3, depth: 3 }).unwrap();
        let c = BinnedClassicalModel::<f64>::dense(3, 50, 0.1, 3).unwrap();
        let c2 = BinnedClassicalModel::<f64>::dense(3, 50, 0.1, 3).unwrap();
        let mut r = rng_from(6);
        for _ in 0..100 {
            let t = q.domain().sample(q.n_params(), &mut r);
            assert!((q.probabilities(&t).unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let t = c.domain().sample(c.n_params(), &mut r);
            let p = c.probabilities(&t).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert_eq!(p, c2.probabilities(&t).unwrap());
        }
    }
}
