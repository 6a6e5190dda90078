//! Generator and discriminator circuit templates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::sim::{Angle, Circuit, Gate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub n_qubits: usize,
    /// Number of repeated rotation + entangler blocks (`k_G`).
    pub depth: usize,
}

impl GeneratorSpec {
    pub fn n_params(&self) -> usize {
        (self.depth + 1) * self.n_qubits
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscriminatorSpec {
    pub n_qubits: usize,
    /// Number of repeated rotation + entangler blocks (`k_D`).
    pub depth: usize,
}

impl DiscriminatorSpec {
    pub fn n_params(&self) -> usize {
        3 * (self.depth * self.n_qubits + 1)
    }
}

/// Nearest-neighbour CZ chain, closed into a ring for `n ≥ 3`.
fn entangle<T: Real>(c: &mut Circuit<T>) -> Result<()> {
    let n = c.n_qubits();
    for i in 0..n.saturating_sub(1) {
        c.push(Gate::Cz(i, i + 1))?;
    }
    if n >= 3 {
        c.push(Gate::Cz(n - 1, 0))?;
    }
    Ok(())
}

fn hadamards<T: Real>(c: &mut Circuit<T>) -> Result<()> {
    for q in 0..c.n_qubits() {
        c.push(Gate::H(q))?;
    }
    Ok(())
}

/// `H^⊗n`, then `depth` × [RY on every qubit, CZ block], then a final RY layer.
///
/// Slot `theta_g[i,j]` is the RY angle on qubit `i` in layer `j`; slots are
/// ordered layer-major.
pub fn build_generator<T: Real>(spec: GeneratorSpec) -> Result<Circuit<T>> {
    if spec.n_qubits == 0 {
        return Err(Error::InvalidConfig("generator needs at least one qubit".into()));
    }
    let n = spec.n_qubits;
    let mut c = Circuit::new(n);
    hadamards(&mut c)?;
    for layer in 0..=spec.depth {
        for q in 0..n {
            c.push_param(format!("theta_g[{q},{layer}]"), |a| Gate::Ry(q, a))?;
        }
        if layer < spec.depth {
            entangle(&mut c)?;
        }
    }
    debug_assert_eq!(c.n_params(), spec.n_params());
    Ok(c)
}

/// `H^⊗n`, `depth` × [RZ RY RZ on every qubit, CZ block], CNOTs from every
/// qubit onto the last, then RX RY RZ on the last qubit.
pub fn build_discriminator<T: Real>(spec: DiscriminatorSpec) -> Result<Circuit<T>> {
    if spec.n_qubits == 0 || spec.depth == 0 {
        return Err(Error::InvalidConfig(
            "discriminator needs at least one qubit and one layer".into(),
        ));
    }
    let n = spec.n_qubits;
    let last = n - 1;
    let mut c = Circuit::new(n);
    hadamards(&mut c)?;
    for layer in 0..spec.depth {
        let j = 3 * layer;
        for q in 0..n {
            c.push_param(format!("theta_d[{q},{j}]"), |a| Gate::Rz(q, a))?;
            c.push_param(format!("theta_d[{q},{}]", j + 1), |a| Gate::Ry(q, a))?;
            c.push_param(format!("theta_d[{q},{}]", j + 2), |a| Gate::Rz(q, a))?;
        }
        entangle(&mut c)?;
    }
    for q in 0..last {
        c.push(Gate::Cnot {
            control: q,
            target: last,
        })?;
    }
    let j = 3 * spec.depth;
    c.push_param(format!("theta_d[{n},{j}]"), |a| Gate::Rx(last, a))?;
    c.push_param(format!("theta_d[{n},{}]", j + 1), |a| Gate::Ry(last, a))?;
    c.push_param(format!("theta_d[{n},{}]", j + 2), |a| Gate::Rz(last, a))?;
    debug_assert_eq!(c.n_params(), spec.n_params());
    Ok(c)
}

/// `true` when every gate kind in `c` is one of `kinds`.
pub fn uses_only<T: Real>(c: &Circuit<T>, kinds: &[&str]) -> bool {
    c.gates().iter().all(|g| kinds.contains(&g.kind()))
}

/// Number of parameterized (`Angle::Slot`) gates.
pub fn rotation_count<T: Real>(c: &Circuit<T>) -> usize {
    c.gates()
        .iter()
        .filter(|g| matches!(g.angle(), Some(Angle::Slot(_))))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{run_circuit, StateVector};

    fn generator(n: usize, k: usize) -> Circuit<f64> {
        build_generator(GeneratorSpec { n_qubits: n, depth: k }).unwrap()
    }

    fn discriminator(n: usize, k: usize) -> Circuit<f64> {
        build_discriminator(DiscriminatorSpec { n_qubits: n, depth: k }).unwrap()
    }

    #[test]
    fn reported_parameter_counts() {
        assert_eq!(generator(7, 9).n_params(), 70);
        assert_eq!(discriminator(7, 3).n_params(), 66);
        assert_eq!(discriminator(3, 2).n_params(), 21);
        // the formula gives 12 here, not the 6 quoted alongside it
        assert_eq!(generator(3, 3).n_params(), 12);
    }

    #[test]
    fn smallest_instances() {
        let g = generator(1, 0);
        assert_eq!(g.dump(), "H 0\nRY 0 theta_g[0,0]\n");
        let d = discriminator(1, 1);
        assert_eq!(d.n_params(), 6);
        assert!(!d.gates().iter().any(|g| g.is_two_qubit()));
    }

    #[test]
    fn counts_follow_closed_forms() {
        for n in 1..=8 {
            for k in 0..=10 {
                let g = generator(n, k);
                assert_eq!(g.n_params(), (k + 1) * n);
                assert_eq!(rotation_count(&g), (k + 1) * n);
                g.validate().unwrap();
                if n >= 3 {
                    let cz = g.gates().iter().filter(|x| x.kind() == "CZ").count();
                    assert_eq!(cz, k * n);
                }
                assert!(uses_only(&g, &["H", "RY", "CZ"]));
                if k >= 1 {
                    let d = discriminator(n, k);
                    assert_eq!(d.n_params(), 3 * (k * n + 1));
                    d.validate().unwrap();
                    assert!(uses_only(&d, &["H", "RX", "RY", "RZ", "CZ", "CNOT"]));
                }
            }
        }
    }

    #[test]
    fn zero_parameters_give_cz_image_of_uniform_superposition() {
        let s = run_circuit(&generator(2, 1), &[0.0; 4], &StateVector::zero(2)).unwrap();
        let re: Vec<f64> = s.amplitudes().iter().map(|a| a.re).collect();
        for (got, want) in re.iter().zip([0.5, 0.5, 0.5, -0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        // n = 3: H^⊗3 then the CZ ring, applied once per layer
        for k in 0..4 {
            let c = generator(3, k);
            let s = run_circuit(&c, &vec![0.0; c.n_params()], &StateVector::zero(3)).unwrap();
            let mut want = StateVector::<f64>::zero(3);
            for q in 0..3 {
                want.apply(&Gate::H(q)).unwrap();
            }
            for _ in 0..k {
                for g in [Gate::Cz(0, 1), Gate::Cz(1, 2), Gate::Cz(2, 0)] {
                    want.apply(&g).unwrap();
                }
            }
            assert!((s.fidelity(&want).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
