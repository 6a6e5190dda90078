use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Rotation angle of a gate inside a [`Circuit`](super::Circuit): a literal or a parameter slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle<T> {
    Fixed(T),
    Slot(usize),
}

/// Gate over qubit indices, with angles of type `A`.
///
/// `Gate<T>` is a concrete gate ready for application; `Gate<Angle<T>>` may
/// still reference parameter slots. Only rotation gates carry an angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate<A> {
    H(usize),
    Rx(usize, A),
    Ry(usize, A),
    Rz(usize, A),
    Cz(usize, usize),
    Cnot { control: usize, target: usize },
}

impl<A> Gate<A> {
    pub fn kind(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::Rx(..) => "RX",
            Gate::Ry(..) => "RY",
            Gate::Rz(..) => "RZ",
            Gate::Cz(..) => "CZ",
            Gate::Cnot { .. } => "CNOT",
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cz(..) | Gate::Cnot { .. })
    }

    /// Qubits touched by the gate; the second entry is `None` for single-qubit gates.
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Ry(q, _) | Gate::Rz(q, _) => (q, None),
            Gate::Cz(a, b) => (a, Some(b)),
            Gate::Cnot { control, target } => (control, Some(target)),
        }
    }

    pub fn angle(&self) -> Option<&A> {
        match self {
            Gate::Rx(_, a) | Gate::Ry(_, a) | Gate::Rz(_, a) => Some(a),
            _ => None,
        }
    }

    pub fn map_angle<B>(&self, f: impl FnOnce(&A) -> B) -> Gate<B> {
        match self {
            Gate::H(q) => Gate::H(*q),
            Gate::Rx(q, a) => Gate::Rx(*q, f(a)),
            Gate::Ry(q, a) => Gate::Ry(*q, f(a)),
            Gate::Rz(q, a) => Gate::Rz(*q, f(a)),
            Gate::Cz(a, b) => Gate::Cz(*a, *b),
            Gate::Cnot { control, target } => Gate::Cnot {
                control: *control,
                target: *target,
            },
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let (a, b) = self.qubits();
        for q in std::iter::once(a).chain(b) {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if b == Some(a) {
            return Err(Error::DuplicateQubit(a));
        }
        Ok(())
    }
}

impl<T: Real> Gate<T> {
    /// Inverse gate. Rotations negate their angle; H, CZ and CNOT are self-inverse.
    pub fn inverse(&self) -> Self {
        self.map_angle(|a| -*a)
    }
}

impl<T: fmt::Display> fmt::Display for Gate<Angle<T>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_gate(self, f, |a, f| match a {
            Angle::Fixed(v) => write!(f, " {v}"),
            Angle::Slot(s) => write!(f, " ${s}"),
        })
    }
}

impl fmt::Display for Gate<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_gate(self, f, |a, f| write!(f, " {a}"))
    }
}

fn fmt_gate<A>(
    gate: &Gate<A>,
    f: &mut fmt::Formatter<'_>,
    angle: impl Fn(&A, &mut fmt::Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    let (a, b) = gate.qubits();
    write!(f, "{} {a}", gate.kind())?;
    if let Some(b) = b {
        write!(f, " {b}")?;
    }
    match gate.angle() {
        Some(x) => angle(x, f),
        None => Ok(()),
    }
}

/// Single-qubit Pauli operator used by the noise model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: u8) -> Self {
        match i & 3 {
            0 => Pauli::I,
            1 => Pauli::X,
            2 => Pauli::Y,
            _ => Pauli::Z,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_bad_indices() {
        assert!(Gate::<f64>::H(2).validate(2).is_err());
        assert!(matches!(
            Gate::<f64>::Cz(1, 1).validate(3),
            Err(Error::DuplicateQubit(1))
        ));
        assert!(Gate::<f64>::Cnot { control: 0, target: 2 }.validate(3).is_ok());
    }

    #[test]
    fn display_uses_slot_names_for_unbound_angles() {
        let g: Gate<Angle<f64>> = Gate::Ry(1, Angle::Slot(4));
        assert_eq!(g.to_string(), "RY 1 $4");
        assert_eq!(Gate::<Angle<f64>>::Cz(0, 2).to_string(), "CZ 0 2");
    }
}
