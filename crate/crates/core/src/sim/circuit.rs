use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::gate::{Angle, Gate};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Ordered gate sequence over a fixed register with named parameter slots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit<T> {
    n_qubits: usize,
    gates: Vec<Gate<Angle<T>>>,
    slots: Vec<String>,
}

impl<T: Real> Circuit<T> {
    pub fn new(n_qubits: usize) -> Self {
        assert!(n_qubits >= 1, "register needs at least one qubit");
        Self {
            n_qubits,
            gates: Vec::new(),
            slots: Vec::new(),
        }
    }

    /// Circuit of fixed RY rotations, one per qubit (the angle encoding).
    pub fn ry_layer(angles: &[T]) -> Self {
        let mut c = Self::new(angles.len());
        c.gates = angles
            .iter()
            .enumerate()
            .map(|(q, &a)| Gate::Ry(q, Angle::Fixed(a)))
            .collect();
        c
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate<Angle<T>>] {
        &self.gates
    }

    pub fn slot_names(&self) -> &[String] {
        &self.slots
    }

    pub fn n_params(&self) -> usize {
        self.slots.len()
    }

    pub fn add_slot(&mut self, name: impl Into<String>) -> usize {
        self.slots.push(name.into());
        self.slots.len() - 1
    }

    pub fn push(&mut self, gate: Gate<Angle<T>>) -> Result<()> {
        gate.validate(self.n_qubits)?;
        if let Some(Angle::Slot(s)) = gate.angle() {
            if *s >= self.slots.len() {
                return Err(Error::UnboundParameter(*s));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Pushes `make(qubit, slot)` for a freshly declared slot named `name`.
    pub fn push_param(
        &mut self,
        name: impl Into<String>,
        make: impl FnOnce(Angle<T>) -> Gate<Angle<T>>,
    ) -> Result<usize> {
        let slot = self.add_slot(name);
        self.push(make(Angle::Slot(slot)))?;
        Ok(slot)
    }

    /// Checks that every declared slot feeds at least one rotation gate.
    pub fn validate(&self) -> Result<()> {
        let mut used = vec![false; self.slots.len()];
        for g in &self.gates {
            g.validate(self.n_qubits)?;
            if let Some(Angle::Slot(s)) = g.angle() {
                *used.get_mut(*s).ok_or(Error::UnboundParameter(*s))? = true;
            }
        }
        match used.iter().position(|u| !u) {
            Some(s) => Err(Error::UnusedParameter(s)),
            None => Ok(()),
        }
    }

    /// `(gate index, slot)` for every parameterized gate, in gate order.
    pub fn slot_occurrences(&self) -> Vec<(usize, usize)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match g.angle() {
                Some(Angle::Slot(s)) => Some((i, *s)),
                _ => None,
            })
            .collect()
    }

    fn check_params(&self, params: &[T]) -> Result<()> {
        if params.len() != self.slots.len() {
            return Err(Error::ParameterCount {
                expected: self.slots.len(),
                got: params.len(),
            });
        }
        Ok(())
    }

    /// Resolves every slot against `params`.
    pub fn bind(&self, params: &[T]) -> Result<Vec<Gate<T>>> {
        self.check_params(params)?;
        Ok(self
            .gates
            .iter()
            .map(|g| {
                g.map_angle(|a| match *a {
                    Angle::Fixed(v) => v,
                    Angle::Slot(s) => params[s],
                })
            })
            .collect())
    }

    /// Like [`bind`](Self::bind) but adds `shift` to the angle of gate `gate_index` only.
    pub fn bind_shifted(&self, params: &[T], gate_index: usize, shift: T) -> Result<Vec<Gate<T>>> {
        let mut gates = self.bind(params)?;
        let g = gates
            .get_mut(gate_index)
            .ok_or(Error::DimensionMismatch {
                expected: self.gates.len(),
                got: gate_index,
            })?;
        *g = g.map_angle(|a| *a + shift);
        Ok(gates)
    }

    /// `self` followed by `next`; the slots of `next` are appended after those of `self`.
    pub fn then(&self, next: &Circuit<T>) -> Result<Circuit<T>> {
        if self.n_qubits != next.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: next.n_qubits,
            });
        }
        let offset = self.slots.len();
        let mut out = self.clone();
        out.slots.extend(next.slots.iter().cloned());
        out.gates.extend(next.gates.iter().map(|g| {
            g.map_angle(|a| match *a {
                Angle::Slot(s) => Angle::Slot(s + offset),
                fixed => fixed,
            })
        }));
        Ok(out)
    }

    /// One gate per line: kind, qubits, then the angle or slot name.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for g in &self.gates {
            let (a, b) = g.qubits();
            write!(out, "{} {a}", g.kind()).unwrap();
            if let Some(b) = b {
                write!(out, " {b}").unwrap();
            }
            match g.angle() {
                Some(Angle::Fixed(v)) => write!(out, " {v}").unwrap(),
                Some(Angle::Slot(s)) => write!(out, " {}", self.slots[*s]).unwrap(),
                None => {}
            }
            out.push('\n');
        }
        out
    }
}

/// Runs `circuit` with `params` bound, starting from `initial`.
pub fn run_circuit<T: Real>(
    circuit: &Circuit<T>,
    params: &[T],
    initial: &StateVector<T>,
) -> Result<StateVector<T>> {
    if initial.n_qubits() != circuit.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: circuit.n_qubits(),
            got: initial.n_qubits(),
        });
    }
    let gates = circuit.bind(params)?;
    let mut state = initial.clone();
    state.apply_all(&gates)?;
    Ok(state)
}
