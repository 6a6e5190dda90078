use rayon::prelude::*;

use super::circuit::Circuit;
use super::gate::Gate;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameter-shift gradient of `f ∘ bind` with respect to the circuit parameters.
///
/// `f` receives the bound gate list with a single gate's angle shifted by
/// `±π/2`, plus a unique evaluation index (for deriving independent random
/// substreams in shot mode). For a slot feeding several gates, the per-gate
/// shift terms are summed. Shifted evaluations run in parallel; the result
/// does not depend on scheduling.
pub fn parameter_shift_gradient<T, F>(circuit: &Circuit<T>, params: &[T], f: F) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[Gate<T>], usize) -> Result<T> + Sync,
{
    if params.len() != circuit.n_params() {
        return Err(Error::ParameterCount {
            expected: circuit.n_params(),
            got: params.len(),
        });
    }
    let shift = T::FRAC_PI_2();
    let occurrences = circuit.slot_occurrences();
    let terms: Vec<(usize, T)> = occurrences
        .par_iter()
        .enumerate()
        .map(|(k, &(gate, slot))| {
            let plus = f(&circuit.bind_shifted(params, gate, shift)?, 2 * k)?;
            let minus = f(&circuit.bind_shifted(params, gate, -shift)?, 2 * k + 1)?;
            Ok((slot, (plus - minus) * T::half()))
        })
        .collect::<Result<_>>()?;
    let mut grad = vec![T::zero(); params.len()];
    for (slot, g) in terms {
        grad[slot] += g;
    }
    if let Some(i) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFiniteGradient(i));
    }
    Ok(grad)
}

/// Central finite differences of `f` with step `h`.
pub fn finite_difference_gradient<T, F>(params: &[T], h: T, mut f: F) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<T>,
{
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let orig = p[i];
        p[i] = orig + h;
        let plus = f(&p)?;
        p[i] = orig - h;
        let minus = f(&p)?;
        p[i] = orig;
        grad.push((plus - minus) / (h + h));
    }
    Ok(grad)
}
