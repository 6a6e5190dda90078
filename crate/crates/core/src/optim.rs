//! AMSGRAD, shared by the quantum and classical training loops.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmsgradConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AmsgradConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.7,
            beta2: 0.99,
            epsilon: 1e-8,
        }
    }
}

/// Moment estimates of one parameter vector.
///
/// Update without bias correction:
/// `m ← β1 m + (1−β1) g`, `v ← β2 v + (1−β2) g²`, `v̂ ← max(v̂, v)`,
/// `θ ← θ − lr · m / (√v̂ + ε)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsgradState<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub v_hat: Vec<T>,
    pub step: u64,
}

impl<T: Real> AmsgradState<T> {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            v_hat: vec![T::zero(); n],
            step: 0,
        }
    }

    /// One descent step on `params`. Use negated gradients for ascent.
    pub fn step(&mut self, config: &AmsgradConfig, params: &mut [T], grads: &[T]) -> Result<()> {
        let n = self.m.len();
        if params.len() != n || grads.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: if params.len() != n { params.len() } else { grads.len() },
            });
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient(i));
        }
        let (lr, b1, b2, eps) = (
            T::lit(config.learning_rate),
            T::lit(config.beta1),
            T::lit(config.beta2),
            T::lit(config.epsilon),
        );
        for i in 0..n {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g * g;
            self.v_hat[i] = self.v_hat[i].max(self.v[i]);
            params[i] -= lr * self.m[i] / (self.v_hat[i].sqrt() + eps);
        }
        self.step += 1;
        Ok(())
    }
}

/// Functional form: returns the updated parameters.
pub fn amsgrad_step<T: Real>(
    state: &mut AmsgradState<T>,
    config: &AmsgradConfig,
    params: &[T],
    grads: &[T],
) -> Result<Vec<T>> {
    let mut p = params.to_vec();
    state.step(config, &mut p, grads)?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_step_closed_form() {
        let cfg = AmsgradConfig::default();
        for g in [0.5f64, -2.0, 1e-3] {
            let mut st = AmsgradState::new(1);
            let p = amsgrad_step(&mut st, &cfg, &[1.0], &[g]).unwrap();
            let want = 1.0 - cfg.learning_rate * 0.3 * g / (0.1 * g.abs() + cfg.epsilon);
            assert!((p[0] - want).abs() < 1e-12, "{g}: {} vs {want}", p[0]);
        }
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let cfg = AmsgradConfig::default();
        let mut st = AmsgradState::<f64>::new(2);
        let p = amsgrad_step(&mut st, &cfg, &[0.3, -0.1], &[0.0, 0.0]).unwrap();
        assert_eq!(p, vec![0.3, -0.1]);
        assert_eq!(st.v_hat, vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_non_finite_gradient() {
        let mut st = AmsgradState::<f64>::new(1);
        assert!(matches!(
            st.step(&AmsgradConfig::default(), &mut [0.0], &[f64::NAN]),
            Err(Error::NonFiniteGradient(0))
        ));
    }

    proptest! {
        #[test]
        fn v_hat_is_monotone(grads in proptest::collection::vec(-10.0f64..10.0, 1..40)) {
            let cfg = AmsgradConfig::default();
            let mut st = AmsgradState::<f64>::new(1);
            let mut p = [0.0];
            let mut prev = 0.0;
            for g in grads {
                st.step(&cfg, &mut p, &[g]).unwrap();
                prop_assert!(st.v_hat[0] >= prev);
                prop_assert!(p[0].is_finite());
                prev = st.v_hat[0];
            }
        }
    }
}
