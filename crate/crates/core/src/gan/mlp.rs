use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Negative-side slope of [`Activation::LeakyRelu`].
pub const LEAKY_SLOPE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Relu,
    LeakyRelu,
    Identity,
}

impl Activation {
    pub fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Sigmoid => sigmoid(x),
            Activation::Relu => x.max(T::zero()),
            Activation::LeakyRelu => {
                if x > T::zero() {
                    x
                } else {
                    x * T::lit(LEAKY_SLOPE)
                }
            }
            Activation::Identity => x,
        }
    }

    /// Derivative at pre-activation `x`, given the output `y = apply(x)`.
    fn derivative<T: Real>(self, x: T, y: T) -> T {
        match self {
            Activation::Sigmoid => y * (T::one() - y),
            Activation::Relu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::LeakyRelu => {
                if x > T::zero() {
                    T::one()
                } else {
                    T::lit(LEAKY_SLOPE)
                }
            }
            Activation::Identity => T::one(),
        }
    }
}

pub fn sigmoid<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Eval,
}

/// Fully connected layer `y = act(W x + b)`, optionally followed by
/// inverted dropout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense<T> {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major, `n_out × n_in`.
    pub weights: Vec<T>,
    pub biases: Vec<T>,
    pub activation: Activation,
    #[serde(default)]
    pub dropout: Option<f64>,
}

impl<T: Real> Dense<T> {
    pub fn zeros(n_in: usize, n_out: usize, activation: Activation) -> Self {
        Self {
            n_in,
            n_out,
            weights: vec![T::zero(); n_in * n_out],
            biases: vec![T::zero(); n_out],
            activation,
            dropout: None,
        }
    }

    pub fn with_dropout(mut self, rate: f64) -> Self {
        self.dropout = Some(rate);
        self
    }

    pub fn n_params(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Layer shapes for [`Mlp::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub n_out: usize,
    pub activation: Activation,
    #[serde(default)]
    pub dropout: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp<T> {
    pub layers: Vec<Dense<T>>,
}

/// Intermediate values kept by [`Mlp::forward_trace`] for backpropagation.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    inputs: Vec<Vec<T>>,
    pre: Vec<Vec<T>>,
    post: Vec<Vec<T>>,
    masks: Vec<Option<Vec<T>>>,
    pub output: Vec<T>,
}

impl<T: Real> Mlp<T> {
    /// Glorot-uniform weights and zero biases.
    pub fn new<R: Rng + ?Sized>(n_in: usize, specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        let mut layers = Vec::with_capacity(specs.len());
        let mut width = n_in;
        for s in specs {
            if let Some(p) = s.dropout {
                if !(0.0..1.0).contains(&p) {
                    return Err(Error::InvalidProbability {
                        name: "dropout",
                        value: p,
                    });
                }
            }
            let limit = (6.0 / (width + s.n_out) as f64).sqrt();
            let mut layer = Dense::zeros(width, s.n_out, s.activation);
            for w in layer.weights.iter_mut() {
                *w = T::lit(rng.gen_range(-limit..=limit));
            }
            layer.dropout = s.dropout;
            layers.push(layer);
            width = s.n_out;
        }
        Self::from_layers(layers)
    }

    pub fn from_layers(layers: Vec<Dense<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidConfig("network needs at least one layer".into()));
        }
        for l in &layers {
            if l.weights.len() != l.n_in * l.n_out || l.biases.len() != l.n_out {
                return Err(Error::ParameterCount {
                    expected: l.n_in * l.n_out + l.n_out,
                    got: l.weights.len() + l.biases.len(),
                });
            }
        }
        for w in layers.windows(2) {
            if w[0].n_out != w[1].n_in {
                return Err(Error::DimensionMismatch {
                    expected: w[0].n_out,
                    got: w[1].n_in,
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn n_in(&self) -> usize {
        self.layers[0].n_in
    }

    pub fn n_out(&self) -> usize {
        self.layers.last().unwrap().n_out
    }

    pub fn n_params(&self) -> usize {
        self.layers.iter().map(Dense::n_params).sum()
    }

    /// Flat parameters, each layer's weights then biases.
    pub fn params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.n_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::ParameterCount {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    pub fn forward<R: Rng + ?Sized>(&self, input: &[T], mode: Mode, rng: &mut R) -> Result<Vec<T>> {
        Ok(self.forward_trace(input, mode, rng)?.output)
    }

    /// Evaluation-mode forward pass.
    pub fn eval(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        for l in &self.layers {
            x = dense(l, &x);
            for v in x.iter_mut() {
                *v = l.activation.apply(*v);
            }
        }
        Ok(x)
    }

    pub fn forward_trace<R: Rng + ?Sized>(&self, input: &[T], mode: Mode, rng: &mut R) -> Result<Trace<T>> {
        self.check_input(input)?;
        let n = self.layers.len();
        let mut trace = Trace {
            inputs: Vec::with_capacity(n),
            pre: Vec::with_capacity(n),
            post: Vec::with_capacity(n),
            masks: Vec::with_capacity(n),
            output: Vec::new(),
        };
        let mut x = input.to_vec();
        for l in &self.layers {
            let z = dense(l, &x);
            let y: Vec<T> = z.iter().map(|&v| l.activation.apply(v)).collect();
            let mask = match (mode, l.dropout) {
                (Mode::Train, Some(p)) if p > 0.0 => {
                    let keep = T::lit(1.0 / (1.0 - p));
                    Some(
                        (0..l.n_out)
                            .map(|_| if rng.gen::<f64>() < p { T::zero() } else { keep })
                            .collect::<Vec<T>>(),
                    )
                }
                _ => None,
            };
            let out = match &mask {
                Some(m) => y.iter().zip(m).map(|(a, b)| *a * *b).collect(),
                None => y.clone(),
            };
            trace.inputs.push(std::mem::replace(&mut x, out));
            trace.pre.push(z);
            trace.post.push(y);
            trace.masks.push(mask);
        }
        trace.output = x;
        Ok(trace)
    }

    /// Gradients of a scalar loss with respect to the flat parameters and
    /// the input, given `grad_out = ∂loss/∂output`.
    pub fn backward(&self, trace: &Trace<T>, grad_out: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        if grad_out.len() != self.n_out() {
            return Err(Error::DimensionMismatch {
                expected: self.n_out(),
                got: grad_out.len(),
            });
        }
        let mut per_layer: Vec<Vec<T>> = Vec::with_capacity(self.layers.len());
        let mut g = grad_out.to_vec();
        for (i, l) in self.layers.iter().enumerate().rev() {
            if let Some(m) = &trace.masks[i] {
                for (a, b) in g.iter_mut().zip(m) {
                    *a *= *b;
                }
            }
            for (o, gv) in g.iter_mut().enumerate() {
                *gv *= l.activation.derivative(trace.pre[i][o], trace.post[i][o]);
            }
            let x = &trace.inputs[i];
            let mut pg = Vec::with_capacity(l.n_params());
            for o in 0..l.n_out {
                for xv in x {
                    pg.push(g[o] * *xv);
                }
            }
            pg.extend_from_slice(&g);
            let mut gin = vec![T::zero(); l.n_in];
            for o in 0..l.n_out {
                let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
                for (gi, w) in gin.iter_mut().zip(row) {
                    *gi += g[o] * *w;
                }
            }
            per_layer.push(pg);
            g = gin;
        }
        per_layer.reverse();
        Ok((per_layer.concat(), g))
    }

    fn check_input(&self, input: &[T]) -> Result<()> {
        if input.len() != self.n_in() {
            return Err(Error::DimensionMismatch {
                expected: self.n_in(),
                got: input.len(),
            });
        }
        Ok(())
    }
}

fn dense<T: Real>(l: &Dense<T>, x: &[T]) -> Vec<T> {
    (0..l.n_out)
        .map(|o| {
            let row = &l.weights[o * l.n_in..(o + 1) * l.n_in];
            row.iter().zip(x).fold(l.biases[o], |acc, (w, v)| acc + *w * *v)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;

    fn net(seed: u64, dropout: Option<f64>) -> Mlp<f64> {
        let specs = [
            LayerSpec { n_out: 5, activation: Activation::LeakyRelu, dropout },
            LayerSpec { n_out: 4, activation: Activation::Relu, dropout: None },
            LayerSpec { n_out: 3, activation: Activation::Identity, dropout: None },
            LayerSpec { n_out: 1, activation: Activation::Sigmoid, dropout: None },
        ];
        let mut n = Mlp::new(3, &specs, &mut rng_from(seed)).unwrap();
        let mut r = rng_from(seed + 100);
        let p: Vec<f64> = n.params().iter().map(|_| r.gen_range(-1.0..1.0)).collect();
        n.set_params(&p).unwrap();
        n
    }

    #[test]
    fn zero_network_outputs_one_half() {
        let n = Mlp::<f64>::from_layers(vec![
            Dense::zeros(4, 3, Activation::Relu),
            Dense::zeros(3, 1, Activation::Sigmoid),
        ])
        .unwrap();
        assert_eq!(n.eval(&[1.0, -2.0, 3.0, 0.5]).unwrap(), vec![0.5]);
    }

    #[test]
    fn leaky_slope() {
        assert_eq!(Activation::LeakyRelu.apply(-1.0f64), -0.2);
        assert_eq!(Activation::LeakyRelu.apply(2.0f64), 2.0);
        assert_eq!(Activation::Relu.apply(-1.0f64), 0.0);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(-1000.0f64), 0.0);
        assert_eq!(sigmoid(1000.0f64), 1.0);
        assert!((sigmoid(0.3f64) + sigmoid(-0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dropout_off_in_eval_mode() {
        let n = net(1, Some(0.25));
        let x = [0.2, -0.4, 0.9];
        let a = n.forward(&x, Mode::Eval, &mut rng_from(0)).unwrap();
        let b = n.forward(&x, Mode::Eval, &mut rng_from(99)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, n.eval(&x).unwrap());
    }

    #[test]
    fn chaining_checked() {
        let e = Mlp::<f64>::from_layers(vec![
            Dense::zeros(2, 3, Activation::Relu),
            Dense::zeros(4, 1, Activation::Sigmoid),
        ]);
        assert!(matches!(e, Err(Error::DimensionMismatch { .. })));
        let n = net(0, None);
        assert!(n.eval(&[1.0]).is_err());
    }

    #[test]
    fn params_round_trip() {
        let mut n = net(3, None);
        let p = n.params();
        assert_eq!(p.len(), 3 * 5 + 5 + 5 * 4 + 4 + 4 * 3 + 3 + 3 + 1);
        n.set_params(&p).unwrap();
        assert_eq!(n.params(), p);
        assert!(n.set_params(&p[1..]).is_err());
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
    }

    #[test]
    fn backward_matches_finite_differences() {
        for seed in 0..10 {
            // fixed masks: each evaluation reseeds the same stream
            let n = net(seed, Some(0.25));
            let x = [0.31, -0.72, 1.13];
            let loss = |net: &Mlp<f64>, x: &[f64]| {
                let y = net.forward(x, Mode::Train, &mut rng_from(seed)).unwrap()[0];
                y.ln()
            };
            let trace = n.forward_trace(&x, Mode::Train, &mut rng_from(seed)).unwrap();
            let y = trace.output[0];
            let (pg, xg) = n.backward(&trace, &[1.0 / y]).unwrap();
            let h = 1e-5;
            let p = n.params();
            for i in 0..p.len() {
                let mut m = n.clone();
                let mut q = p.clone();
                q[i] += h;
                m.set_params(&q).unwrap();
                let up = loss(&m, &x);
                q[i] -= 2.0 * h;
                m.set_params(&q).unwrap();
                let down = loss(&m, &x);
                let fd = (up - down) / (2.0 * h);
                assert!(rel_err(fd, pg[i]) < 1e-5, "seed {seed} param {i}: {fd} vs {}", pg[i]);
            }
            for i in 0..3 {
                let mut a = x;
                a[i] += h;
                let mut b = x;
                b[i] -= h;
                let fd = (loss(&n, &a) - loss(&n, &b)) / (2.0 * h);
                assert!(rel_err(fd, xg[i]) < 1e-5);
            }
        }
    }

    #[test]
    fn inverted_dropout_preserves_mean() {
        let layer = Dense {
            n_in: 2,
            n_out: 1,
            weights: vec![0.7, -0.3],
            biases: vec![0.1],
            activation: Activation::Identity,
            dropout: Some(0.25),
        };
        let n = Mlp::from_layers(vec![layer]).unwrap();
        let x = [1.0, 0.5];
        let eval = n.eval(&x).unwrap()[0];
        let mut rng = rng_from(5);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| n.forward(&x, Mode::Train, &mut rng).unwrap()[0])
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        let se = (var / samples.len() as f64).sqrt();
        assert!((mean - eval).abs() < 3.0 * se, "{mean} vs {eval} (se {se})");
    }
}
