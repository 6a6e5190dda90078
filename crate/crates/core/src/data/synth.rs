use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::record::{EventRecord, Label, N_FEATURES};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Axis-aligned Gaussian component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub components: Vec<GaussianComponent>,
}

impl Mixture {
    pub fn validate(&self) -> Result<()> {
        if self.components.is_empty() {
            return Err(Error::InvalidConfig("mixture has no components".into()));
        }
        for c in &self.components {
            if c.mean.len() != N_FEATURES || c.std.len() != N_FEATURES {
                return Err(Error::DimensionMismatch {
                    expected: N_FEATURES,
                    got: c.mean.len().min(c.std.len()),
                });
            }
            if let Some(&s) = c.std.iter().find(|&&s| !(s > 0.0 && s.is_finite())) {
                return Err(Error::NonPositiveSpread(s));
            }
            if !(c.weight > 0.0 && c.weight.is_finite()) {
                return Err(Error::InvalidConfig(format!("component weight {}", c.weight)));
            }
        }
        Ok(())
    }

    /// Copy with every component mean moved by `factor · std · direction` per axis.
    pub fn shifted(&self, factor: f64, direction: &[f64]) -> Self {
        Self {
            components: self
                .components
                .iter()
                .map(|c| GaussianComponent {
                    weight: c.weight,
                    mean: c
                        .mean
                        .iter()
                        .zip(&c.std)
                        .zip(direction.iter().cycle())
                        .map(|((m, s), d)| m + factor * s * d)
                        .collect(),
                    std: c.std.clone(),
                })
                .collect(),
        }
    }

    /// Reference "SM" mixture: two components with heterogeneous per-axis scales.
    pub fn reference() -> Self {
        let scales = [0.5, 1.0, 2.0, 4.0, 8.0];
        let std: Vec<f64> = (0..N_FEATURES).map(|j| scales[j % scales.len()]).collect();
        let base: Vec<f64> = (0..N_FEATURES).map(|j| (j % 7) as f64).collect();
        let offset: Vec<f64> = base
            .iter()
            .zip(&std)
            .enumerate()
            .map(|(j, (m, s))| if j % 3 == 0 { m + 1.5 * s } else { *m })
            .collect();
        Self {
            components: vec![
                GaussianComponent {
                    weight: 0.65,
                    mean: base,
                    std: std.clone(),
                },
                GaussianComponent {
                    weight: 0.35,
                    mean: offset,
                    std,
                },
            ],
        }
    }
}

/// Mixtures for the three event classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub sm: Mixture,
    pub higgs: Mixture,
    pub graviton: Mixture,
}

impl SynthConfig {
    /// Anomalies are the reference mixture shifted by `shift` standard
    /// deviations on every axis: all axes positive for Graviton-like events,
    /// alternating signs for Higgs-like events.
    pub fn mean_shifted(shift: f64) -> Self {
        let sm = Mixture::reference();
        Self {
            higgs: sm.shifted(shift, &[1.0, -1.0]),
            graviton: sm.shifted(shift, &[1.0]),
            sm,
        }
    }

    pub fn mixture(&self, label: Label) -> &Mixture {
        match label {
            Label::Higgs => &self.higgs,
            Label::Graviton => &self.graviton,
            _ => &self.sm,
        }
    }
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self::mean_shifted(2.0)
    }
}

/// `size` events drawn from `mixture`, labelled `label`.
pub fn synth_generate(mixture: &Mixture, label: Label, size: usize, seed: u64) -> Result<Vec<EventRecord>> {
    mixture.validate()?;
    let mut rng = substream(seed, &format!("synth/{label}"));
    let total: f64 = mixture.components.iter().map(|c| c.weight).sum();
    (0..size)
        .map(|_| {
            let mut u = rng.gen::<f64>() * total;
            let comp = mixture
                .components
                .iter()
                .find(|c| {
                    u -= c.weight;
                    u < 0.0
                })
                .unwrap_or_else(|| mixture.components.last().unwrap());
            let features = comp
                .mean
                .iter()
                .zip(&comp.std)
                .map(|(m, s)| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    m + s * z
                })
                .collect();
            EventRecord::new(features, label)
        })
        .collect()
}
