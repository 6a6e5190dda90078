use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-coordinate affine map of the training range `[min, max]` onto `[−π/2, π/2]`.
///
/// Constant coordinates map to 0. Values outside the training range are not clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeNormalizer {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl RangeNormalizer {
    pub fn fit(coords: &[Vec<f64>]) -> Result<Self> {
        let d = coords.first().ok_or(Error::EmptyBatch)?.len();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for c in coords {
            if c.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: c.len(),
                });
            }
            for i in 0..d {
                min[i] = min[i].min(c[i]);
                max[i] = max[i].max(c[i]);
            }
        }
        Ok(Self { min, max })
    }

    fn degenerate(&self, i: usize) -> bool {
        let span = self.max[i] - self.min[i];
        span <= 1e-12 * self.max[i].abs().max(self.min[i].abs()).max(1.0)
    }

    pub fn apply(&self, coords: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.degenerate(i) {
                    0.0
                } else {
                    -FRAC_PI_2 + std::f64::consts::PI * (v - self.min[i]) / (self.max[i] - self.min[i])
                }
            })
            .collect()
    }

    /// Inverse map; degenerate coordinates return the training value.
    pub fn invert(&self, angles: &[f64]) -> Vec<f64> {
        angles
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if self.degenerate(i) {
                    self.min[i]
                } else {
                    self.min[i] + (a + FRAC_PI_2) / std::f64::consts::PI * (self.max[i] - self.min[i])
                }
            })
            .collect()
    }
}
