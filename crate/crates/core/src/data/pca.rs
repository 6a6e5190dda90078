use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::record::EventRecord;
use crate::error::{Error, Result};

/// Principal components of the training covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d` orthonormal rows of length `mean.len()`, by descending variance.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Variance left in the discarded directions.
    pub residual_variance: f64,
}

/// Relative eigenvalue floor below which a direction counts as empty.
const RANK_TOL: f64 = 1e-10;

impl PcaModel {
    pub fn fit(train: &[EventRecord], d: usize) -> Result<Self> {
        let rows: Vec<&[f64]> = train.iter().map(|e| e.features.as_slice()).collect();
        Self::fit_rows(&rows, d)
    }

    pub fn fit_rows(rows: &[&[f64]], d: usize) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        if d == 0 || d > dim {
            return Err(Error::InvalidConfig(format!(
                "PCA dimension {d} must lie in 1..={dim}"
            )));
        }
        if rows.len() < d + 1 {
            return Err(Error::NotEnoughRecords {
                needed: d + 1,
                got: rows.len(),
            });
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v / n;
            }
        }
        let mut cov = DMatrix::<f64>::zeros(dim, dim);
        for r in rows {
            for i in 0..dim {
                let di = r[i] - mean[i];
                for j in i..dim {
                    cov[(i, j)] += di * (r[j] - mean[j]);
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let v = cov[(i, j)] / (n - 1.0);
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let top = eig.eigenvalues[order[0]].max(0.0);
        let rank = order
            .iter()
            .filter(|&&i| eig.eigenvalues[i] > RANK_TOL * top.max(f64::MIN_POSITIVE))
            .count();
        if rank < d {
            return Err(Error::RankDeficient { rank, requested: d });
        }
        let mut components = Vec::with_capacity(d);
        let mut explained_variance = Vec::with_capacity(d);
        for &k in &order[..d] {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            components.push(v);
            explained_variance.push(eig.eigenvalues[k].max(0.0));
        }
        let residual_variance = order[d..]
            .iter()
            .map(|&k| eig.eigenvalues[k].max(0.0))
            .sum();
        Ok(Self {
            mean,
            components,
            explained_variance,
            residual_variance,
        })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// `components · (x − mean)`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(x).zip(&self.mean).map(|((c, x), m)| c * (x - m)).sum())
            .collect()
    }

    /// `mean + componentsᵀ · coords`.
    pub fn reconstruct(&self, coords: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &a) in self.components.iter().zip(coords) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += a * v;
            }
        }
        out
    }
}
