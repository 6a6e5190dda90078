use std::io::Write;

use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::StatModel;
use crate::error::{Error, Result};
use crate::rng::{child_seed, rng_from, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum FisherMethod {
    /// `Σ_b ∇p_b ∇p_bᵀ / p_b` summed over every outcome.
    Exact,
    /// Average of `∇log p_b ∇log p_bᵀ` over outcomes drawn from `p(·|θ)`.
    Sampled { outcomes: usize },
}

impl Default for FisherMethod {
    fn default() -> Self {
        FisherMethod::Sampled { outcomes: 10_000 }
    }
}

/// Fisher matrices at sampled parameter points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisherEstimate {
    pub n_params: usize,
    pub thetas: Vec<Vec<f64>>,
    /// Row-major `P × P`, one per θ.
    pub matrices: Vec<Vec<f64>>,
    /// Sampled outcomes dropped because their probability was zero.
    pub skipped_outcomes: usize,
}

impl FisherEstimate {
    pub fn matrix(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n_params, self.n_params, &self.matrices[i])
    }

    pub fn mean_trace(&self) -> f64 {
        let p = self.n_params;
        let total: f64 = self
            .matrices
            .iter()
            .map(|m| (0..p).map(|i| m[i * p + i]).sum::<f64>())
            .sum();
        total / self.matrices.len() as f64
    }
}

/// Fisher matrix at one θ, and the number of skipped outcomes.
pub fn fisher_at(model: &dyn StatModel, theta: &[f64], method: FisherMethod, seed: u64) -> Result<(Vec<f64>, usize)> {
    let j = model.jacobian(theta)?;
    let p = model.n_params();
    let weights: Vec<f64> = match method {
        FisherMethod::Exact => j.probs.clone(),
        FisherMethod::Sampled { outcomes } => {
            if outcomes == 0 {
                return Err(Error::InvalidConfig("outcome sample count must be positive".into()));
            }
            let clipped: Vec<f64> = j.probs.iter().map(|&v| v.max(0.0)).collect();
            let dist = WeightedIndex::new(&clipped)
                .map_err(|e| Error::InvalidConfig(format!("outcome distribution: {e}")))?;
            let mut rng = rng_from(seed);
            let mut counts = vec![0usize; clipped.len()];
            for _ in 0..outcomes {
                counts[dist.sample(&mut rng)] += 1;
            }
            counts.iter().map(|&c| c as f64 / outcomes as f64).collect()
        }
    };
    let mut f = vec![0.0; p * p];
    let mut skipped = 0;
    for (b, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let pb = j.probs[b];
        if !(pb > 0.0) {
            skipped += 1;
            continue;
        }
        let score: Vec<f64> = j.grads[b].iter().map(|g| g / pb).collect();
        for r in 0..p {
            if score[r] == 0.0 {
                continue;
            }
            for c in 0..p {
                f[r * p + c] += w * score[r] * score[c];
            }
        }
    }
    Ok((f, skipped))
}

/// Fisher matrices at `n_theta` points drawn uniformly from the model's domain.
pub fn empirical_fisher(model: &dyn StatModel, n_theta: usize, method: FisherMethod, seed: u64) -> Result<FisherEstimate> {
    if n_theta == 0 {
        return Err(Error::InvalidConfig("at least one parameter sample is needed".into()));
    }
    let mut rng = substream(seed, "theta");
    let thetas: Vec<Vec<f64>> = (0..n_theta)
        .map(|_| model.domain().sample(model.n_params(), &mut rng))
        .collect();
    empirical_fisher_at(model, thetas, method, seed)
}

pub fn empirical_fisher_at(
    model: &dyn StatModel,
    thetas: Vec<Vec<f64>>,
    method: FisherMethod,
    seed: u64,
) -> Result<FisherEstimate> {
    let base_seed = rand::RngCore::next_u64(&mut substream(seed, "outcomes"));
    let results: Vec<(Vec<f64>, usize)> = thetas
        .par_iter()
        .enumerate()
        .map(|(i, t)| fisher_at(model, t, method, child_seed(base_seed, i as u64)))
        .collect::<Result<_>>()?;
    let skipped_outcomes = results.iter().map(|r| r.1).sum();
    if skipped_outcomes > 0 {
        log::warn!("{skipped_outcomes} zero-probability outcomes skipped");
    }
    Ok(FisherEstimate {
        n_params: model.n_params(),
        thetas,
        matrices: results.into_iter().map(|r| r.0).collect(),
        skipped_outcomes,
    })
}

/// `κ = γ n / (2π ln n)`.
pub fn kappa(gamma: f64, n_data: usize) -> f64 {
    let n = n_data as f64;
    gamma * n / (2.0 * std::f64::consts::PI * n.ln())
}

/// `log det(I + κ F)` for symmetric positive semidefinite `F`.
pub fn log_det_shifted(f: &DMatrix<f64>, kappa: f64) -> f64 {
    let m = DMatrix::identity(f.nrows(), f.ncols()) + f * kappa;
    match m.clone().cholesky() {
        Some(c) => 2.0 * c.l().diagonal().iter().map(|v| v.ln()).sum::<f64>(),
        None => m
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|v| v.max(f64::MIN_POSITIVE).ln())
            .sum(),
    }
}

/// `2 log( mean_θ √det(I + κ F̂(θ)) ) / log κ`, with `F̂` scaled so that its
/// mean trace over the samples equals `P`.
pub fn effective_dimension(est: &FisherEstimate, gamma: f64, n_data: usize) -> Result<f64> {
    if est.matrices.is_empty() {
        return Err(Error::InvalidConfig("no Fisher samples".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) || n_data < 2 {
        return Err(Error::InvalidConfig(format!("gamma {gamma}, n_data {n_data}")));
    }
    let k = kappa(gamma, n_data);
    if !(k > 1.0) {
        return Err(Error::KappaTooSmall(k));
    }
    let mean_trace = est.mean_trace();
    if mean_trace == 0.0 {
        return Ok(0.0);
    }
    let scale = est.n_params as f64 / mean_trace;
    let halves: Vec<f64> = (0..est.matrices.len())
        .map(|i| 0.5 * log_det_shifted(&(est.matrix(i) * scale), k))
        .collect();
    let max = halves.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lme = max + (halves.iter().map(|h| (h - max).exp()).sum::<f64>() / halves.len() as f64).ln();
    Ok(2.0 * lme / k.ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Quantum,
    Classical,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Quantum => "quantum",
            ModelKind::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffdimRow {
    pub n_features: usize,
    pub model_kind: ModelKind,
    pub param_count: usize,
    pub effective_dimension: f64,
    pub gamma: f64,
    pub n_data: usize,
    pub seeds: String,
}

pub fn write_effdim_csv<W: Write>(rows: &[EffdimRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n_features", "model_kind", "param_count", "effective_dimension", "gamma", "n_data", "seeds"])?;
    for r in rows {
        w.write_record([
            r.n_features.to_string(),
            r.model_kind.as_str().to_string(),
            r.param_count.to_string(),
            format!("{:?}", r.effective_dimension),
            format!("{:?}", r.gamma),
            r.n_data.to_string(),
            r.seeds.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effdim::model::{Jacobian, ParamDomain};
    use crate::sim::{Circuit, Gate};
    use crate::effdim::QuantumBornModel;
    use proptest::prelude::*;

    struct Constant;

    impl StatModel for Constant {
        fn n_params(&self) -> usize {
            2
        }
        fn n_outcomes(&self) -> usize {
            3
        }
        fn domain(&self) -> ParamDomain {
            ParamDomain::symmetric(1.0)
        }
        fn probabilities(&self, _: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![0.2, 0.0, 0.8])
        }
        fn jacobian(&self, t: &[f64]) -> Result<Jacobian> {
            Ok(Jacobian { probs: self.probabilities(t)?, grads: vec![vec![0.0; 2]; 3] })
        }
    }

    fn single_ry() -> QuantumBornModel<f64> {
        let mut c = Circuit::new(1);
        c.push_param("t", |a| Gate::Ry(0, a)).unwrap();
        QuantumBornModel { circuit: c, domain: ParamDomain::symmetric(std::f64::consts::PI) }
    }

    #[test]
    fn constant_model_has_zero_fisher() {
        let est = empirical_fisher(&Constant, 5, FisherMethod::Exact, 1).unwrap();
        assert!(est.matrices.iter().all(|m| m.iter().all(|v| *v == 0.0)));
        assert_eq!(effective_dimension(&est, 1.0, 100).unwrap(), 0.0);
    }

    #[test]
    fn bernoulli_fisher_is_one() {
        let m = single_ry();
        for theta in [0.3, 1.0, 2.0, -2.5] {
            let (f, _) = fisher_at(&m, &[theta], FisherMethod::Exact, 0).unwrap();
            assert!((f[0] - 1.0).abs() < 1e-12, "{}", f[0]);
            // any sampled outcome has score² = tan² or cot², averaging to 1
            let (fs, _) = fisher_at(&m, &[theta], FisherMethod::Sampled { outcomes: 200_000 }, 3).unwrap();
            assert!((fs[0] - 1.0).abs() < 0.05, "{}", fs[0]);
        }
    }

    #[test]
    fn identity_closed_form() {
        for p in [1, 4, 12] {
            let mut eye = vec![0.0; p * p];
            for i in 0..p {
                eye[i * p + i] = 1.0;
            }
            let est = FisherEstimate { n_params: p, thetas: vec![vec![]; 3], matrices: vec![eye; 3], skipped_outcomes: 0 };
            for (gamma, n) in [(1.0, 100), (0.5, 1000), (1.0, 100_000)] {
                let k = kappa(gamma, n);
                let want = p as f64 * (1.0 + k).ln() / k.ln();
                assert!((effective_dimension(&est, gamma, n).unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn kappa_must_exceed_one() {
        let est = FisherEstimate { n_params: 1, thetas: vec![vec![]], matrices: vec![vec![1.0]], skipped_outcomes: 0 };
        assert!(matches!(effective_dimension(&est, 0.01, 10), Err(Error::KappaTooSmall(_))));
    }

    proptest! {
        #[test]
        fn bounded_by_equal_trace_value(
            seed in 0u64..1000,
            p in 1usize..6,
            n_theta in 1usize..6,
        ) {
            // random Gram matrices: PSD, arbitrary spectra
            let mut r = rng_from(seed);
            let mats: Vec<Vec<f64>> = (0..n_theta)
                .map(|_| {
                    let a = DMatrix::<f64>::from_fn(p, p, |_, _| rand::Rng::gen_range(&mut r, -1.0..1.0));
                    let g = &a * a.transpose();
                    g.transpose().as_slice().to_vec()
                })
                .collect();
            let est = FisherEstimate { n_params: p, thetas: vec![vec![]; n_theta], matrices: mats, skipped_outcomes: 0 };
            let k = kappa(1.0, 100);
            let d = effective_dimension(&est, 1.0, 100).unwrap();
            prop_assert!(d >= 0.0);
            prop_assert!(d <= p as f64 * (1.0 + k).ln() / k.ln() + 1e-9);
            for m in 0..n_theta {
                let eig = est.matrix(m).symmetric_eigen().eigenvalues;
                prop_assert!(eig.iter().all(|v| *v >= -1e-9));
            }
        }
    }

    #[test]
    fn sampled_estimates_are_psd_and_converge() {
        let m = QuantumBornModel::<f64>::generator(crate::ansatz::GeneratorSpec { n_qubits: 3, depth: 3 }).unwrap();
        let a = empirical_fisher(&m, 10, FisherMethod::Sampled { outcomes: 10_000 }, 2).unwrap();
        let b = empirical_fisher(&m, 10, FisherMethod::Sampled { outcomes: 20_000 }, 2).unwrap();
        assert_eq!(a.thetas, b.thetas);
        let (ta, tb) = (a.mean_trace(), b.mean_trace());
        assert!((ta - tb).abs() / tb < 0.05, "{ta} vs {tb}");
        for i in 0..a.matrices.len() {
            let mtx = a.matrix(i);
            assert!((&mtx - mtx.transpose()).abs().max() < 1e-12);
            assert!(mtx.symmetric_eigen().eigenvalues.iter().all(|v| *v >= -1e-9));
        }
    }

    #[test]
    fn invariant_under_outcome_relabeling() {
        struct Permuted<'a>(&'a dyn StatModel, Vec<usize>);
        impl StatModel for Permuted<'_> {
            fn n_params(&self) -> usize {
                self.0.n_params()
            }
            fn n_outcomes(&self) -> usize {
                self.0.n_outcomes()
            }
            fn domain(&self) -> ParamDomain {
                self.0.domain()
            }
            fn probabilities(&self, t: &[f64]) -> Result<Vec<f64>> {
                let p = self.0.probabilities(t)?;
                Ok(self.1.iter().map(|&i| p[i]).collect())
            }
            fn jacobian(&self, t: &[f64]) -> Result<Jacobian> {
                let j = self.0.jacobian(t)?;
                Ok(Jacobian {
                    probs: self.1.iter().map(|&i| j.probs[i]).collect(),
                    grads: self.1.iter().map(|&i| j.grads[i].clone()).collect(),
                })
            }
        }
        let m = QuantumBornModel::<f64>::generator(crate::ansatz::GeneratorSpec { n_qubits: 2, depth: 2 }).unwrap();
        let perm = Permuted(&m, vec![3, 0, 2, 1]);
        let a = effective_dimension(&empirical_fisher(&m, 8, FisherMethod::Exact, 4).unwrap(), 1.0, 100).unwrap();
        let b = effective_dimension(&empirical_fisher(&perm, 8, FisherMethod::Exact, 4).unwrap(), 1.0, 100).unwrap();
        assert!((a - b).abs() < 1e-9);
    }
}
