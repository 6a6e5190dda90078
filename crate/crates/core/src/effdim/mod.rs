//! Fisher information and effective dimension of generative models.

mod fisher;
mod model;

pub use fisher::{
    effective_dimension, empirical_fisher, empirical_fisher_at, fisher_at, kappa, log_det_shifted,
    write_effdim_csv, EffdimRow, FisherEstimate, FisherMethod, ModelKind,
};
pub use model::{BinnedClassicalModel, Jacobian, ParamDomain, QuantumBornModel, StatModel};
