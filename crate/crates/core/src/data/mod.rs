//! Event ingestion, PCA compression, range normalization, angle encoding and
//! synthetic surrogate data.

mod encode;
mod normalize;
mod pca;
mod record;
mod synth;

pub use encode::{encode_angles, transform, EncodedEvent, Preprocessor};
pub use normalize::RangeNormalizer;
pub use pca::PcaModel;
pub use record::{load_csv, read_csv, sample_subset, save_csv, write_csv, EventRecord, Label, N_FEATURES};
pub use synth::{synth_generate, GaussianComponent, Mixture, SynthConfig};
