//! Goodness-of-fit testing for time-series generative models through
//! recurrent history embeddings.
//!
//! A recurrent network is trained on a reference sequence. Its hidden-state
//! trajectories on the reference and on a candidate sequence are binned into
//! discrete states, and the two empirical transition matrices are compared
//! with a chi-square statistic.

pub mod baselines;
pub mod embedding;
pub mod error;
pub mod generators;
pub mod gof;
pub mod harness;
pub mod rng;
pub mod sequence;

pub use embedding::{train, EmbeddingModel, TrainConfig};
pub use error::{RenalError, Result};
pub use gof::{run_renal_test, BinGrid, BinSelectionConfig, Embeddings, TestReport};
pub use sequence::{ObservationSequence, SequenceKind};
