//! Desk-scale replication harness for dynamic-vocabulary training.
//!
//! A linear encoder and a prototypical head (unit-norm features and prototypes,
//! logits scaled by a learnable temperature capped at 100) are trained with plain
//! gradient descent on Zipf-imbalanced Gaussian clusters. Each step classifies
//! either over all classes or over a sampled vocabulary. Prototypes are learned
//! or frozen at the true class geometry.
//!
//! Everything is single-threaded and seeded, so a run is bit-reproducible.

mod config;
mod data;
mod eval;
mod model;
mod train;

use thiserror::Error;

pub use config::{ExperimentConfig, PrototypeMode, SyntheticSpec, TailTrim, TrainConfig};
pub use data::{generate_dataset, SyntheticData};
pub use eval::{evaluate, Evaluation};
pub use model::{forward, loss_and_grads, Gradients, ToyModel, MAX_TEMPERATURE};
pub use train::{oracle_prototypes, run_experiment, train, write_run_dir, EpochRecord, TrainedRun};

#[derive(Debug, Error)]
pub enum ToyError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("non-finite loss at step {step}")]
    Diverged { step: u64 },
    #[error("label {0} is not in the step vocabulary")]
    LabelOutsideVocabulary(u32),
    #[error(transparent)]
    Sampler(#[from] crate::sampler::SamplerError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error(transparent)]
    Collapse(#[from] crate::collapse::CollapseError),
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
