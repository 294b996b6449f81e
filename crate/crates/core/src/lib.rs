//! Diagnostics for class imbalance in vision-language style training.
//!
//! * [`matcher`] estimates per-class frequencies in caption corpora.
//! * [`stats`] correlates per-class model statistics with those frequencies.
//! * [`collapse`] computes neural-collapse metrics of features and classifier heads.
//! * [`sampler`] builds dynamic training vocabularies and prototype subsets.
//! * [`toy`] is a small deterministic harness training a prototypical classifier on
//!   Zipf-imbalanced synthetic data, with full or subsampled vocabularies.
//! * [`commands`] implements the `imbalance` command-line tool on top of the above.

pub mod collapse;
pub mod commands;
pub mod frequency;
pub mod matcher;
pub mod sampler;
pub mod stats;
pub mod toy;

pub use frequency::FrequencyTable;
