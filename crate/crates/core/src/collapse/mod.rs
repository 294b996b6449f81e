//! Neural-collapse statistics of labeled features and classifier heads.
//!
//! With `h` a feature of class `c`, `mu_c` the class means, `mu_G` the global
//! mean and `C` the class count:
//!
//! * `Sigma_W` averages `(h - mu_c)(h - mu_c)^T` uniformly over all samples,
//! * `Sigma_B` averages `(mu_c - mu_G)(mu_c - mu_G)^T` uniformly over classes,
//! * `NC1 = Tr(Sigma_W Sigma_B^+) / C` with `^+` the Moore-Penrose pseudoinverse,
//! * `NC2` averages `|cos(mu_c, mu_c') + 1/(C-1)|` over ordered pairs `c != c'`.
//!
//! NC1 goes to zero as within-class variation vanishes; NC2 goes to zero when the
//! centers form a simplex equiangular tight frame.

mod features;
mod metrics;
mod statistics;

use thiserror::Error;

pub use features::FeatureMatrix;
pub use metrics::{
    affinity_matrix, mean_pairwise_cosine, nc1, nc2, nc2_nn, nearest_center, per_class_nc1,
    per_class_nc1_all, per_class_nc2, CenterSet, Nc1,
};
pub use statistics::{class_statistics, BetweenPinv, ClassStatistics};

/// Default relative eigenvalue cutoff for the pseudoinverse of `Sigma_B`.
pub const DEFAULT_RTOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum CollapseError {
    #[error("feature matrix has no samples")]
    NoSamples,
    #[error("label {label} at row {row} is outside [0, {classes})")]
    LabelOutOfRange { row: usize, label: u32, classes: usize },
    #[error("classes without samples: {0:?}")]
    EmptyClasses(Vec<u32>),
    #[error("{rows} labels for {features} feature rows")]
    ShapeMismatch { rows: usize, features: usize },
    #[error("center {0} is the zero vector")]
    ZeroCenter(usize),
    #[error("need at least {needed} centers, got {got}")]
    TooFewCenters { needed: usize, got: usize },
    #[error("class {0} out of range")]
    NoSuchClass(u32),
    #[error("relative tolerance must be positive")]
    BadTolerance,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("embedding file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
