use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{SyntheticSpec, ToyError};
use crate::collapse::FeatureMatrix;
use crate::frequency::FrequencyTable;
use crate::sampler::{rng_from_seed, step_seed};

/// Generated train/test split plus the ground truth it was drawn from.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub train: FeatureMatrix,
    pub test: FeatureMatrix,
    /// Realized training count per class.
    pub freq: FrequencyTable,
    /// `C x D` true class means (unit norm).
    pub class_means: DMatrix<f64>,
    pub tail_classes: Vec<u32>,
}

const MEANS_STREAM: u64 = 0;
const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;

fn draw_split(means: &DMatrix<f64>, sizes: &[usize], sigma: f64, seed: u64) -> (DMatrix<f64>, Vec<u32>) {
    let mut rng = rng_from_seed(seed);
    let n: usize = sizes.iter().sum();
    let d = means.ncols();
    let mut x = DMatrix::zeros(n, d);
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for (c, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            for j in 0..d {
                let noise: f64 = rng.sample(StandardNormal);
                x[(row, j)] = means[(c, j)] + sigma * noise;
            }
            labels.push(c as u32);
            row += 1;
        }
    }
    (x, labels)
}

/// Draws class means uniformly on the unit sphere, then training samples per the
/// (trimmed) Zipf sizes and `test_per_class` test samples for every class.
/// Means, train and test use independent streams of `spec.seed`.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<SyntheticData, ToyError> {
    spec.validate()?;
    let (c, d) = (spec.classes, spec.feature_dim);

    let mut rng = rng_from_seed(step_seed(spec.seed, MEANS_STREAM));
    let mut means = DMatrix::zeros(c, d);
    for k in 0..c {
        loop {
            for j in 0..d {
                means[(k, j)] = rng.sample(StandardNormal);
            }
            let norm = means.row(k).norm();
            if norm > 1e-12 {
                means.row_mut(k).unscale_mut(norm);
                break;
            }
        }
    }

    let sizes = spec.class_sizes();
    let (train_x, train_y) = draw_split(&means, &sizes, spec.noise_sigma, step_seed(spec.seed, TRAIN_STREAM));
    let test_sizes = vec![spec.test_per_class; c];
    let (test_x, test_y) =
        draw_split(&means, &test_sizes, spec.noise_sigma, step_seed(spec.seed, TEST_STREAM));

    let counts: Vec<u64> = sizes.iter().map(|&n| n as u64).collect();
    Ok(SyntheticData {
        train: FeatureMatrix::new(train_x, train_y, c)?,
        test: FeatureMatrix::new(test_x, test_y, c)?,
        freq: FrequencyTable::from_dense(&counts),
        class_means: means,
        tail_classes: spec.tail_classes(),
    })
}
