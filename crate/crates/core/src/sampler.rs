//! Dynamic training vocabularies.
//!
//! Each training step classifies over a subset of the classes: the union of the
//! batch's ground-truth labels, completed to a target size by drawing further
//! classes without replacement, with probability proportional to class
//! frequency (or uniformly). The same module provides uniform prototype
//! subsampling for self-distillation heads.
//!
//! All randomness comes from a ChaCha stream keyed by an explicit seed, so a
//! sample is a pure function of its inputs on every platform.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SamplerError {
    #[error("ground-truth label {label} is outside [0, {classes})")]
    LabelOutOfRange { label: u32, classes: usize },
    #[error("target size {target} exceeds class count {classes}")]
    TargetTooLarge { target: usize, classes: usize },
    #[error("target size must be at least 1")]
    ZeroTarget,
    #[error("batch has no ground-truth labels")]
    EmptyBatch,
    #[error("sample size {sample} exceeds total {total}")]
    SampleTooLarge { sample: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Completion classes drawn with probability proportional to frequency.
    #[default]
    Frequency,
    /// Every completion class equally likely.
    Uniform,
}

impl std::str::FromStr for SamplingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frequency" => Ok(Self::Frequency),
            "uniform" => Ok(Self::Uniform),
            other => Err(format!("unknown sampling mode `{other}` (frequency|uniform)")),
        }
    }
}

/// Classes available to one training step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VocabularySample {
    /// Ascending class ids.
    pub class_ids: Vec<u32>,
    /// Ascending ground-truth classes of the batch; a subset of `class_ids`.
    pub forced: Vec<u32>,
    pub seed_used: u64,
}

impl VocabularySample {
    /// Every class in `0..classes`, all treated as forced.
    pub fn full(classes: usize) -> Self {
        let ids: Vec<u32> = (0..classes as u32).collect();
        Self { class_ids: ids.clone(), forced: ids, seed_used: 0 }
    }

    pub fn len(&self) -> usize {
        self.class_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class_ids.is_empty()
    }

    pub fn contains(&self, class: u32) -> bool {
        self.class_ids.binary_search(&class).is_ok()
    }

    /// Column of `class` in restricted logits.
    pub fn position(&self, class: u32) -> Option<usize> {
        self.class_ids.binary_search(&class).ok()
    }

    pub fn is_forced(&self, class: u32) -> bool {
        self.forced.binary_search(&class).is_ok()
    }
}

/// Generator for a seed. Distinct seeds give independent streams.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Per-step seed derived from a run seed and a step index (splitmix64 finalizer
/// over both), so that streams depend on the step and never on worker layout.
pub fn step_seed(run_seed: u64, step: u64) -> u64 {
    let mut z =
        run_seed.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(step.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `count` entries from `pool` without replacement, one at a time, each
/// with probability `weight / remaining total weight`. All weights must be > 0.
fn sequential_weighted_draws(pool: &mut Vec<(u32, u128)>, count: usize, rng: &mut ChaCha8Rng) -> Vec<u32> {
    let mut total: u128 = pool.iter().map(|&(_, w)| w).sum();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut r = rng.random_range(0..total);
        let mut pick = pool.len() - 1;
        for (i, &(_, w)) in pool.iter().enumerate() {
            if r < w {
                pick = i;
                break;
            }
            r -= w;
        }
        let (class, w) = pool.remove(pick);
        total -= w;
        out.push(class);
    }
    out
}

/// Ground-truth union of the batch plus `target_size - |union|` further classes.
///
/// `freq[c]` is the training frequency of class `c`; `freq.len()` is the class
/// count. In frequency mode classes with zero frequency are only drawn when
/// fewer than the needed number of classes have positive frequency; the
/// shortfall is then filled uniformly from the zero-frequency classes.
pub fn sample_vocabulary(
    gt_labels: &[u32],
    freq: &[u64],
    target_size: usize,
    mode: SamplingMode,
    seed: u64,
) -> Result<VocabularySample, SamplerError> {
    let classes = freq.len();
    if target_size == 0 {
        return Err(SamplerError::ZeroTarget);
    }
    if target_size > classes {
        return Err(SamplerError::TargetTooLarge { target: target_size, classes });
    }
    if gt_labels.is_empty() {
        return Err(SamplerError::EmptyBatch);
    }
    if let Some(&label) = gt_labels.iter().find(|&&l| l as usize >= classes) {
        return Err(SamplerError::LabelOutOfRange { label, classes });
    }

    let mut forced = gt_labels.to_vec();
    forced.sort_unstable();
    forced.dedup();
    let need = target_size.saturating_sub(forced.len());

    let mut class_ids = forced.clone();
    if need > 0 {
        let mut rng = rng_from_seed(seed);
        let mut is_forced = vec![false; classes];
        for &c in &forced {
            is_forced[c as usize] = true;
        }
        let rest = (0..classes as u32).filter(|&c| !is_forced[c as usize]);
        let drawn = match mode {
            SamplingMode::Uniform => {
                let mut pool: Vec<(u32, u128)> = rest.map(|c| (c, 1)).collect();
                sequential_weighted_draws(&mut pool, need, &mut rng)
            }
            SamplingMode::Frequency => {
                let (mut positive, mut zero): (Vec<_>, Vec<_>) =
                    rest.map(|c| (c, freq[c as usize] as u128)).partition(|&(_, w)| w > 0);
                if positive.len() >= need {
                    sequential_weighted_draws(&mut positive, need, &mut rng)
                } else {
                    let shortfall = need - positive.len();
                    let mut all: Vec<u32> = positive.iter().map(|&(c, _)| c).collect();
                    for entry in &mut zero {
                        entry.1 = 1;
                    }
                    all.extend(sequential_weighted_draws(&mut zero, shortfall, &mut rng));
                    all
                }
            }
        };
        class_ids.extend(drawn);
        class_ids.sort_unstable();
    }

    Ok(VocabularySample { class_ids, forced, seed_used: seed })
}

/// Uniform sample of `sample_size` distinct indices from `0..total`, ascending.
/// One call per training step; the set is shared by all branches of the model.
pub fn subsample_prototypes(total: usize, sample_size: usize, seed: u64) -> Result<Vec<usize>, SamplerError> {
    if sample_size == 0 {
        return Err(SamplerError::ZeroTarget);
    }
    if sample_size > total {
        return Err(SamplerError::SampleTooLarge { sample: sample_size, total });
    }
    let mut rng = rng_from_seed(seed);
    let mut picked = index::sample(&mut rng, total, sample_size).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

/// Keeps the logit columns of the vocabulary's classes, in ascending class order.
/// The returned map gives the original class id of each kept column.
pub fn restrict_logits(logits: &DMatrix<f64>, vocab: &VocabularySample) -> (DMatrix<f64>, Vec<u32>) {
    let cols: Vec<usize> = vocab.class_ids.iter().map(|&c| c as usize).collect();
    (logits.select_columns(&cols), vocab.class_ids.clone())
}

/// Writes restricted columns back into a `B x C` matrix (other entries untouched).
pub fn scatter_columns(restricted: &DMatrix<f64>, map: &[u32], into: &mut DMatrix<f64>) {
    for (k, &c) in map.iter().enumerate() {
        into.set_column(c as usize, &restricted.column(k));
    }
}
