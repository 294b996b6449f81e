use serde::{Deserialize, Serialize};

use super::ToyError;
use crate::sampler::SamplingMode;

/// Trim the last `classes` classes (least frequent) to `shots` training samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailTrim {
    pub classes: usize,
    pub shots: usize,
}

/// Synthetic imbalanced dataset: `classes` unit-sphere means in `feature_dim`
/// dimensions, class `c` (0-based) getting `max(1, round(n_head * (c+1)^-alpha))`
/// training samples, isotropic Gaussian noise, balanced test split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub classes: usize,
    pub feature_dim: usize,
    pub zipf_alpha: f64,
    pub n_head: usize,
    pub noise_sigma: f64,
    #[serde(default)]
    pub tail_trim: Option<TailTrim>,
    #[serde(default = "default_test_per_class")]
    pub test_per_class: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_test_per_class() -> usize {
    50
}

impl SyntheticSpec {
    /// C=100, D=32, alpha=1.5, n_head=500, sigma=0.35.
    pub fn reference(seed: u64) -> Self {
        Self {
            classes: 100,
            feature_dim: 32,
            zipf_alpha: 1.5,
            n_head: 500,
            noise_sigma: 0.35,
            tail_trim: None,
            test_per_class: 50,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ToyError> {
        let fail = |m: &str| Err(ToyError::Invalid(m.to_string()));
        if self.classes < 2 {
            return fail("classes must be at least 2");
        }
        if self.feature_dim == 0 {
            return fail("feature_dim must be positive");
        }
        if !(self.zipf_alpha >= 0.0 && self.zipf_alpha.is_finite()) {
            return fail("zipf_alpha must be finite and >= 0");
        }
        if self.n_head == 0 {
            return fail("n_head must be positive");
        }
        if !(self.noise_sigma > 0.0 && self.noise_sigma.is_finite()) {
            return fail("noise_sigma must be finite and > 0");
        }
        if self.test_per_class == 0 {
            return fail("test_per_class must be positive");
        }
        if let Some(trim) = self.tail_trim {
            if trim.classes >= self.classes {
                return fail("tail_trim.classes must be smaller than classes");
            }
            if trim.shots > 1 {
                return fail("tail_trim.shots must be 0 or 1");
            }
        }
        Ok(())
    }

    /// Training-set size per class after the Zipf law and tail trimming.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = (0..self.classes)
            .map(|c| {
                let n = self.n_head as f64 * ((c + 1) as f64).powf(-self.zipf_alpha);
                (n.round() as usize).max(1)
            })
            .collect();
        if let Some(trim) = self.tail_trim {
            for size in &mut sizes[self.classes - trim.classes..] {
                *size = trim.shots;
            }
        }
        sizes
    }

    /// Classes reported as "tail": the trimmed classes, or the least frequent
    /// fifth of the classes when nothing is trimmed.
    pub fn tail_classes(&self) -> Vec<u32> {
        let k = match self.tail_trim {
            Some(trim) if trim.classes > 0 => trim.classes,
            _ => self.classes.div_ceil(5),
        };
        ((self.classes - k) as u32..self.classes as u32).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrototypeMode {
    #[default]
    Learned,
    /// Prototypes fixed at the true class means, never updated.
    FrozenOracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    /// Prototype (embedding) dimension `d`.
    pub proto_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Classes per training step; `None` trains over all classes.
    #[serde(default)]
    pub vocab_size: Option<usize>,
    #[serde(default)]
    pub vocab_mode: SamplingMode,
    #[serde(default)]
    pub prototype_mode: PrototypeMode,
    #[serde(default)]
    pub seed: u64,
}

impl TrainConfig {
    pub fn reference(seed: u64) -> Self {
        Self {
            proto_dim: 16,
            epochs: 30,
            batch_size: 32,
            learning_rate: 1.0,
            vocab_size: None,
            vocab_mode: SamplingMode::Frequency,
            prototype_mode: PrototypeMode::Learned,
            seed,
        }
    }

    pub fn validate(&self, spec: &SyntheticSpec, train_size: usize) -> Result<(), ToyError> {
        let fail = |m: String| Err(ToyError::Invalid(m));
        if self.proto_dim == 0 {
            return fail("proto_dim must be positive".into());
        }
        if self.batch_size == 0 || self.batch_size > train_size {
            return fail(format!("batch_size must be in 1..={train_size} (training-set size)"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be finite and > 0".into());
        }
        if let Some(v) = self.vocab_size {
            if v == 0 || v > spec.classes {
                return fail(format!("vocab_size must be in 1..={}", spec.classes));
            }
        }
        Ok(())
    }
}

/// The experiment document: `{"data": SyntheticSpec, "train": TrainConfig}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: SyntheticSpec,
    pub train: TrainConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ToyError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_law_when_alpha_zero() {
        let spec = SyntheticSpec { zipf_alpha: 0.0, ..SyntheticSpec::reference(0) };
        assert!(spec.class_sizes().iter().all(|&n| n == 500));
    }

    #[test]
    fn trimmed_tail() {
        let spec = SyntheticSpec {
            tail_trim: Some(TailTrim { classes: 5, shots: 0 }),
            ..SyntheticSpec::reference(0)
        };
        let sizes = spec.class_sizes();
        assert!(sizes[95..].iter().all(|&n| n == 0));
        assert!(sizes[..95].iter().all(|&n| n >= 1));
        assert_eq!(spec.tail_classes(), (95..100).collect::<Vec<u32>>());
    }

    #[test]
    fn invalid_specs() {
        let bad_trim = SyntheticSpec {
            tail_trim: Some(TailTrim { classes: 100, shots: 1 }),
            ..SyntheticSpec::reference(0)
        };
        assert!(bad_trim.validate().is_err());
        let bad_sigma = SyntheticSpec { noise_sigma: 0.0, ..SyntheticSpec::reference(0) };
        assert!(bad_sigma.validate().is_err());
    }

    #[test]
    fn parses_document() {
        let doc = r#"{
            "data": {"classes": 10, "feature_dim": 8, "zipf_alpha": 1.0, "n_head": 50,
                     "noise_sigma": 0.3, "tail_trim": {"classes": 2, "shots": 1}, "seed": 4},
            "train": {"proto_dim": 4, "epochs": 2, "batch_size": 8, "learning_rate": 0.5,
                      "vocab_size": 3, "vocab_mode": "uniform", "prototype_mode": "frozen_oracle"}
        }"#;
        let cfg = ExperimentConfig::from_json(doc).unwrap();
        assert_eq!(cfg.data.test_per_class, 50);
        assert_eq!(cfg.train.vocab_mode, SamplingMode::Uniform);
        assert_eq!(cfg.train.prototype_mode, PrototypeMode::FrozenOracle);
        assert!(ExperimentConfig::from_json(r#"{"data": {}, "train": {}}"#).is_err());
    }
}
