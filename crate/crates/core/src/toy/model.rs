use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{PrototypeMode, ToyError};
use crate::sampler::{rng_from_seed, VocabularySample};

/// Upper bound of the logit scale.
pub const MAX_TEMPERATURE: f64 = 100.0;

/// Linear encoder plus prototypical head.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    /// `d x D`: maps a `D`-dim input to the `d`-dim prototype space.
    pub encoder: DMatrix<f64>,
    /// `C x d`.
    pub prototypes: DMatrix<f64>,
    pub log_temperature: f64,
    pub prototype_mode: PrototypeMode,
}

impl ToyModel {
    /// Random encoder with `N(0, 1/D)` entries, temperature 10, and either random
    /// `N(0, 1/d)` prototypes or prototypes given by `oracle_prototypes`.
    pub fn init(
        input_dim: usize,
        proto_dim: usize,
        classes: usize,
        mode: PrototypeMode,
        oracle_prototypes: Option<&DMatrix<f64>>,
        seed: u64,
    ) -> Result<Self, ToyError> {
        let mut rng = rng_from_seed(seed);
        let scale = (input_dim as f64).sqrt().recip();
        let encoder =
            DMatrix::from_fn(proto_dim, input_dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let prototypes = match (mode, oracle_prototypes) {
            (PrototypeMode::FrozenOracle, Some(p)) => {
                if p.shape() != (classes, proto_dim) {
                    return Err(ToyError::Invalid("oracle prototypes have the wrong shape".into()));
                }
                p.clone()
            }
            (PrototypeMode::FrozenOracle, None) => {
                return Err(ToyError::Invalid("frozen_oracle mode needs oracle prototypes".into()))
            }
            (PrototypeMode::Learned, _) => {
                let scale = (proto_dim as f64).sqrt().recip();
                DMatrix::from_fn(classes, proto_dim, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
            }
        };
        Ok(Self { encoder, prototypes, log_temperature: 10f64.ln(), prototype_mode: mode })
    }

    pub fn classes(&self) -> usize {
        self.prototypes.nrows()
    }

    /// `min(exp(log_temperature), 100)`.
    pub fn temperature(&self) -> f64 {
        self.log_temperature.exp().min(MAX_TEMPERATURE)
    }

    pub fn temperature_capped(&self) -> bool {
        self.log_temperature.exp() > MAX_TEMPERATURE
    }

    /// Unit-normalized encoder outputs for `x` (`B x D`); zero rows stay zero.
    pub fn embed(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (unit, _) = normalize_rows(&(x * self.encoder.transpose()));
        unit
    }
}

/// Row-normalized copy and the row norms. A zero row is left as zero.
pub(crate) fn normalize_rows(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>) {
    let mut unit = m.clone();
    let mut norms = DVector::zeros(m.nrows());
    for (i, mut row) in unit.row_iter_mut().enumerate() {
        let n = row.norm();
        norms[i] = n;
        if n > 0.0 {
            row /= n;
        }
    }
    (unit, norms)
}

/// `tau * cos(encoder x_b, prototype_c)` for every row of `x` and every class.
pub fn forward(model: &ToyModel, x: &DMatrix<f64>) -> DMatrix<f64> {
    let u = model.embed(x);
    let (q, _) = normalize_rows(&model.prototypes);
    (u * q.transpose()) * model.temperature()
}

/// Gradients of the mean cross-entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub encoder: DMatrix<f64>,
    /// `C x d`, zero outside the step vocabulary; `None` for frozen prototypes.
    pub prototypes: Option<DMatrix<f64>>,
    pub log_temperature: f64,
}

/// Backpropagates `d(loss)/d(unit rows)` through row normalization.
fn through_normalization(
    unit: &DMatrix<f64>,
    norms: &DVector<f64>,
    grad_unit: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(unit.nrows(), unit.ncols());
    for i in 0..unit.nrows() {
        if norms[i] == 0.0 {
            continue;
        }
        let u = unit.row(i);
        let g = grad_unit.row(i);
        let radial = u.dot(&g);
        out.set_row(i, &((g - u * radial) / norms[i]));
    }
    out
}

/// Mean softmax cross-entropy of `labels` over the vocabulary's classes, and its
/// exact gradients.
///
/// Gradients include the normalization Jacobians of features and prototypes.
/// When the temperature is capped its gradient is zero. Prototypes outside the
/// vocabulary get exactly zero gradient.
pub fn loss_and_grads(
    model: &ToyModel,
    x: &DMatrix<f64>,
    labels: &[u32],
    vocab: &VocabularySample,
) -> Result<(f64, Gradients), ToyError> {
    let b = x.nrows();
    let targets: Vec<usize> = labels
        .iter()
        .map(|&l| vocab.position(l).ok_or(ToyError::LabelOutsideVocabulary(l)))
        .collect::<Result<_, _>>()?;
    let cols: Vec<usize> = vocab.class_ids.iter().map(|&c| c as usize).collect();

    let z = x * model.encoder.transpose();
    let (u, z_norms) = normalize_rows(&z);
    let live = model.prototypes.select_rows(&cols);
    let (q, p_norms) = normalize_rows(&live);
    let cos = &u * q.transpose();
    let tau = model.temperature();

    let mut loss = 0.0;
    let mut grad_logits = DMatrix::zeros(b, cols.len());
    for i in 0..b {
        let row = cos.row(i) * tau;
        let max = row.max();
        let denom: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_z = max + denom.ln();
        loss += log_z - row[targets[i]];
        for k in 0..cols.len() {
            grad_logits[(i, k)] = (row[k] - log_z).exp() / b as f64;
        }
        grad_logits[(i, targets[i])] -= 1.0 / b as f64;
    }
    loss /= b as f64;

    let grad_log_t =
        if model.temperature_capped() { 0.0 } else { tau * grad_logits.component_mul(&cos).sum() };

    let grad_u = (&grad_logits * &q) * tau;
    let grad_z = through_normalization(&u, &z_norms, &grad_u);
    let grad_encoder = grad_z.transpose() * x;

    let grad_prototypes = match model.prototype_mode {
        PrototypeMode::FrozenOracle => None,
        PrototypeMode::Learned => {
            let grad_q = (grad_logits.transpose() * &u) * tau;
            let grad_live = through_normalization(&q, &p_norms, &grad_q);
            let mut full = DMatrix::zeros(model.prototypes.nrows(), model.prototypes.ncols());
            for (k, &c) in cols.iter().enumerate() {
                full.set_row(c, &grad_live.row(k));
            }
            Some(full)
        }
    };

    Ok((loss, Gradients { encoder: grad_encoder, prototypes: grad_prototypes, log_temperature: grad_log_t }))
}
