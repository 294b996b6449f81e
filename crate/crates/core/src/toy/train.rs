use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;

use super::data::{generate_dataset, SyntheticData};
use super::eval::{accuracy_snapshot, evaluate, Evaluation};
use super::model::{loss_and_grads, ToyModel};
use super::{ExperimentConfig, PrototypeMode, SyntheticSpec, ToyError, TrainConfig};
use crate::sampler::{rng_from_seed, sample_vocabulary, step_seed, VocabularySample};
use crate::stats::format_float;

const INIT_STREAM: u64 = 0;
const SHUFFLE_STREAM: u64 = 1;
const VOCAB_STREAM: u64 = 2;

/// Loss averaged over the epoch's steps, with test accuracy after the epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub mean_acc: f64,
    pub tail_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub model: ToyModel,
    pub history: Vec<EpochRecord>,
    pub data: SyntheticData,
}

impl TrainedRun {
    pub fn evaluate(&self) -> Result<Evaluation, ToyError> {
        evaluate(&self.model, &self.data.test, &self.data.freq, &self.data.tail_classes)
    }
}

/// True class means carried into the `d`-dim prototype space by keeping the
/// first `d` coordinates (zero-padded when `d > D`).
pub fn oracle_prototypes(class_means: &DMatrix<f64>, proto_dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(class_means.nrows(), proto_dim, |c, j| {
        if j < class_means.ncols() {
            class_means[(c, j)]
        } else {
            0.0
        }
    })
}

/// Generates the dataset of `spec` and trains a model on it with plain gradient
/// descent over shuffled mini-batches.
///
/// With `vocab_size` set, each step draws one vocabulary for the whole batch,
/// seeded by the run seed and the global step index. Frozen prototypes are never
/// updated. A non-finite loss aborts the run with the offending step.
pub fn train(spec: &SyntheticSpec, config: &TrainConfig) -> Result<TrainedRun, ToyError> {
    let data = generate_dataset(spec)?;
    config.validate(spec, data.train.len())?;

    let oracle = oracle_prototypes(&data.class_means, config.proto_dim);
    let mut model = ToyModel::init(
        spec.feature_dim,
        config.proto_dim,
        spec.classes,
        config.prototype_mode,
        Some(&oracle),
        step_seed(config.seed, INIT_STREAM),
    )?;
    let freq = data.freq.dense().expect("synthetic frequencies are dense");
    let full = VocabularySample::full(spec.classes);
    let shuffle_key = step_seed(config.seed, SHUFFLE_STREAM);
    let vocab_key = step_seed(config.seed, VOCAB_STREAM);

    let n = data.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut step: u64 = 0;
    for epoch in 0..config.epochs {
        order.sort_unstable();
        order.shuffle(&mut rng_from_seed(step_seed(shuffle_key, epoch as u64)));

        let mut loss_sum = 0.0;
        let mut steps_in_epoch = 0usize;
        for batch in order.chunks(config.batch_size) {
            let x = data.train.features.select_rows(batch);
            let labels: Vec<u32> = batch.iter().map(|&i| data.train.labels[i]).collect();
            let vocab = match config.vocab_size {
                Some(size) if size < spec.classes => {
                    sample_vocabulary(&labels, &freq, size, config.vocab_mode, step_seed(vocab_key, step))?
                }
                _ => full.clone(),
            };

            let (loss, grads) = loss_and_grads(&model, &x, &labels, &vocab)?;
            if !loss.is_finite() {
                return Err(ToyError::Diverged { step });
            }
            let lr = config.learning_rate;
            model.encoder -= grads.encoder * lr;
            if let (PrototypeMode::Learned, Some(g)) = (model.prototype_mode, grads.prototypes) {
                model.prototypes -= g * lr;
            }
            model.log_temperature -= lr * grads.log_temperature;

            loss_sum += loss;
            steps_in_epoch += 1;
            step += 1;
        }

        let (mean_acc, tail_acc) = accuracy_snapshot(&model, &data.test, &data.tail_classes);
        history.push(EpochRecord {
            epoch: epoch + 1,
            loss: loss_sum / steps_in_epoch as f64,
            mean_acc,
            tail_acc,
        });
    }

    Ok(TrainedRun { model, history, data })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<TrainedRun, ToyError> {
    train(&config.data, &config.train)
}

/// Writes `per_class.csv`, `report.csv`, `prototypes.imbe`,
/// `test_embeddings.imbe` and `history.csv` into `dir` (created if missing).
pub fn write_run_dir(dir: &Path, run: &TrainedRun, eval: &Evaluation) -> Result<(), ToyError> {
    fs::create_dir_all(dir)?;
    eval.table.write_csv(BufWriter::new(fs::File::create(dir.join("per_class.csv"))?))?;
    eval.report.write_csv(BufWriter::new(fs::File::create(dir.join("report.csv"))?))?;
    eval.prototypes.write_binary(BufWriter::new(fs::File::create(dir.join("prototypes.imbe"))?))?;
    eval.embeddings.write_binary(BufWriter::new(fs::File::create(dir.join("test_embeddings.imbe"))?))?;

    let mut history = BufWriter::new(fs::File::create(dir.join("history.csv"))?);
    writeln!(history, "epoch,loss,mean_acc,tail_acc")?;
    for rec in &run.history {
        writeln!(
            history,
            "{},{},{},{}",
            rec.epoch,
            format_float(Some(rec.loss)),
            format_float(Some(rec.mean_acc)),
            format_float(Some(rec.tail_acc))
        )?;
    }
    history.flush()?;
    Ok(())
}
