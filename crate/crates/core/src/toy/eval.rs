use nalgebra::DMatrix;

use super::model::{forward, ToyModel};
use super::ToyError;
use crate::collapse::FeatureMatrix;
use crate::frequency::FrequencyTable;
use crate::stats::{correlation_report, CorrelationReport, PerClassRow, PerClassTable};

/// Per-class results of a model on a test split, plus exported geometry.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub table: PerClassTable,
    /// Pearson terms use `log10(f + 1)` frequencies.
    pub report: CorrelationReport,
    pub predictions: Vec<u32>,
    /// One row per class, label = class id.
    pub prototypes: FeatureMatrix,
    /// Unit-normalized test embeddings with their true labels.
    pub embeddings: FeatureMatrix,
    pub mean_acc: f64,
    pub tail_acc: f64,
}

/// Index of the largest entry in each row; ties go to the smallest column.
pub(crate) fn argmax_rows(logits: &DMatrix<f64>) -> Vec<u32> {
    logits
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best as u32
        })
        .collect()
}

pub(crate) fn per_class_accuracy(
    predictions: &[u32],
    labels: &[u32],
    classes: usize,
) -> (Vec<f64>, Vec<u64>) {
    let mut correct = vec![0u64; classes];
    let mut total = vec![0u64; classes];
    let mut predicted = vec![0u64; classes];
    for (&p, &y) in predictions.iter().zip(labels) {
        total[y as usize] += 1;
        predicted[p as usize] += 1;
        if p == y {
            correct[y as usize] += 1;
        }
    }
    let acc =
        correct.iter().zip(&total).map(|(&c, &t)| if t == 0 { 0.0 } else { c as f64 / t as f64 }).collect();
    (acc, predicted)
}

fn mean_over(values: &[f64], classes: &[u32]) -> f64 {
    if classes.is_empty() {
        return 0.0;
    }
    classes.iter().map(|&c| values[c as usize]).sum::<f64>() / classes.len() as f64
}

/// Mean per-class accuracy over all classes and over `tail`, predicting by
/// argmax over all classes.
pub(crate) fn accuracy_snapshot(model: &ToyModel, test: &FeatureMatrix, tail: &[u32]) -> (f64, f64) {
    let predictions = argmax_rows(&forward(model, &test.features));
    let (acc, _) = per_class_accuracy(&predictions, &test.labels, model.classes());
    let all: Vec<u32> = (0..model.classes() as u32).collect();
    (mean_over(&acc, &all), mean_over(&acc, tail))
}

/// Predicts every test sample by the nearest prototype over the full class set
/// and tabulates accuracy and prediction counts against training frequency.
pub fn evaluate(
    model: &ToyModel,
    test: &FeatureMatrix,
    freq: &FrequencyTable,
    tail: &[u32],
) -> Result<Evaluation, ToyError> {
    let classes = model.classes();
    let predictions = argmax_rows(&forward(model, &test.features));
    let (acc, predicted) = per_class_accuracy(&predictions, &test.labels, classes);

    let rows = (0..classes)
        .map(|c| PerClassRow {
            class_id: c as u32,
            frequency: freq.get(c as u32),
            accuracy: acc[c],
            pred_count: predicted[c],
        })
        .collect();
    let table = PerClassTable::new(rows)?;
    let report = correlation_report(&table, true)?;

    let prototypes = FeatureMatrix::new(model.prototypes.clone(), (0..classes as u32).collect(), classes)?;
    let embeddings = FeatureMatrix::new(model.embed(&test.features), test.labels.clone(), classes)?;
    let all: Vec<u32> = (0..classes as u32).collect();

    Ok(Evaluation {
        table,
        report,
        predictions,
        prototypes,
        embeddings,
        mean_acc: mean_over(&acc, &all),
        tail_acc: mean_over(&acc, tail),
    })
}
