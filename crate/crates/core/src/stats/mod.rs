//! Rank and linear correlation between class frequency and per-class statistics.
//!
//! All accumulation is in `f64` with two passes (means first, then centered
//! moments). A correlation with a constant argument is undefined and reported as
//! `None`, never as zero.

mod binned;
mod table;

use thiserror::Error;

pub use binned::{binned_summary, BinSummary};
pub use table::{
    correlation_report, format_float, write_bins_csv, CorrelationReport, PerClassRow, PerClassTable,
};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("value at index {0} is not finite")]
    NonFinite(usize),
    #[error("frequency at index {0} is negative")]
    NegativeFrequency(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("number of bins must be at least 1")]
    ZeroBins,
    #[error("per-class table is empty")]
    EmptyTable,
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}: missing or invalid value in column `{column}`")]
    BadValue { row: usize, column: String },
    #[error("duplicate class_id {0}")]
    DuplicateClass(u32),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn check_finite(values: &[f64]) -> Result<(), StatsError> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(StatsError::NonFinite(i)),
        None => Ok(()),
    }
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Result<Vec<f64>, StatsError> {
    if values.is_empty() {
        return Err(StatsError::TooShort { needed: 1, got: 0 });
    }
    check_finite(values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        // -0.0 and 0.0 compare equal as values, so ties use ==, not total_cmp.
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    Ok(ranks)
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn is_constant(values: &[f64]) -> bool {
    values.iter().all(|&v| v == values[0])
}

/// Pearson product-moment correlation, or `None` when either input is constant.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<Option<f64>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: x.len() });
    }
    check_finite(x)?;
    check_finite(y)?;
    if is_constant(x) || is_constant(y) {
        return Ok(None);
    }

    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)))
}

/// Spearman's rho: [`pearson_r`] of the [`average_ranks`] of both inputs.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> Result<Option<f64>, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort { needed: 2, got: x.len() });
    }
    pearson_r(&average_ranks(x)?, &average_ranks(y)?)
}
