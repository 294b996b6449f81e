use std::collections::BTreeSet;
use std::io::{Read, Write};

use super::{binned::BinSummary, pearson_r, spearman_rho, StatsError};

/// One class: training frequency, test accuracy and number of test samples
/// predicted as this class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerClassRow {
    pub class_id: u32,
    pub frequency: u64,
    pub accuracy: f64,
    pub pred_count: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PerClassTable {
    pub rows: Vec<PerClassRow>,
}

const TABLE_COLUMNS: [&str; 4] = ["class_id", "frequency", "accuracy", "pred_count"];

impl PerClassTable {
    pub fn new(rows: Vec<PerClassRow>) -> Result<Self, StatsError> {
        let mut seen = BTreeSet::new();
        for row in &rows {
            if !seen.insert(row.class_id) {
                return Err(StatsError::DuplicateClass(row.class_id));
            }
        }
        Ok(Self { rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.frequency as f64).collect()
    }

    pub fn accuracies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.accuracy).collect()
    }

    pub fn pred_counts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.pred_count as f64).collect()
    }

    /// Reads `class_id,frequency,accuracy,pred_count` (any column order, extra
    /// columns ignored). Missing columns and empty or unparsable cells are rejected.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, StatsError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut idx = [0usize; 4];
        for (slot, name) in idx.iter_mut().zip(TABLE_COLUMNS) {
            *slot = headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| StatsError::MissingColumn(name.to_string()))?;
        }

        let mut rows = Vec::new();
        for (r, record) in rdr.records().enumerate() {
            let record = record?;
            let cell =
                |k: usize| -> Result<&str, StatsError> {
                    record.get(idx[k]).map(str::trim).filter(|s| !s.is_empty()).ok_or_else(|| {
                        StatsError::BadValue { row: r + 1, column: TABLE_COLUMNS[k].to_string() }
                    })
                };
            let bad = |k: usize| StatsError::BadValue { row: r + 1, column: TABLE_COLUMNS[k].to_string() };
            let accuracy: f64 = cell(2)?.parse().map_err(|_| bad(2))?;
            if !(0.0..=1.0).contains(&accuracy) {
                return Err(bad(2));
            }
            rows.push(PerClassRow {
                class_id: cell(0)?.parse().map_err(|_| bad(0))?,
                frequency: cell(1)?.parse().map_err(|_| bad(1))?,
                accuracy,
                pred_count: cell(3)?.parse().map_err(|_| bad(3))?,
            });
        }
        Self::new(rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StatsError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(TABLE_COLUMNS)?;
        for row in &self.rows {
            w.write_record([
                row.class_id.to_string(),
                row.frequency.to_string(),
                format_float(Some(row.accuracy)),
                row.pred_count.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Shortest round-trip rendering; `None` (undefined) renders as `nan`.
pub fn format_float(value: Option<f64>) -> String {
    match value {
        Some(v) if v.is_finite() => format!("{v}"),
        _ => "nan".to_string(),
    }
}

/// Correlations of accuracy and prediction count with class frequency.
/// `None` marks an undefined coefficient (a constant column).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationReport {
    pub rho_acc_freq: Option<f64>,
    pub rho_pred_freq: Option<f64>,
    pub r_acc_freq: Option<f64>,
    pub r_pred_freq: Option<f64>,
    pub n: usize,
}

impl CorrelationReport {
    pub fn rows(&self) -> [(&'static str, String); 5] {
        [
            ("rho_acc_freq", format_float(self.rho_acc_freq)),
            ("rho_pred_freq", format_float(self.rho_pred_freq)),
            ("r_acc_freq", format_float(self.r_acc_freq)),
            ("r_pred_freq", format_float(self.r_pred_freq)),
            ("n", self.n.to_string()),
        ]
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), StatsError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["statistic", "value"])?;
        for (name, value) in self.rows() {
            w.write_record([name, value.as_str()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Spearman coefficients use raw frequencies; Pearson coefficients use
/// `log10(f + 1)` when `log_freq_for_pearson` is set, raw frequencies otherwise.
pub fn correlation_report(
    table: &PerClassTable,
    log_freq_for_pearson: bool,
) -> Result<CorrelationReport, StatsError> {
    if table.is_empty() {
        return Err(StatsError::EmptyTable);
    }
    let freq = table.frequencies();
    let acc = table.accuracies();
    let pred = table.pred_counts();
    let pearson_freq: Vec<f64> =
        if log_freq_for_pearson { freq.iter().map(|f| (f + 1.0).log10()).collect() } else { freq.clone() };
    Ok(CorrelationReport {
        rho_acc_freq: spearman_rho(&freq, &acc)?,
        rho_pred_freq: spearman_rho(&freq, &pred)?,
        r_acc_freq: pearson_r(&pearson_freq, &acc)?,
        r_pred_freq: pearson_r(&pearson_freq, &pred)?,
        n: table.len(),
    })
}

/// Writes `bin_center,mean,std,count`.
pub fn write_bins_csv<W: Write>(bins: &[BinSummary], writer: W) -> Result<(), StatsError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["bin_center", "mean", "std", "count"])?;
    for b in bins {
        w.write_record([
            format_float(Some(b.center)),
            format_float(b.mean),
            format_float(b.std),
            b.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
