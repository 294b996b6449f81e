//! Per-class occurrence counts.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrequencyError {
    #[error("frequency csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("frequency csv: duplicate class_id {0}")]
    Duplicate(u32),
    #[error("frequency table class ids are not contiguous from 0: missing {0}")]
    NotDense(u32),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Number of records matched per class, out of `total_records` scanned.
///
/// Every count is at most `total_records`. Merging is elementwise addition, so
/// partial tables from any shard plan fold into the same result.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyTable {
    pub counts: BTreeMap<u32, u64>,
    pub total_records: u64,
}

impl FrequencyTable {
    /// A table with every listed class present at count zero.
    pub fn zeroed(class_ids: impl IntoIterator<Item = u32>) -> Self {
        Self { counts: class_ids.into_iter().map(|c| (c, 0)).collect(), total_records: 0 }
    }

    /// Table over classes `0..counts.len()`; each sample belongs to exactly one
    /// class so the total is the sum of counts.
    pub fn from_dense(counts: &[u64]) -> Self {
        Self {
            counts: counts.iter().enumerate().map(|(c, &n)| (c as u32, n)).collect(),
            total_records: counts.iter().sum(),
        }
    }

    pub fn get(&self, class_id: u32) -> u64 {
        self.counts.get(&class_id).copied().unwrap_or(0)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn merge(&mut self, other: &FrequencyTable) {
        for (&c, &n) in &other.counts {
            *self.counts.entry(c).or_insert(0) += n;
        }
        self.total_records += other.total_records;
    }

    pub fn merged(mut self, other: &FrequencyTable) -> Self {
        self.merge(other);
        self
    }

    /// Counts as a dense vector indexed by class id. Fails unless the ids are
    /// exactly `0..len`.
    pub fn dense(&self) -> Result<Vec<u64>, FrequencyError> {
        let mut out = Vec::with_capacity(self.counts.len());
        for (expected, (&c, &n)) in self.counts.iter().enumerate() {
            if c as usize != expected {
                return Err(FrequencyError::NotDense(expected as u32));
            }
            out.push(n);
        }
        Ok(out)
    }

    /// Writes `class_id,name,count` rows sorted by class id. `name` looks up a
    /// display name; missing names are written empty.
    pub fn write_csv<W: Write>(
        &self,
        writer: W,
        name: impl Fn(u32) -> Option<String>,
    ) -> Result<(), FrequencyError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["class_id", "name", "count"])?;
        for (&c, &n) in &self.counts {
            w.write_record([c.to_string(), name(c).unwrap_or_default(), n.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the `class_id,name,count` format. The file does not carry the number
    /// of scanned records, so `total_records` is set to the sum of counts, which
    /// keeps every count within the total.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, FrequencyError> {
        #[derive(Deserialize)]
        struct Row {
            class_id: u32,
            count: u64,
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let mut table = FrequencyTable::default();
        for row in rdr.deserialize() {
            let row: Row = row?;
            if table.counts.insert(row.class_id, row.count).is_some() {
                return Err(FrequencyError::Duplicate(row.class_id));
            }
            table.total_records += row.count;
        }
        Ok(table)
    }
}
