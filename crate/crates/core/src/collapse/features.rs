use std::io::{Read, Write};

use nalgebra::DMatrix;

use super::CollapseError;

const MAGIC: &[u8; 4] = b"IMBE";

/// `N x D` embeddings with one class label per row, labels in `[0, num_classes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub features: DMatrix<f64>,
    pub labels: Vec<u32>,
    pub num_classes: usize,
}

impl FeatureMatrix {
    pub fn new(features: DMatrix<f64>, labels: Vec<u32>, num_classes: usize) -> Result<Self, CollapseError> {
        if labels.len() != features.nrows() {
            return Err(CollapseError::ShapeMismatch { rows: labels.len(), features: features.nrows() });
        }
        if labels.is_empty() {
            return Err(CollapseError::NoSamples);
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= num_classes) {
            return Err(CollapseError::LabelOutOfRange { row, label, classes: num_classes });
        }
        Ok(Self { features, labels, num_classes })
    }

    /// Builds from row vectors; `num_classes` is `max(label) + 1`.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<u32>) -> Result<Self, CollapseError> {
        let dim = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(CollapseError::DimensionMismatch(dim, bad.len()));
        }
        let features = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        let classes = labels.iter().max().map_or(0, |&m| m as usize + 1);
        Self::new(features, labels, classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Writes the binary layout: `IMBE`, little-endian `u32` N, D, C, then per
    /// row a `u32` label followed by D little-endian `f32` values.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<(), CollapseError> {
        let to_u32 = |v: usize| {
            u32::try_from(v).map_err(|_| CollapseError::Format(format!("{v} does not fit in u32")))
        };
        w.write_all(MAGIC)?;
        w.write_all(&to_u32(self.len())?.to_le_bytes())?;
        w.write_all(&to_u32(self.dim())?.to_le_bytes())?;
        w.write_all(&to_u32(self.num_classes)?.to_le_bytes())?;
        let mut buf = Vec::with_capacity(4 * (self.dim() + 1));
        for (i, &label) in self.labels.iter().enumerate() {
            buf.clear();
            buf.extend_from_slice(&label.to_le_bytes());
            for j in 0..self.dim() {
                buf.extend_from_slice(&(self.features[(i, j)] as f32).to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self, CollapseError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| CollapseError::Format("truncated header".into()))?;
        if &magic != MAGIC {
            return Err(CollapseError::Format("bad magic, expected IMBE".into()));
        }
        let mut word = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32, CollapseError> {
            r.read_exact(&mut word).map_err(|_| CollapseError::Format("truncated file".into()))?;
            Ok(u32::from_le_bytes(word))
        };
        let n = read_u32(&mut r)? as usize;
        let d = read_u32(&mut r)? as usize;
        let c = read_u32(&mut r)? as usize;

        let mut labels = Vec::with_capacity(n);
        let mut data = Vec::with_capacity(n * d);
        let mut row = vec![0u8; 4 * (d + 1)];
        for _ in 0..n {
            r.read_exact(&mut row).map_err(|_| CollapseError::Format("truncated record".into()))?;
            labels.push(u32::from_le_bytes(row[..4].try_into().unwrap()));
            data.extend(row[4..].chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64));
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(CollapseError::Format("trailing bytes after records".into()));
        }
        Self::new(DMatrix::from_row_slice(n, d, &data), labels, c)
    }

    /// Reads `label,f0,f1,...` CSV. The class count is `max(label) + 1`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, CollapseError> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0).map(str::trim) != Some("label") {
            return Err(CollapseError::Format("first csv column must be `label`".into()));
        }
        let d = headers.len() - 1;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = || CollapseError::Format(format!("row {} is not numeric", i + 1));
            labels.push(rec.get(0).ok_or_else(bad)?.trim().parse().map_err(|_| bad())?);
            let values: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|v| v.trim().parse::<f64>().map_err(|_| bad()))
                .collect::<Result<_, _>>()?;
            if values.len() != d {
                return Err(CollapseError::DimensionMismatch(d, values.len()));
            }
            rows.push(values);
        }
        if rows.is_empty() {
            return Err(CollapseError::NoSamples);
        }
        Self::from_rows(&rows, labels)
    }

    /// Reads either format, choosing by the leading magic bytes.
    pub fn read_any(bytes: &[u8]) -> Result<Self, CollapseError> {
        if bytes.starts_with(MAGIC) {
            Self::read_binary(bytes)
        } else {
            Self::read_csv(bytes)
        }
    }

    /// Row `i` as a slice-backed vector copy.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.features.row(i).iter().copied().collect()
    }
}
