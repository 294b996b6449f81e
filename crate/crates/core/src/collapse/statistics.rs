use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{CollapseError, FeatureMatrix};

/// Means and covariances of a labeled feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStatistics {
    pub global_mean: DVector<f64>,
    /// `C x D`, row `c` is the mean of class `c`.
    pub class_means: DMatrix<f64>,
    /// Within-class covariance, averaged uniformly over samples.
    pub within_cov: DMatrix<f64>,
    /// Between-class covariance, averaged uniformly over classes.
    pub between_cov: DMatrix<f64>,
    pub class_counts: Vec<usize>,
}

impl ClassStatistics {
    pub fn num_classes(&self) -> usize {
        self.class_means.nrows()
    }

    pub fn dim(&self) -> usize {
        self.global_mean.len()
    }

    /// Pseudoinverse of `Sigma_B` from its eigendecomposition. Eigenvalues at or
    /// below `rtol * lambda_max` are treated as zero.
    pub fn between_pinv(&self, rtol: f64) -> Result<BetweenPinv, CollapseError> {
        symmetric_pinv(&self.between_cov, rtol)
    }
}

#[derive(Debug, Clone)]
pub struct BetweenPinv {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
    /// `Sigma_B` is entirely zero; `matrix` is zero.
    pub degenerate: bool,
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub(crate) fn symmetric_pinv(m: &DMatrix<f64>, rtol: f64) -> Result<BetweenPinv, CollapseError> {
    if !(rtol > 0.0) {
        return Err(CollapseError::BadTolerance);
    }
    let d = m.nrows();
    if m.iter().all(|&v| v == 0.0) {
        return Ok(BetweenPinv { matrix: DMatrix::zeros(d, d), rank: 0, degenerate: true });
    }
    let eig = SymmetricEigen::new(m.clone());
    let lambda_max = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lambda_max > 0.0) {
        return Ok(BetweenPinv { matrix: DMatrix::zeros(d, d), rank: 0, degenerate: true });
    }
    let cutoff = rtol * lambda_max;
    let mut pinv = DMatrix::zeros(d, d);
    let mut rank = 0;
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= cutoff {
            continue;
        }
        rank += 1;
        let v = eig.eigenvectors.column(k);
        pinv.ger(1.0 / lambda, &v, &v, 1.0);
    }
    symmetrize(&mut pinv);
    Ok(BetweenPinv { matrix: pinv, rank, degenerate: false })
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

fn lexicographic(fm: &FeatureMatrix, a: usize, b: usize) -> Ordering {
    for j in 0..fm.dim() {
        match fm.features[(a, j)].total_cmp(&fm.features[(b, j)]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// Row indices of each class, in a canonical order (lexicographic by feature
/// values) so that accumulation does not depend on the input row order.
pub(crate) fn canonical_members(fm: &FeatureMatrix) -> Result<Vec<Vec<usize>>, CollapseError> {
    let mut members = vec![Vec::new(); fm.num_classes];
    for (i, &l) in fm.labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    let empty: Vec<u32> =
        members.iter().enumerate().filter(|(_, m)| m.is_empty()).map(|(c, _)| c as u32).collect();
    if !empty.is_empty() {
        return Err(CollapseError::EmptyClasses(empty));
    }
    for m in &mut members {
        m.sort_by(|&a, &b| lexicographic(fm, a, b));
    }
    Ok(members)
}

/// Residual scatter `sum (h - mean)(h - mean)^T` over the given rows.
pub(crate) fn residual_scatter(fm: &FeatureMatrix, rows: &[usize], mean: &DVector<f64>) -> DMatrix<f64> {
    let d = fm.dim();
    let residuals = DMatrix::from_fn(rows.len(), d, |i, j| fm.features[(rows[i], j)] - mean[j]);
    let mut scatter = residuals.transpose() * &residuals;
    symmetrize(&mut scatter);
    scatter
}

/// Global mean, class means, and within/between-class covariances.
///
/// Fails when some class in `[0, num_classes)` has no samples.
pub fn class_statistics(fm: &FeatureMatrix) -> Result<ClassStatistics, CollapseError> {
    let members = canonical_members(fm)?;
    let (c, d, n) = (fm.num_classes, fm.dim(), fm.len());

    let mut class_sums = DMatrix::<f64>::zeros(c, d);
    let mut class_means = DMatrix::<f64>::zeros(c, d);
    for (k, rows) in members.iter().enumerate() {
        for &i in rows {
            for j in 0..d {
                class_sums[(k, j)] += fm.features[(i, j)];
            }
        }
        for j in 0..d {
            class_means[(k, j)] = class_sums[(k, j)] / rows.len() as f64;
        }
    }
    let mut global_mean = DVector::zeros(d);
    for k in 0..c {
        for j in 0..d {
            global_mean[j] += class_sums[(k, j)];
        }
    }
    global_mean /= n as f64;

    let mut within = DMatrix::zeros(d, d);
    for (k, rows) in members.iter().enumerate() {
        let mean = class_means.row(k).transpose();
        within += residual_scatter(fm, rows, &mean);
    }
    within /= n as f64;

    let deviations = DMatrix::from_fn(c, d, |k, j| class_means[(k, j)] - global_mean[j]);
    let mut between = deviations.transpose() * &deviations;
    between /= c as f64;
    symmetrize(&mut between);

    Ok(ClassStatistics {
        global_mean,
        class_means,
        within_cov: within,
        between_cov: between,
        class_counts: members.iter().map(Vec::len).collect(),
    })
}
