use nalgebra::DMatrix;

use super::statistics::{canonical_members, residual_scatter, ClassStatistics};
use super::{CollapseError, FeatureMatrix};

/// NC1 value, flagged when `Sigma_B` was entirely zero (value reported as 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nc1 {
    pub value: f64,
    pub degenerate: bool,
}

/// `Tr(A B)` for square matrices of equal size.
fn trace_of_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// `Tr(Sigma_W Sigma_B^+) / C`.
pub fn nc1(stats: &ClassStatistics, rtol: f64) -> Result<Nc1, CollapseError> {
    let pinv = stats.between_pinv(rtol)?;
    if pinv.degenerate {
        log::warn!("between-class covariance is zero; NC1 reported as 0");
        return Ok(Nc1 { value: 0.0, degenerate: true });
    }
    Ok(Nc1 {
        value: trace_of_product(&stats.within_cov, &pinv.matrix) / stats.num_classes() as f64,
        degenerate: false,
    })
}

/// `Tr(Sigma_{W,c} Sigma_B^+) / C` where `Sigma_{W,c}` is the covariance of class
/// `c`'s residuals about its mean. Weighting these by class sample share and
/// summing recovers [`nc1`].
pub fn per_class_nc1(
    stats: &ClassStatistics,
    fm: &FeatureMatrix,
    class: u32,
    rtol: f64,
) -> Result<Nc1, CollapseError> {
    let all = per_class_nc1_all(stats, fm, rtol)?;
    all.into_iter().nth(class as usize).ok_or(CollapseError::NoSuchClass(class))
}

/// [`per_class_nc1`] for every class, sharing one pseudoinverse.
pub fn per_class_nc1_all(
    stats: &ClassStatistics,
    fm: &FeatureMatrix,
    rtol: f64,
) -> Result<Vec<Nc1>, CollapseError> {
    if fm.num_classes != stats.num_classes() {
        return Err(CollapseError::DimensionMismatch(fm.num_classes, stats.num_classes()));
    }
    let pinv = stats.between_pinv(rtol)?;
    let members = canonical_members(fm)?;
    let c = stats.num_classes() as f64;
    Ok(members
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            if pinv.degenerate {
                return Nc1 { value: 0.0, degenerate: true };
            }
            let mean = stats.class_means.row(k).transpose();
            let mut cov = residual_scatter(fm, rows, &mean);
            cov /= rows.len() as f64;
            Nc1 { value: trace_of_product(&cov, &pinv.matrix) / c, degenerate: false }
        })
        .collect())
}

/// `C x D` class centers: feature means or classifier rows. No center may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSet {
    centers: DMatrix<f64>,
    unit: DMatrix<f64>,
}

impl CenterSet {
    pub fn new(centers: DMatrix<f64>) -> Result<Self, CollapseError> {
        let mut unit = centers.clone();
        for (i, mut row) in unit.row_iter_mut().enumerate() {
            let norm = row.norm();
            if norm == 0.0 || !norm.is_finite() {
                return Err(CollapseError::ZeroCenter(i));
            }
            row /= norm;
        }
        Ok(Self { centers, unit })
    }

    pub fn from_class_means(stats: &ClassStatistics) -> Result<Self, CollapseError> {
        Self::new(stats.class_means.clone())
    }

    /// Centers stored as a feature file with one row per class (labels must be
    /// a permutation of `0..C`).
    pub fn from_feature_rows(fm: &FeatureMatrix) -> Result<Self, CollapseError> {
        let c = fm.len();
        let mut order = vec![usize::MAX; c];
        for (row, &label) in fm.labels.iter().enumerate() {
            let slot = order.get_mut(label as usize).ok_or(CollapseError::LabelOutOfRange {
                row,
                label,
                classes: c,
            })?;
            if *slot != usize::MAX {
                return Err(CollapseError::Format(format!("duplicate center for class {label}")));
            }
            *slot = row;
        }
        Self::new(DMatrix::from_fn(c, fm.dim(), |k, j| fm.features[(order[k], j)]))
    }

    pub fn centers(&self) -> &DMatrix<f64> {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.centers.ncols()
    }

    pub fn cosine(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        self.unit.row(a).dot(&self.unit.row(b))
    }

    fn require(&self, needed: usize) -> Result<(), CollapseError> {
        if self.len() < needed {
            return Err(CollapseError::TooFewCenters { needed, got: self.len() });
        }
        Ok(())
    }
}

/// `|cos(c, c') + 1/(C-1)|` averaged over all `c' != c`.
pub fn per_class_nc2(cs: &CenterSet, class: u32) -> Result<f64, CollapseError> {
    cs.require(2)?;
    let c = class as usize;
    if c >= cs.len() {
        return Err(CollapseError::NoSuchClass(class));
    }
    let offset = 1.0 / (cs.len() - 1) as f64;
    let sum: f64 = (0..cs.len()).filter(|&o| o != c).map(|o| (cs.cosine(c, o) + offset).abs()).sum();
    Ok(sum / (cs.len() - 1) as f64)
}

/// Mean of [`per_class_nc2`] over classes, i.e. the average over ordered pairs.
pub fn nc2(cs: &CenterSet) -> Result<f64, CollapseError> {
    cs.require(2)?;
    let mut sum = 0.0;
    for c in 0..cs.len() {
        sum += per_class_nc2(cs, c as u32)?;
    }
    Ok(sum / cs.len() as f64)
}

/// The other center most similar to `class` by cosine; ties go to the smallest
/// class id.
pub fn nearest_center(cs: &CenterSet, class: u32) -> Result<u32, CollapseError> {
    cs.require(2)?;
    let c = class as usize;
    if c >= cs.len() {
        return Err(CollapseError::NoSuchClass(class));
    }
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for o in (0..cs.len()).filter(|&o| o != c) {
        let cos = cs.cosine(c, o);
        if cos > best.0 || best.1 == usize::MAX {
            best = (cos, o);
        }
    }
    Ok(best.1 as u32)
}

/// `|cos(c, c*) + 1/(C-1)|` with `c*` the [`nearest_center`].
pub fn nc2_nn(cs: &CenterSet, class: u32) -> Result<f64, CollapseError> {
    let nn = nearest_center(cs, class)? as usize;
    Ok((cs.cosine(class as usize, nn) + 1.0 / (cs.len() - 1) as f64).abs())
}

/// Mean cosine over unordered pairs of distinct classes in `classes`.
pub fn mean_pairwise_cosine(cs: &CenterSet, classes: &[u32]) -> Result<f64, CollapseError> {
    if classes.len() < 2 {
        return Err(CollapseError::TooFewCenters { needed: 2, got: classes.len() });
    }
    if let Some(&bad) = classes.iter().find(|&&c| c as usize >= cs.len()) {
        return Err(CollapseError::NoSuchClass(bad));
    }
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for (i, &a) in classes.iter().enumerate() {
        for &b in &classes[i + 1..] {
            sum += cs.cosine(a as usize, b as usize);
            pairs += 1;
        }
    }
    Ok(sum / pairs as f64)
}

/// Pairwise cosine similarity of the centers; exactly 1 on the diagonal and
/// exactly symmetric.
pub fn affinity_matrix(cs: &CenterSet) -> Result<DMatrix<f64>, CollapseError> {
    cs.require(1)?;
    let n = cs.len();
    let mut m = DMatrix::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = cs.cosine(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}
