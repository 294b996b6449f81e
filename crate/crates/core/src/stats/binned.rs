use super::{check_finite, StatsError};

/// Summary of the metric over one frequency bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinSummary {
    /// Bin midpoint in frequency units (for log bins, `10^midpoint`; 0 for the
    /// underflow bin).
    pub center: f64,
    /// `None` when the bin is empty.
    pub mean: Option<f64>,
    /// Population standard deviation; `None` when the bin is empty.
    pub std: Option<f64>,
    pub count: usize,
}

/// Equal-width bins over the (optionally `log10`) frequency range with the
/// mean and population std of `metric` per bin.
///
/// In log mode a dedicated underflow bin holding all zero frequencies comes first,
/// followed by `n_bins` bins over the positive values. The maximum value falls in
/// the last bin.
pub fn binned_summary(
    freq: &[f64],
    metric: &[f64],
    n_bins: usize,
    log_scale: bool,
) -> Result<Vec<BinSummary>, StatsError> {
    if n_bins == 0 {
        return Err(StatsError::ZeroBins);
    }
    if freq.len() != metric.len() {
        return Err(StatsError::LengthMismatch(freq.len(), metric.len()));
    }
    check_finite(freq)?;
    check_finite(metric)?;
    if let Some(i) = freq.iter().position(|&f| f < 0.0) {
        return Err(StatsError::NegativeFrequency(i));
    }

    let mut underflow = Vec::new();
    let mut points = Vec::with_capacity(freq.len());
    for (&f, &m) in freq.iter().zip(metric) {
        if log_scale {
            if f == 0.0 {
                underflow.push(m);
            } else {
                points.push((f.log10(), m));
            }
        } else {
            points.push((f, m));
        }
    }

    let (lo, hi) =
        points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let (lo, hi) = if points.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    let width = (hi - lo) / n_bins as f64;

    let mut members: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for &(x, m) in &points {
        let bin = if width > 0.0 { (((x - lo) / width).floor() as usize).min(n_bins - 1) } else { 0 };
        members[bin].push(m);
    }

    let mut out = Vec::with_capacity(n_bins + 1);
    if log_scale {
        out.push(summarize(0.0, &underflow));
    }
    for (b, values) in members.iter().enumerate() {
        let mid = lo + (b as f64 + 0.5) * width;
        let center = if log_scale { 10f64.powf(mid) } else { mid };
        out.push(summarize(center, values));
    }
    Ok(out)
}

fn summarize(center: f64, values: &[f64]) -> BinSummary {
    if values.is_empty() {
        return BinSummary { center, mean: None, std: None, count: 0 };
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    BinSummary { center, mean: Some(mean), std: Some(var.sqrt()), count: values.len() }
}
