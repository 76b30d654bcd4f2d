//! Time series primitives: validated series, labeled datasets, prefix
//! snapshots, the snapshot schedule and leak-free z-normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeaserError};

/// Standard deviations below this are treated as a constant signal.
pub const ZNORM_EPSILON: f64 = 1e-8;

/// A non-empty sequence of finite measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries(Vec<f64>);

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(TeaserError::InvalidArgument("time series is empty".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(TeaserError::InvalidArgument(format!(
                "non-finite value at position {pos}"
            )));
        }
        Ok(TimeSeries(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Series with parallel labels. Labels are kept as strings; `classes` is the
/// sorted set of distinct labels and `targets` indexes into it.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    series: Vec<TimeSeries>,
    labels: Vec<String>,
    classes: Vec<String>,
    targets: Vec<usize>,
}

impl LabeledDataset {
    pub fn new(series: Vec<TimeSeries>, labels: Vec<String>) -> Result<Self> {
        if series.is_empty() {
            return Err(TeaserError::InvalidArgument("dataset is empty".into()));
        }
        if series.len() != labels.len() {
            return Err(TeaserError::InvalidArgument(format!(
                "{} series but {} labels",
                series.len(),
                labels.len()
            )));
        }
        let mut classes: Vec<String> = labels.clone();
        classes.sort_by(|a, b| compare_labels(a, b));
        classes.dedup();
        let targets = labels
            .iter()
            .map(|l| classes.iter().position(|c| c == l).unwrap())
            .collect();
        Ok(LabeledDataset {
            series,
            labels,
            classes,
            targets,
        })
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn series(&self) -> &[TimeSeries] {
        &self.series
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Distinct class labels, numerically ordered when every label parses
    /// as a number and lexicographically otherwise.
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Class index of every series.
    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn n_max(&self) -> usize {
        self.series.iter().map(TimeSeries::len).max().unwrap_or(0)
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &t in &self.targets {
            counts[t] += 1;
        }
        counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TimeSeries, &str)> {
        self.series.iter().zip(self.labels.iter().map(String::as_str))
    }
}

fn compare_labels(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        _ => a.cmp(b),
    }
}

/// Prefix of a series available after `len` data points.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub values: Vec<f64>,
    pub len: usize,
    pub normalized: bool,
}

impl Snapshot {
    pub fn normalize(self) -> Snapshot {
        Snapshot {
            values: z_normalize_unchecked(&self.values),
            len: self.len,
            normalized: true,
        }
    }
}

/// Takes the first `min(s, n)` values of `series`.
pub fn snapshot(series: &TimeSeries, s: usize) -> Result<Snapshot> {
    if s < 1 {
        return Err(TeaserError::InvalidArgument(
            "snapshot length must be at least 1".into(),
        ));
    }
    let len = s.min(series.len());
    Ok(Snapshot {
        values: series.values()[..len].to_vec(),
        len,
        normalized: false,
    })
}

/// Z-normalizes using only the statistics of `x` itself (population std).
/// Near-constant input maps to all zeros.
pub fn z_normalize(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(TeaserError::InvalidArgument(
            "cannot z-normalize an empty sequence".into(),
        ));
    }
    Ok(z_normalize_unchecked(x))
}

pub(crate) fn z_normalize_unchecked(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std.is_nan() || std < ZNORM_EPSILON {
        return vec![0.0; x.len()];
    }
    x.iter().map(|v| (v - mean) / std).collect()
}

/// Snapshot lengths `w, 2w, ..., S*w` with `S = ceil(n_max / w)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotSchedule {
    pub w: usize,
    pub lengths: Vec<usize>,
}

impl SnapshotSchedule {
    pub fn levels(&self) -> usize {
        self.lengths.len()
    }

    /// Longest snapshot any level consumes.
    pub fn max_len(&self) -> usize {
        *self.lengths.last().unwrap()
    }

    /// Index of the level whose snapshot is the first to cover `len` points,
    /// capped at the last level.
    pub fn level_covering(&self, len: usize) -> usize {
        (len.div_ceil(self.w)).clamp(1, self.levels()) - 1
    }
}

pub fn build_schedule(n_max: usize, w: usize) -> Result<SnapshotSchedule> {
    if n_max < 1 || w < 1 {
        return Err(TeaserError::InvalidArgument(format!(
            "schedule needs n_max >= 1 and w >= 1 (got n_max={n_max}, w={w})"
        )));
    }
    let levels = n_max.div_ceil(w);
    Ok(SnapshotSchedule {
        w,
        lengths: (1..=levels).map(|i| i * w).collect(),
    })
}
