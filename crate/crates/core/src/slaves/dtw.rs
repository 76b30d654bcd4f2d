//! 1-NN dynamic time warping slave.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_accuracy, fold_assignment};
use super::{make_slave_output, LevelData, SlaveOutput};
use crate::error::{Result, TeaserError};
use crate::series::z_normalize_unchecked;

/// Candidate Sakoe-Chiba widths, as a fraction of the longer series.
pub const BAND_GRID: [f64; 2] = [0.1, 1.0];

/// Added to every distance before inverting it into a class weight.
pub const PROBABILITY_SOFTNESS: f64 = 1e-6;

/// DTW alignment cost with squared point differences and a Sakoe-Chiba
/// band of half-width `max(ceil(band * max(|a|, |b|)), ||a| - |b||)`.
pub fn dtw_distance(a: &[f64], b: &[f64], band: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(TeaserError::InvalidArgument("DTW of an empty sequence".into()));
    }
    if !(0.0..=1.0).contains(&band) {
        return Err(TeaserError::InvalidArgument(format!(
            "DTW band {band} outside [0, 1]"
        )));
    }
    Ok(dtw(a, b, band))
}

pub(crate) fn band_radius(n: usize, m: usize, band: f64) -> usize {
    let r = (band * n.max(m) as f64).ceil() as usize;
    r.max(n.abs_diff(m))
}

pub(crate) fn dtw(a: &[f64], b: &[f64], band: f64) -> f64 {
    let (n, m) = (a.len(), b.len());
    let r = band_radius(n, m, band);
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for i in 1..=n {
        cur.fill(f64::INFINITY);
        let lo = i.saturating_sub(r).max(1);
        let hi = (i + r).min(m);
        let ai = a[i - 1];
        for j in lo..=hi {
            let d = ai - b[j - 1];
            let best = prev[j].min(cur[j - 1]).min(prev[j - 1]);
            cur[j] = d * d + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// Converts per-class nearest distances into probabilities proportional to
/// `1 / (d + softness)`. Classes without exemplars (infinite distance) get 0.
pub(crate) fn probs_from_distances(dists: &[f64]) -> Result<SlaveOutput> {
    let weights: Vec<f64> = dists
        .iter()
        .map(|&d| if d.is_finite() { 1.0 / (d + PROBABILITY_SOFTNESS) } else { 0.0 })
        .collect();
    make_slave_output(&weights)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DtwSlave {
    pub exemplars: Vec<Vec<f64>>,
    pub targets: Vec<usize>,
    /// Training-set position of each exemplar; only kept while training.
    #[serde(skip)]
    pub sources: Vec<usize>,
    pub n_classes: usize,
    pub band: f64,
    pub cv_accuracy: Option<f64>,
}

impl DtwSlave {
    pub fn fit(data: &LevelData, seed: u64) -> Result<DtwSlave> {
        Self::fit_with_outputs(data, seed).map(|(s, _)| s)
    }

    pub(crate) fn fit_with_outputs(data: &LevelData, seed: u64) -> Result<(DtwSlave, Vec<SlaveOutput>)> {
        data.validate()?;
        let folds = fold_assignment(&data.targets, data.n_classes, seed);

        let (band, cv, matrix) = match folds {
            None => (1.0, None, pairwise(&data.series, 1.0)),
            Some(folds) => {
                let mut best: Option<(f64, f64, Vec<Vec<f64>>)> = None;
                for &band in &BAND_GRID {
                    let matrix = pairwise(&data.series, band);
                    let acc = cv_accuracy(&folds, &data.targets, |i, in_train| {
                        class_minima(&matrix[i], &data.targets, data.n_classes, in_train)
                            .and_then(|d| probs_from_distances(&d).ok())
                            .map_or(usize::MAX, |o| o.label)
                    });
                    if best.as_ref().is_none_or(|(_, b, _)| acc > *b) {
                        best = Some((band, acc, matrix));
                    }
                }
                let (band, acc, matrix) = best.unwrap();
                (band, Some(acc), matrix)
            }
        };

        let outputs = (0..data.len())
            .map(|i| {
                let d = class_minima(&matrix[i], &data.targets, data.n_classes, |j| j != i)
                    .ok_or_else(|| {
                        TeaserError::InvalidTrainingSet("a level needs at least two series".into())
                    })?;
                probs_from_distances(&d)
            })
            .collect::<Result<Vec<_>>>()?;

        let slave = DtwSlave {
            exemplars: data.series.clone(),
            targets: data.targets.clone(),
            sources: data.sources.clone(),
            n_classes: data.n_classes,
            band,
            cv_accuracy: cv,
        };
        Ok((slave, outputs))
    }

    pub fn predict(&self, q: &[f64]) -> Result<SlaveOutput> {
        self.predict_excluding(q, None)
    }

    /// Exemplars longer than the query are cut to the query length and
    /// re-normalized, which equals normalizing the raw prefix.
    pub fn predict_excluding(&self, q: &[f64], exclude: Option<usize>) -> Result<SlaveOutput> {
        if q.is_empty() {
            return Err(TeaserError::InvalidArgument("empty snapshot".into()));
        }
        let mut dists = vec![f64::INFINITY; self.n_classes];
        for (idx, (ex, &target)) in self.exemplars.iter().zip(&self.targets).enumerate() {
            if exclude.is_some() && self.sources.get(idx).copied() == exclude {
                continue;
            }
            let d = if q.len() < ex.len() {
                dtw(q, &z_normalize_unchecked(&ex[..q.len()]), self.band)
            } else {
                dtw(q, ex, self.band)
            };
            if d < dists[target] {
                dists[target] = d;
            }
        }
        probs_from_distances(&dists)
    }
}

fn pairwise(series: &[Vec<f64>], band: f64) -> Vec<Vec<f64>> {
    let n = series.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| ((i + 1)..n).map(|j| dtw(&series[i], &series[j], band)).collect())
        .collect();
    let mut full = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (off, &d) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            full[i][j] = d;
            full[j][i] = d;
        }
    }
    full
}

fn class_minima(
    row: &[f64],
    targets: &[usize],
    n_classes: usize,
    keep: impl Fn(usize) -> bool,
) -> Option<Vec<f64>> {
    let mut dists = vec![f64::INFINITY; n_classes];
    let mut any = false;
    for (j, &d) in row.iter().enumerate() {
        if keep(j) {
            any = true;
            if d < dists[targets[j]] {
                dists[targets[j]] = d;
            }
        }
    }
    any.then_some(dists)
}
