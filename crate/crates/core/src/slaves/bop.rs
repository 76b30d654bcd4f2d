//! Bag-of-patterns slave: sliding windows are z-normalized, reduced to their
//! leading Fourier coefficients, discretized with equi-depth bins into words
//! and counted into histograms. Classification is 1-NN under cosine
//! similarity.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cv::{cv_accuracy, fold_assignment};
use super::{make_slave_output, LevelData, SlaveOutput};
use crate::error::{Result, TeaserError};
use crate::series::z_normalize_unchecked;

pub const WORD_LENGTHS: [usize; 2] = [4, 6];
pub const ALPHABET_SIZE: usize = 4;

const MAX_WORD_LENGTH: usize = 6;

/// Sparse word-count histogram sorted by word.
pub type Histogram = Vec<(u32, u32)>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BopSlave {
    pub window_length: usize,
    pub word_length: usize,
    pub alphabet_size: usize,
    /// `alphabet_size - 1` ascending boundaries per coefficient position.
    pub bin_edges: Vec<Vec<f64>>,
    pub histograms: Vec<Histogram>,
    pub targets: Vec<usize>,
    #[serde(skip)]
    pub sources: Vec<usize>,
    pub n_classes: usize,
    pub cv_accuracy: Option<f64>,
}

struct Candidate {
    window_length: usize,
    word_length: usize,
    bin_edges: Vec<Vec<f64>>,
    histograms: Vec<Histogram>,
    sims: Vec<Vec<f64>>,
}

impl BopSlave {
    pub fn fit(data: &LevelData, seed: u64) -> Result<BopSlave> {
        Self::fit_with_outputs(data, seed).map(|(s, _)| s)
    }

    /// Fits with a fixed window and word length, skipping the grid search.
    pub fn fit_config(data: &LevelData, window_length: usize, word_length: usize) -> Result<BopSlave> {
        data.validate()?;
        check_config(data, window_length, word_length)?;
        let coeffs = coefficients_all(&data.series, window_length);
        let cand = candidate(&coeffs, window_length, word_length);
        Ok(finish(data, cand, None)?.0)
    }

    pub(crate) fn fit_with_outputs(data: &LevelData, seed: u64) -> Result<(BopSlave, Vec<SlaveOutput>)> {
        data.validate()?;
        let s = data.series.iter().map(Vec::len).min().unwrap_or(0);
        let mut windows = vec![s.div_ceil(4).max(1), s.div_ceil(2).max(1)];
        windows.dedup();

        let folds = fold_assignment(&data.targets, data.n_classes, seed);
        let Some(folds) = folds else {
            let window = *windows.last().unwrap();
            let coeffs = coefficients_all(&data.series, window);
            let cand = candidate(&coeffs, window, WORD_LENGTHS[0]);
            return finish(data, cand, None);
        };

        let per_window: Vec<(usize, Vec<Vec<[f64; MAX_WORD_LENGTH]>>)> = windows
            .iter()
            .map(|&w| (w, coefficients_all(&data.series, w)))
            .collect();

        let mut best: Option<(Candidate, f64)> = None;
        for &word_length in &WORD_LENGTHS {
            for (window, coeffs) in &per_window {
                let cand = candidate(coeffs, *window, word_length);
                let acc = cv_accuracy(&folds, &data.targets, |i, in_train| {
                    class_maxima(&cand.sims[i], &data.targets, data.n_classes, in_train)
                        .and_then(|s| probs_from_similarities(&s).ok())
                        .map_or(usize::MAX, |o| o.label)
                });
                if best.as_ref().is_none_or(|(_, b)| acc > *b) {
                    best = Some((cand, acc));
                }
            }
        }
        let (cand, acc) = best.unwrap();
        finish(data, cand, Some(acc))
    }

    /// Word histogram of a snapshot under the learned discretization.
    pub fn transform(&self, q: &[f64]) -> Result<Histogram> {
        if q.len() < self.window_length {
            return Err(TeaserError::TooShort {
                len: q.len(),
                window: self.window_length,
            });
        }
        let coeffs = window_coefficients(q, self.window_length);
        Ok(histogram(&coeffs, &self.bin_edges, self.word_length))
    }

    pub fn predict(&self, q: &[f64]) -> Result<SlaveOutput> {
        self.predict_excluding(q, None)
    }

    pub fn predict_excluding(&self, q: &[f64], exclude: Option<usize>) -> Result<SlaveOutput> {
        let hist = self.transform(q)?;
        let mut sims = vec![0.0; self.n_classes];
        for (idx, (h, &target)) in self.histograms.iter().zip(&self.targets).enumerate() {
            if exclude.is_some() && self.sources.get(idx).copied() == exclude {
                continue;
            }
            let s = cosine(&hist, h);
            if s > sims[target] {
                sims[target] = s;
            }
        }
        probs_from_similarities(&sims)
    }
}

fn check_config(data: &LevelData, window_length: usize, word_length: usize) -> Result<()> {
    if !WORD_LENGTHS.contains(&word_length) {
        return Err(TeaserError::InvalidConfiguration(format!(
            "word length {word_length} not in {WORD_LENGTHS:?}"
        )));
    }
    let s = data.series.iter().map(Vec::len).min().unwrap_or(0);
    if window_length == 0 || window_length > s {
        return Err(TeaserError::InvalidConfiguration(format!(
            "window length {window_length} does not fit snapshots of length {s}"
        )));
    }
    Ok(())
}

fn finish(data: &LevelData, cand: Candidate, cv: Option<f64>) -> Result<(BopSlave, Vec<SlaveOutput>)> {
    let outputs = (0..data.len())
        .map(|i| {
            let sims = class_maxima(&cand.sims[i], &data.targets, data.n_classes, |j| j != i)
                .ok_or_else(|| {
                    TeaserError::InvalidTrainingSet("a level needs at least two series".into())
                })?;
            probs_from_similarities(&sims)
        })
        .collect::<Result<Vec<_>>>()?;
    let slave = BopSlave {
        window_length: cand.window_length,
        word_length: cand.word_length,
        alphabet_size: ALPHABET_SIZE,
        bin_edges: cand.bin_edges,
        histograms: cand.histograms,
        targets: data.targets.clone(),
        sources: data.sources.clone(),
        n_classes: data.n_classes,
        cv_accuracy: cv,
    };
    Ok((slave, outputs))
}

fn candidate(coeffs: &[Vec<[f64; MAX_WORD_LENGTH]>], window_length: usize, word_length: usize) -> Candidate {
    let bin_edges = learn_edges(coeffs, word_length);
    let histograms: Vec<Histogram> = coeffs
        .iter()
        .map(|c| histogram(c, &bin_edges, word_length))
        .collect();
    let sims = (0..histograms.len())
        .into_par_iter()
        .map(|i| histograms.iter().map(|h| cosine(&histograms[i], h)).collect())
        .collect();
    Candidate {
        window_length,
        word_length,
        bin_edges,
        histograms,
        sims,
    }
}

/// `p_c = sim_c / sum(sim)`, uniform when every similarity is zero.
pub(crate) fn probs_from_similarities(sims: &[f64]) -> Result<SlaveOutput> {
    if sims.iter().all(|&s| s <= 0.0) {
        return make_slave_output(&vec![1.0; sims.len()]);
    }
    make_slave_output(sims)
}

fn coefficients_all(series: &[Vec<f64>], window: usize) -> Vec<Vec<[f64; MAX_WORD_LENGTH]>> {
    series
        .par_iter()
        .map(|s| window_coefficients(s, window))
        .collect()
}

/// Real and imaginary parts of DFT coefficients 1..=3 of every
/// z-normalized sliding window (step 1).
fn window_coefficients(x: &[f64], window: usize) -> Vec<[f64; MAX_WORD_LENGTH]> {
    let n_coef = MAX_WORD_LENGTH / 2;
    let mut cos_table = vec![vec![0.0; window]; n_coef];
    let mut sin_table = vec![vec![0.0; window]; n_coef];
    for k in 0..n_coef {
        for t in 0..window {
            let angle = 2.0 * PI * (k + 1) as f64 * t as f64 / window as f64;
            cos_table[k][t] = angle.cos();
            sin_table[k][t] = angle.sin();
        }
    }
    (0..=x.len() - window)
        .map(|start| {
            let w = z_normalize_unchecked(&x[start..start + window]);
            let mut out = [0.0; MAX_WORD_LENGTH];
            for k in 0..n_coef {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in w.iter().enumerate() {
                    re += v * cos_table[k][t];
                    im -= v * sin_table[k][t];
                }
                out[2 * k] = re;
                out[2 * k + 1] = im;
            }
            out
        })
        .collect()
}

/// Equi-depth boundaries per coefficient position over all windows. Each
/// boundary sits halfway between the neighbouring order statistics.
fn learn_edges(coeffs: &[Vec<[f64; MAX_WORD_LENGTH]>], word_length: usize) -> Vec<Vec<f64>> {
    (0..word_length)
        .map(|pos| {
            let mut values: Vec<f64> = coeffs.iter().flatten().map(|c| c[pos]).collect();
            values.sort_by(f64::total_cmp);
            let m = values.len();
            (1..ALPHABET_SIZE)
                .map(|q| {
                    let idx = q * m / ALPHABET_SIZE;
                    if idx == 0 {
                        values[0]
                    } else {
                        0.5 * (values[idx - 1] + values[idx])
                    }
                })
                .collect()
        })
        .collect()
}

fn word(c: &[f64; MAX_WORD_LENGTH], edges: &[Vec<f64>], word_length: usize) -> u32 {
    (0..word_length).fold(0u32, |acc, pos| {
        let symbol = edges[pos].partition_point(|&e| e <= c[pos]) as u32;
        acc * ALPHABET_SIZE as u32 + symbol
    })
}

/// Consecutive identical words are counted once (numerosity reduction).
fn histogram(coeffs: &[[f64; MAX_WORD_LENGTH]], edges: &[Vec<f64>], word_length: usize) -> Histogram {
    let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
    let mut last = None;
    for c in coeffs {
        let w = word(c, edges, word_length);
        if last != Some(w) {
            *counts.entry(w).or_default() += 1;
            last = Some(w);
        }
    }
    counts.into_iter().collect()
}

pub(crate) fn cosine(a: &Histogram, b: &Histogram) -> f64 {
    let norm = |h: &Histogram| h.iter().map(|&(_, c)| (c as f64) * (c as f64)).sum::<f64>().sqrt();
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += a[i].1 as f64 * b[j].1 as f64;
                i += 1;
                j += 1;
            }
        }
    }
    dot / (na * nb)
}

fn class_maxima(
    row: &[f64],
    targets: &[usize],
    n_classes: usize,
    keep: impl Fn(usize) -> bool,
) -> Option<Vec<f64>> {
    let mut sims = vec![0.0; n_classes];
    let mut any = false;
    for (j, &s) in row.iter().enumerate() {
        if keep(j) {
            any = true;
            if s > sims[targets[j]] {
                sims[targets[j]] = s;
            }
        }
    }
    any.then_some(sims)
}
