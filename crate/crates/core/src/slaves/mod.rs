//! Snapshot-level probabilistic classifiers ("slaves").
//!
//! Every slave emits a [`SlaveOutput`]: the predicted class, the class
//! probability vector and the gap between the two highest probabilities.

mod bop;
mod cv;
mod dtw;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeaserError};

pub use bop::{BopSlave, ALPHABET_SIZE, WORD_LENGTHS};
pub use dtw::{dtw_distance, DtwSlave, BAND_GRID, PROBABILITY_SOFTNESS};

/// Output of a slave for one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlaveOutput {
    pub label: usize,
    pub probs: Vec<f64>,
    pub delta_d: f64,
}

impl SlaveOutput {
    /// Feature vector for the master: probabilities followed by the gap.
    pub fn features(&self) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.probs.len() + 1);
        f.extend_from_slice(&self.probs);
        f.push(self.delta_d);
        f
    }
}

/// Normalizes non-negative scores into a [`SlaveOutput`]. Ties in the
/// argmax go to the lowest class index. With a single class the gap is
/// the probability of that class.
pub fn make_slave_output(probs: &[f64]) -> Result<SlaveOutput> {
    if probs.is_empty() {
        return Err(TeaserError::InvalidArgument("empty probability vector".into()));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(TeaserError::InvalidArgument(
            "probabilities must be finite and non-negative".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(TeaserError::InvalidArgument(
            "probability vector sums to zero".into(),
        ));
    }
    let probs: Vec<f64> = probs.iter().map(|p| p / total).collect();

    let mut first = 0;
    for (j, &p) in probs.iter().enumerate() {
        if p > probs[first] {
            first = j;
        }
    }
    let second = probs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != first)
        .map(|(_, &p)| p)
        .fold(None, |acc: Option<f64>, p| Some(acc.map_or(p, |a| a.max(p))));
    let delta_d = match second {
        Some(p2) => (probs[first] - p2).clamp(0.0, 1.0),
        None => probs[first],
    };
    Ok(SlaveOutput {
        label: first,
        probs,
        delta_d,
    })
}

/// Training data for one snapshot level: z-normalized snapshots with their
/// class indices and their positions in the original training set.
#[derive(Debug, Clone)]
pub struct LevelData {
    pub series: Vec<Vec<f64>>,
    pub targets: Vec<usize>,
    pub sources: Vec<usize>,
    pub n_classes: usize,
}

impl LevelData {
    pub fn new(series: Vec<Vec<f64>>, targets: Vec<usize>, n_classes: usize) -> Result<Self> {
        let sources = (0..series.len()).collect();
        let data = LevelData {
            series,
            targets,
            sources,
            n_classes,
        };
        data.validate()?;
        Ok(data)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.series.len() != self.targets.len() || self.series.len() != self.sources.len() {
            return Err(TeaserError::InvalidArgument(
                "level data columns differ in length".into(),
            ));
        }
        if self.series.iter().any(Vec::is_empty) {
            return Err(TeaserError::InvalidArgument("empty snapshot in level data".into()));
        }
        let counts = self.class_counts();
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(TeaserError::InvalidTrainingSet(format!(
                "class {c} has no examples"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &t in &self.targets {
            if t < self.n_classes {
                counts[t] += 1;
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlaveKind {
    Dtw,
    Bop,
}

impl fmt::Display for SlaveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlaveKind::Dtw => f.write_str("dtw"),
            SlaveKind::Bop => f.write_str("bop"),
        }
    }
}

impl FromStr for SlaveKind {
    type Err = TeaserError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dtw" => Ok(SlaveKind::Dtw),
            "bop" => Ok(SlaveKind::Bop),
            other => Err(TeaserError::InvalidConfiguration(format!(
                "unknown slave kind '{other}' (expected dtw or bop)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Slave {
    Dtw(DtwSlave),
    Bop(BopSlave),
}

/// A fitted slave together with its out-of-sample outputs on the training
/// snapshots (each computed with that snapshot's own exemplar left out).
#[derive(Debug, Clone)]
pub struct SlaveFit {
    pub slave: Slave,
    pub train_outputs: Vec<SlaveOutput>,
}

impl Slave {
    pub fn fit(kind: SlaveKind, data: &LevelData, seed: u64) -> Result<SlaveFit> {
        match kind {
            SlaveKind::Dtw => {
                let (slave, train_outputs) = DtwSlave::fit_with_outputs(data, seed)?;
                Ok(SlaveFit {
                    slave: Slave::Dtw(slave),
                    train_outputs,
                })
            }
            SlaveKind::Bop => {
                let (slave, train_outputs) = BopSlave::fit_with_outputs(data, seed)?;
                Ok(SlaveFit {
                    slave: Slave::Bop(slave),
                    train_outputs,
                })
            }
        }
    }

    pub fn kind(&self) -> SlaveKind {
        match self {
            Slave::Dtw(_) => SlaveKind::Dtw,
            Slave::Bop(_) => SlaveKind::Bop,
        }
    }

    pub fn n_classes(&self) -> usize {
        match self {
            Slave::Dtw(s) => s.n_classes,
            Slave::Bop(s) => s.n_classes,
        }
    }

    pub fn cv_accuracy(&self) -> Option<f64> {
        match self {
            Slave::Dtw(s) => s.cv_accuracy,
            Slave::Bop(s) => s.cv_accuracy,
        }
    }

    pub fn predict(&self, q: &[f64]) -> Result<SlaveOutput> {
        self.predict_excluding(q, None)
    }

    /// Predicts while ignoring the training exemplar that originated from
    /// training-set position `exclude`.
    pub fn predict_excluding(&self, q: &[f64], exclude: Option<usize>) -> Result<SlaveOutput> {
        match self {
            Slave::Dtw(s) => s.predict_excluding(q, exclude),
            Slave::Bop(s) => s.predict_excluding(q, exclude),
        }
    }

}
