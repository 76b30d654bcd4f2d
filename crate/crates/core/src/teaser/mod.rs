//! The two-tier early classifier: one slave/master pair per snapshot level
//! and a filter that emits a label once it was accepted `v` times in a row.

mod persist;
mod stream;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TeaserError};
use crate::master::{MasterModel, DEFAULT_GAMMA_GRID, DEFAULT_NU};
use crate::series::{z_normalize_unchecked, SnapshotSchedule, TimeSeries};
use crate::slaves::{Slave, SlaveKind, SlaveOutput};

pub use persist::{FORMAT_NAME, FORMAT_VERSION};
pub use stream::{classify_series, StreamState};
pub use train::train;

/// Number of snapshot levels the automatic interval length aims for.
pub const AUTO_LEVELS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalLength {
    /// `ceil(n_max / 20)`
    Auto,
    Fixed(usize),
}

impl IntervalLength {
    pub fn resolve(self, n_max: usize) -> usize {
        match self {
            IntervalLength::Auto => n_max.div_ceil(AUTO_LEVELS).max(1),
            IntervalLength::Fixed(w) => w,
        }
    }
}

impl fmt::Display for IntervalLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalLength::Auto => f.write_str("auto"),
            IntervalLength::Fixed(w) => write!(f, "{w}"),
        }
    }
}

impl FromStr for IntervalLength {
    type Err = TeaserError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(IntervalLength::Auto);
        }
        match s.parse::<usize>() {
            Ok(w) if w >= 1 => Ok(IntervalLength::Fixed(w)),
            _ => Err(TeaserError::InvalidConfiguration(format!(
                "interval length must be 'auto' or a positive integer, got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeaserConfig {
    pub w: IntervalLength,
    pub slave_kind: SlaveKind,
    pub nu: f64,
    pub gamma_grid: Vec<f64>,
    pub v_grid: Vec<usize>,
    /// Seeds cross-validation fold shuffling.
    pub seed: u64,
}

impl Default for TeaserConfig {
    fn default() -> Self {
        TeaserConfig {
            w: IntervalLength::Auto,
            slave_kind: SlaveKind::Dtw,
            nu: DEFAULT_NU,
            gamma_grid: DEFAULT_GAMMA_GRID.to_vec(),
            v_grid: (1..=5).collect(),
            seed: 0,
        }
    }
}

impl TeaserConfig {
    pub fn validate(&self) -> Result<()> {
        if let IntervalLength::Fixed(0) = self.w {
            return Err(TeaserError::InvalidConfiguration("w must be at least 1".into()));
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(TeaserError::InvalidConfiguration(format!(
                "nu must lie in (0, 1], got {}",
                self.nu
            )));
        }
        if self.gamma_grid.is_empty() || self.gamma_grid.iter().any(|g| !g.is_finite() || *g <= 0.0) {
            return Err(TeaserError::InvalidConfiguration(
                "gamma grid must be non-empty and positive".into(),
            ));
        }
        if self.v_grid.is_empty() || self.v_grid.contains(&0) {
            return Err(TeaserError::InvalidConfiguration(
                "v grid must be non-empty with values >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// One slave/master pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    /// Snapshot length this pair is used for.
    pub s: usize,
    pub slave: Slave,
    pub master: MasterModel,
    /// Set when too few series reached this length and the pair of an
    /// earlier (or the first trainable) level was copied.
    pub reused_from: Option<usize>,
    pub n_train: usize,
    pub n_correct: usize,
}

/// Score of one candidate agreement threshold on the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VScore {
    pub v: usize,
    pub accuracy: f64,
    pub earliness: f64,
    pub hm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeaserModel {
    pub schedule: SnapshotSchedule,
    pub class_labels: Vec<String>,
    pub slave_kind: SlaveKind,
    pub nu: f64,
    pub n_max: usize,
    pub v: usize,
    /// Label emitted when a stream ends before any level produced an output.
    pub fallback_class: usize,
    pub levels: Vec<Level>,
    pub v_scores: Vec<VScore>,
}

/// Final outcome for one series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub label: usize,
    pub s_used: usize,
    /// The stream ended without `v` consecutive acceptances.
    pub forced: bool,
}

/// Result of evaluating one level on one snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub level: usize,
    pub s: usize,
    pub output: SlaveOutput,
    pub accepted: bool,
}

impl TeaserModel {
    pub fn w(&self) -> usize {
        self.schedule.w
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_labels.len()
    }

    pub fn label_name(&self, class: usize) -> &str {
        &self.class_labels[class]
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.class_labels.iter().position(|c| c == label)
    }

    /// Train-set score of the selected `v`.
    pub fn train_score(&self) -> Option<&VScore> {
        self.v_scores.iter().find(|s| s.v == self.v)
    }

    /// Runs slave and master of `level` on a raw prefix. Returns `None` when
    /// the prefix is too short for the slave.
    pub fn evaluate_level(&self, level: usize, raw_prefix: &[f64], exclude: Option<usize>) -> Result<Option<Step>> {
        let pair = self.levels.get(level).ok_or_else(|| {
            TeaserError::InvalidArgument(format!("level {level} out of range"))
        })?;
        if raw_prefix.is_empty() {
            return Err(TeaserError::InvalidArgument("empty snapshot".into()));
        }
        let q = z_normalize_unchecked(raw_prefix);
        let output = match pair.slave.predict_excluding(&q, exclude) {
            Ok(o) => o,
            Err(TeaserError::TooShort { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let accepted = pair.master.decide(&output.features())?;
        Ok(Some(Step {
            level,
            s: raw_prefix.len(),
            output,
            accepted,
        }))
    }

    pub fn classify(&self, t: &TimeSeries) -> Result<Decision> {
        classify_series(self, t)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let k = self.class_labels.len();
        if k == 0 {
            return Err(TeaserError::Format("model has no classes".into()));
        }
        if self.levels.len() != self.schedule.levels() || self.levels.is_empty() {
            return Err(TeaserError::Format(format!(
                "{} levels for a schedule of {}",
                self.levels.len(),
                self.schedule.levels()
            )));
        }
        if self.v == 0 || self.fallback_class >= k {
            return Err(TeaserError::Format("invalid threshold or fallback class".into()));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if level.slave.n_classes() != k || level.master.dim() != k + 1 {
                return Err(TeaserError::Format(format!("level {i} has inconsistent dimensions")));
            }
        }
        Ok(())
    }
}

/// Consecutive-acceptance counter shared by streaming and training replay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct Streak {
    pub label: Option<usize>,
    pub length: usize,
}

impl Streak {
    /// A rejection clears the streak; an accepted label different from the
    /// current one starts a new streak of length one.
    pub fn observe(&mut self, label: usize, accepted: bool) {
        if !accepted {
            *self = Streak::default();
        } else if self.label == Some(label) {
            self.length += 1;
        } else {
            self.label = Some(label);
            self.length = 1;
        }
    }

    pub fn reached(&self, v: usize) -> bool {
        self.length >= v
    }
}
