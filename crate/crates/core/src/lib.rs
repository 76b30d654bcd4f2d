//! Early time-series classification with paired slave/master classifiers.
//!
//! A model holds one probabilistic slave and one one-class master per
//! snapshot length `w, 2w, ...`. While a series streams in, each completed
//! snapshot is classified by its slave; the master decides whether the
//! slave's probabilities look like those of correct predictions, and a
//! label is emitted once it has been accepted `v` times in a row.

pub mod data;
pub mod error;
pub mod master;
pub mod metrics;
pub mod series;
pub mod slaves;
pub mod synth;
pub mod teaser;

pub use error::{Result, TeaserError};
pub use master::MasterModel;
pub use metrics::{evaluate, harmonic_mean, EvalReport};
pub use series::{LabeledDataset, Snapshot, SnapshotSchedule, TimeSeries};
pub use slaves::{SlaveKind, SlaveOutput};
pub use teaser::{classify_series, train, Decision, IntervalLength, StreamState, TeaserConfig, TeaserModel};
