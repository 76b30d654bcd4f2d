//! Accuracy, earliness, their harmonic mean, Pareto domination counts and
//! the evaluation/sweep drivers built on them.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, TeaserError};
use crate::series::LabeledDataset;
use crate::teaser::{classify_series, train, IntervalLength, TeaserConfig, TeaserModel};

pub fn accuracy<T: PartialEq>(pairs: &[(T, T)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(TeaserError::InvalidArgument("accuracy of an empty test set".into()));
    }
    let correct = pairs.iter().filter(|(t, p)| t == p).count();
    Ok(correct as f64 / pairs.len() as f64)
}

/// Mean of `s_used / len` over `(s_used, len)` pairs.
pub fn earliness(decisions: &[(usize, usize)]) -> Result<f64> {
    if decisions.is_empty() {
        return Err(TeaserError::InvalidArgument("earliness of an empty test set".into()));
    }
    let mut total = 0.0;
    for &(s_used, len) in decisions {
        if len == 0 || s_used > len {
            return Err(TeaserError::InvalidArgument(format!(
                "decision after {s_used} points on a series of length {len}"
            )));
        }
        total += s_used as f64 / len as f64;
    }
    Ok(total / decisions.len() as f64)
}

/// `2 (1 - earliness) accuracy / ((1 - earliness) + accuracy)`, and 0 when
/// both terms vanish.
pub fn harmonic_mean(accuracy: f64, earliness: f64) -> f64 {
    let timeliness = 1.0 - earliness;
    let denom = timeliness + accuracy;
    if denom <= 0.0 {
        return 0.0;
    }
    2.0 * timeliness * accuracy / denom
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ParetoCounts {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

/// Per-dataset Pareto comparison of `(accuracy, earliness)` pairs. A method
/// wins when it is no worse in both metrics and strictly better in one;
/// incomparable pairs count as ties.
pub fn pareto_counts(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<ParetoCounts> {
    if a.len() != b.len() {
        return Err(TeaserError::InvalidArgument(format!(
            "{} results compared against {}",
            a.len(),
            b.len()
        )));
    }
    let dominates = |x: (f64, f64), y: (f64, f64)| {
        x.0 >= y.0 && x.1 <= y.1 && (x.0 > y.0 || x.1 < y.1)
    };
    let mut counts = ParetoCounts::default();
    for (&x, &y) in a.iter().zip(b) {
        if dominates(x, y) {
            counts.wins += 1;
        } else if dominates(y, x) {
            counts.losses += 1;
        } else {
            counts.ties += 1;
        }
    }
    Ok(counts)
}

/// One classified test series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRow {
    pub truth: String,
    pub prediction: String,
    pub s_used: usize,
    pub length: usize,
    pub forced: bool,
}

impl EvalRow {
    pub fn correct(&self) -> bool {
        self.truth == self.prediction
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub earliness: f64,
    pub hm: f64,
    pub n_test: usize,
    pub n_correct: usize,
    pub n_forced: usize,
    pub forced_fraction: f64,
    /// Test series whose label the model never saw.
    pub n_unknown_labels: usize,
    /// Test series longer than the model's last snapshot.
    pub n_truncated: usize,
    #[serde(skip)]
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn from_rows(rows: Vec<EvalRow>, n_unknown_labels: usize, n_truncated: usize) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = rows.iter().map(|r| (r.truth.as_str(), r.prediction.as_str())).collect();
        let acc = accuracy(&pairs)?;
        let early = earliness(&rows.iter().map(|r| (r.s_used, r.length)).collect::<Vec<_>>())?;
        let n_forced = rows.iter().filter(|r| r.forced).count();
        Ok(EvalReport {
            accuracy: acc,
            earliness: early,
            hm: harmonic_mean(acc, early),
            n_test: rows.len(),
            n_correct: rows.iter().filter(|r| r.correct()).count(),
            n_forced,
            forced_fraction: n_forced as f64 / rows.len() as f64,
            n_unknown_labels,
            n_truncated,
            rows,
        })
    }

    /// Median of the per-series fractions `s_used / length`.
    pub fn median_earliness(&self) -> f64 {
        let mut f: Vec<f64> = self.rows.iter().map(|r| r.s_used as f64 / r.length as f64).collect();
        f.sort_by(f64::total_cmp);
        let n = f.len();
        if n % 2 == 1 {
            f[n / 2]
        } else {
            0.5 * (f[n / 2 - 1] + f[n / 2])
        }
    }

    /// Per-series CSV: `truth,prediction,s_used,length,forced`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "truth,prediction,s_used,length,forced")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{}", r.truth, r.prediction, r.s_used, r.length, r.forced)?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Classifies every test series and scores the decisions.
pub fn evaluate(model: &TeaserModel, test: &LabeledDataset) -> Result<EvalReport> {
    let cap = model.schedule.max_len();
    let rows: Vec<EvalRow> = test
        .series()
        .par_iter()
        .zip(test.labels().par_iter())
        .map(|(t, truth)| {
            let d = classify_series(model, t)?;
            Ok(EvalRow {
                truth: truth.clone(),
                prediction: model.label_name(d.label).to_string(),
                s_used: d.s_used,
                length: t.len(),
                forced: d.forced,
            })
        })
        .collect::<Result<_>>()?;
    let unknown = test.labels().iter().filter(|l| model.class_index(l).is_none()).count();
    let truncated = test.series().iter().filter(|t| t.len() > cap).count();
    EvalReport::from_rows(rows, unknown, truncated)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub w: usize,
    pub report: EvalReport,
}

/// Trains and evaluates one model per interval length, in the given order.
pub fn sweep_w(
    train_set: &LabeledDataset,
    test_set: &LabeledDataset,
    config: &TeaserConfig,
    w_values: &[usize],
) -> Result<Vec<SweepPoint>> {
    if w_values.is_empty() {
        return Err(TeaserError::InvalidArgument("no interval lengths to sweep".into()));
    }
    w_values
        .iter()
        .map(|&w| {
            let cfg = TeaserConfig {
                w: IntervalLength::Fixed(w),
                ..config.clone()
            };
            let model = train(train_set, &cfg)?;
            Ok(SweepPoint {
                w,
                report: evaluate(&model, test_set)?,
            })
        })
        .collect()
}

/// Plot-ready rows: `w,truth,prediction,s_used,length,forced`.
pub fn write_sweep_csv<W: Write>(points: &[SweepPoint], mut out: W) -> Result<()> {
    writeln!(out, "w,truth,prediction,s_used,length,forced")?;
    for p in points {
        for r in &p.report.rows {
            writeln!(out, "{},{},{},{},{},{}", p.w, r.truth, r.prediction, r.s_used, r.length, r.forced)?;
        }
    }
    Ok(())
}
