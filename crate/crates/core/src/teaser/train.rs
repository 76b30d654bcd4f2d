use rayon::prelude::*;

use crate::error::{Result, TeaserError};
use crate::master::{select_gamma, MasterModel};
use crate::metrics::harmonic_mean;
use crate::series::{build_schedule, z_normalize_unchecked, LabeledDataset};
use crate::slaves::{LevelData, Slave};
use crate::teaser::{Decision, Level, Step, StreamState, Streak, TeaserConfig, TeaserModel, VScore};

/// Trains one slave/master pair per snapshot level and selects the
/// agreement threshold `v` by replaying the training set.
pub fn train(data: &LabeledDataset, config: &TeaserConfig) -> Result<TeaserModel> {
    config.validate()?;
    let k = data.n_classes();
    if k < 2 {
        return Err(TeaserError::InvalidTrainingSet(format!(
            "need at least two classes, found {k}"
        )));
    }
    let counts = data.class_counts();
    if let Some(c) = counts.iter().position(|&n| n < 2) {
        return Err(TeaserError::InvalidTrainingSet(format!(
            "class '{}' has {} example(s); at least 2 are required",
            data.classes()[c],
            counts[c]
        )));
    }

    let n_max = data.n_max();
    let w = config.w.resolve(n_max);
    let schedule = build_schedule(n_max, w)?;

    let fitted: Vec<Option<Level>> = schedule
        .lengths
        .par_iter()
        .enumerate()
        .map(|(i, &s)| fit_level(data, config, i, s))
        .collect::<Result<_>>()?;

    let first = fitted.iter().position(Option::is_some).ok_or_else(|| {
        TeaserError::InvalidTrainingSet(
            "no snapshot level has at least two series of every class".into(),
        )
    })?;
    let mut fitted = fitted;
    let first_level = fitted[first].clone().unwrap();
    for i in 0..fitted.len() {
        if fitted[i].is_some() {
            continue;
        }
        let (src, template) = if i < first {
            (first, first_level.clone())
        } else {
            let prev = fitted[i - 1].as_ref().unwrap();
            (prev.reused_from.unwrap_or(i - 1), prev.clone())
        };
        fitted[i] = Some(Level {
            s: schedule.lengths[i],
            reused_from: Some(src),
            ..template
        });
    }
    let levels: Vec<Level> = fitted.into_iter().map(Option::unwrap).collect();

    let fallback_class = (0..k).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))).unwrap();
    let mut model = TeaserModel {
        schedule,
        class_labels: data.classes().to_vec(),
        slave_kind: config.slave_kind,
        nu: config.nu,
        n_max,
        v: 1,
        fallback_class,
        levels,
        v_scores: Vec::new(),
    };

    let traces: Vec<Vec<Step>> = (0..data.len())
        .into_par_iter()
        .map(|j| training_trace(&model, data.series()[j].values(), j))
        .collect::<Result<_>>()?;

    let mut grid = config.v_grid.clone();
    grid.sort_unstable();
    grid.dedup();
    let cap = model.schedule.max_len();
    let mut best: Option<VScore> = None;
    for &v in &grid {
        let decisions: Vec<Decision> = traces
            .iter()
            .zip(data.series())
            .map(|(trace, t)| decide_from_trace(trace, v, t.len().min(cap), fallback_class))
            .collect();
        let score = score_decisions(&decisions, data, v);
        if best.as_ref().is_none_or(|b| score.hm > b.hm) {
            best = Some(score.clone());
        }
        model.v_scores.push(score);
    }
    model.v = best.unwrap().v;
    Ok(model)
}

fn level_seed(seed: u64, level: usize) -> u64 {
    seed ^ (level as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// `None` when some class has fewer than two series reaching length `s`.
fn fit_level(data: &LabeledDataset, config: &TeaserConfig, index: usize, s: usize) -> Result<Option<Level>> {
    let k = data.n_classes();
    let members: Vec<usize> = (0..data.len()).filter(|&j| data.series()[j].len() >= s).collect();
    let mut counts = vec![0; k];
    for &j in &members {
        counts[data.targets()[j]] += 1;
    }
    if counts.iter().any(|&c| c < 2) {
        return Ok(None);
    }
    let level_data = LevelData {
        series: members
            .iter()
            .map(|&j| z_normalize_unchecked(&data.series()[j].values()[..s]))
            .collect(),
        targets: members.iter().map(|&j| data.targets()[j]).collect(),
        sources: members.clone(),
        n_classes: k,
    };
    let fit = Slave::fit(config.slave_kind, &level_data, level_seed(config.seed, index))?;

    let mut correct = Vec::new();
    let mut incorrect = Vec::new();
    for (out, &target) in fit.train_outputs.iter().zip(&level_data.targets) {
        if out.label == target {
            correct.push(out.features());
        } else {
            incorrect.push(out.features());
        }
    }
    let master = if correct.len() >= 2 {
        select_gamma(&correct, &incorrect, config.nu, &config.gamma_grid)?.model
    } else {
        MasterModel::AcceptAll { dim: k + 1 }
    };
    Ok(Some(Level {
        s,
        slave: fit.slave,
        master,
        reused_from: None,
        n_train: members.len(),
        n_correct: correct.len(),
    }))
}

/// Every level a training series passes through, evaluated with the
/// series' own exemplar left out of each slave.
pub(crate) fn training_trace(model: &TeaserModel, values: &[f64], source: usize) -> Result<Vec<Step>> {
    let mut state = StreamState::tracing(Some(source));
    state.push(model, values)?;
    state.finish(model)?;
    Ok(state.into_steps())
}

/// Applies the streak rule with threshold `v` to a recorded trace.
pub(crate) fn decide_from_trace(trace: &[Step], v: usize, len: usize, fallback: usize) -> Decision {
    let mut streak = Streak::default();
    for step in trace {
        streak.observe(step.output.label, step.accepted);
        if streak.reached(v) {
            return Decision {
                label: step.output.label,
                s_used: step.s,
                forced: false,
            };
        }
    }
    Decision {
        label: trace.last().map_or(fallback, |s| s.output.label),
        s_used: len,
        forced: true,
    }
}

fn score_decisions(decisions: &[Decision], data: &LabeledDataset, v: usize) -> VScore {
    let n = decisions.len() as f64;
    let correct = decisions
        .iter()
        .zip(data.targets())
        .filter(|(d, &t)| d.label == t)
        .count();
    let earliness = decisions
        .iter()
        .zip(data.series())
        .map(|(d, t)| d.s_used as f64 / t.len() as f64)
        .sum::<f64>()
        / n;
    let accuracy = correct as f64 / n;
    VScore {
        v,
        accuracy,
        earliness,
        hm: harmonic_mean(accuracy, earliness),
    }
}
