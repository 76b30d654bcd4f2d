#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use teaser_core::master::{MasterModel, OneClassSvm};
use teaser_core::series::{z_normalize, SnapshotSchedule, TimeSeries};
use teaser_core::slaves::{DtwSlave, Slave, SlaveKind};
use teaser_core::teaser::{Level, TeaserModel};
use teaser_core::{LabeledDataset, TeaserError};

/// Minimum squared-cost alignment over every monotone warping path.
pub fn exhaustive_dtw(a: &[f64], b: &[f64]) -> f64 {
    fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (a[i] - b[j]) * (a[i] - b[j]);
        if i + 1 == a.len() && j + 1 == b.len() {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < a.len() {
            walk(a, b, i + 1, j, acc, best);
        }
        if j + 1 < b.len() {
            walk(a, b, i, j + 1, acc, best);
        }
        if i + 1 < a.len() && j + 1 < b.len() {
            walk(a, b, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, 0, 0, 0.0, &mut best);
    best
}

pub fn rbf_matrix(x: &[Vec<f64>], gamma: f64) -> DMatrix<f64> {
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| {
        let sq: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| (a - b) * (a - b)).sum();
        (-gamma * sq).exp()
    })
}

/// Minimum of `0.5 a'Ka` subject to `sum(a) = 1`, `0 <= a <= c`, found by
/// enumerating which coordinates sit at 0, at `c`, or strictly between and
/// solving the equality-constrained system for the free ones.
pub fn brute_force_qp(k: &DMatrix<f64>, c: f64) -> (f64, Vec<f64>) {
    let n = k.nrows();
    assert!(n <= 10);
    let mut best = (f64::INFINITY, Vec::new());
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut x = code;
        for s in state.iter_mut() {
            *s = (x % 3) as u8;
            x /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha = vec![0.0; n];
        for &i in &upper {
            alpha[i] = c;
        }
        let fixed_sum = c * upper.len() as f64;
        if free.is_empty() {
            if (fixed_sum - 1.0).abs() > 1e-9 {
                continue;
            }
        } else {
            let m = free.len();
            let mut sys = DMatrix::zeros(m + 1, m + 1);
            let mut rhs = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    sys[(r, s)] = k[(i, j)];
                }
                sys[(r, m)] = 1.0;
                sys[(m, r)] = 1.0;
                rhs[r] = -upper.iter().map(|&j| k[(i, j)] * c).sum::<f64>();
            }
            rhs[m] = 1.0 - fixed_sum;
            let Some(sol) = sys.lu().solve(&rhs) else {
                continue;
            };
            if free.iter().enumerate().any(|(r, _)| sol[r] < -1e-12 || sol[r] > c + 1e-12) {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r].clamp(0.0, c);
            }
        }
        let a = DVector::from_vec(alpha.clone());
        let obj = 0.5 * (a.transpose() * k * &a)[(0, 0)];
        if obj < best.0 {
            best = (obj, alpha);
        }
    }
    best
}

fn ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut r = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    cov / (vx * vy).sqrt()
}

pub fn hm(accuracy: f64, earliness: f64) -> f64 {
    let denom = (1.0 - earliness) + accuracy;
    if denom == 0.0 {
        0.0
    } else {
        2.0 * (1.0 - earliness) * accuracy / denom
    }
}

pub fn reject_all(dim: usize) -> MasterModel {
    MasterModel::OneClass(OneClassSvm {
        support: vec![vec![0.0; dim]],
        alphas: vec![1.0],
        rho: 2.0,
        gamma: 1.0,
        nu: 0.05,
        n_train: 1,
        converged: true,
    })
}

/// A two-class model over `script.len()` levels of width `w` whose slave at
/// level `i` labels prefixes of `query` as `script[i].0` and whose master
/// accepts iff `script[i].1`.
pub fn scripted_model(query: &[f64], w: usize, script: &[(usize, bool)], v: usize) -> TeaserModel {
    let lengths: Vec<usize> = (1..=script.len()).map(|i| i * w).collect();
    assert!(query.len() >= *lengths.last().unwrap());
    let levels = script
        .iter()
        .zip(&lengths)
        .map(|(&(label, accept), &s)| {
            let own = z_normalize(&query[..s]).unwrap();
            let other: Vec<f64> = own.iter().map(|x| -x).collect();
            let slave = DtwSlave {
                exemplars: vec![own, other],
                targets: vec![label, 1 - label],
                sources: Vec::new(),
                n_classes: 2,
                band: 1.0,
                cv_accuracy: None,
            };
            Level {
                s,
                slave: Slave::Dtw(slave),
                master: if accept { MasterModel::AcceptAll { dim: 3 } } else { reject_all(3) },
                reused_from: None,
                n_train: 2,
                n_correct: 2,
            }
        })
        .collect();
    TeaserModel {
        schedule: SnapshotSchedule { w, lengths },
        class_labels: vec!["A".into(), "B".into()],
        slave_kind: SlaveKind::Dtw,
        nu: 0.05,
        n_max: script.len() * w,
        v,
        fallback_class: 0,
        levels,
        v_scores: Vec::new(),
    }
}

pub fn scripted_query(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 * 0.7).sin() + 0.05 * i as f64).collect()
}

/// (label, accepted, s) for each level a training series passes through
/// with its own exemplar left out.
pub fn replay_trace(model: &TeaserModel, values: &[f64], source: usize) -> Vec<(usize, bool, usize)> {
    let lengths = &model.schedule.lengths;
    let len = values.len().min(*lengths.last().unwrap());
    let mut steps = Vec::new();
    for (i, &s) in lengths.iter().enumerate() {
        let at = if s <= len {
            s
        } else if i == 0 || lengths[i - 1] < len {
            len
        } else {
            break;
        };
        let q = z_normalize(&values[..at]).unwrap();
        match model.levels[i].slave.predict_excluding(&q, Some(source)) {
            Ok(out) => {
                let accepted = model.levels[i].master.decide(&out.features()).unwrap();
                steps.push((out.label, accepted, at));
            }
            Err(TeaserError::TooShort { .. }) => {}
            Err(e) => panic!("{e}"),
        }
        if s > len {
            break;
        }
    }
    steps
}

/// Decision `(label, s_used)` of the v-in-a-row rule over a trace.
pub fn streak_decision(trace: &[(usize, bool, usize)], v: usize, len: usize, fallback: usize) -> (usize, usize) {
    let mut run: Option<(usize, usize)> = None;
    for &(label, accepted, s) in trace {
        run = match (accepted, run) {
            (false, _) => None,
            (true, Some((l, n))) if l == label => Some((l, n + 1)),
            (true, _) => Some((label, 1)),
        };
        if let Some((l, n)) = run {
            if n >= v {
                return (l, s);
            }
        }
    }
    (trace.last().map_or(fallback, |t| t.0), len)
}

/// Train-set HM of every `v`, recomputed from scratch.
pub fn brute_force_v(model: &TeaserModel, data: &LabeledDataset, grid: &[usize]) -> Vec<(usize, f64)> {
    let cap = model.schedule.max_len();
    let traces: Vec<_> = data
        .series()
        .iter()
        .enumerate()
        .map(|(j, t)| replay_trace(model, t.values(), j))
        .collect();
    grid.iter()
        .map(|&v| {
            let mut correct = 0usize;
            let mut early = 0.0;
            for (j, t) in data.series().iter().enumerate() {
                let (label, s) = streak_decision(&traces[j], v, t.len().min(cap), model.fallback_class);
                if label == data.targets()[j] {
                    correct += 1;
                }
                early += s as f64 / t.len() as f64;
            }
            let n = data.len() as f64;
            (v, hm(correct as f64 / n, early / n))
        })
        .collect()
}

/// Small labeled set: classes differ by a bump at a class-specific place,
/// lengths vary between series.
pub fn random_dataset(rng: &mut ChaCha8Rng) -> LabeledDataset {
    let k = rng.random_range(2..=3);
    let per = rng.random_range(3..=7);
    let n_min = rng.random_range(12..=24);
    let n_max = n_min + rng.random_range(0..=16);
    let noise = rng.random_range(0.2..1.5);
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for c in 0..k {
        for _ in 0..per {
            let n = rng.random_range(n_min..=n_max);
            let centre = (c + 1) as f64 * n as f64 / (k + 1) as f64;
            let values = (0..n)
                .map(|i| {
                    let d = (i as f64 - centre) / 2.0;
                    2.0 * (-d * d).exp() + noise * (rng.random::<f64>() - 0.5)
                })
                .collect();
            series.push(TimeSeries::new(values).unwrap());
            labels.push(format!("c{c}"));
        }
    }
    LabeledDataset::new(series, labels).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
