mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;

use teaser_core::master::{solve_dual, MasterModel};
use teaser_core::metrics::{evaluate, harmonic_mean, sweep_w};
use teaser_core::series::z_normalize;
use teaser_core::slaves::{dtw_distance, LevelData, Slave, SlaveKind};
use teaser_core::synth::{self, SynthData, SynthSpec};
use teaser_core::teaser::{classify_series, train, IntervalLength, StreamState, TeaserConfig, TeaserModel};
use teaser_core::{Decision, TimeSeries};

use common::*;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < limit, format!("{:.2}s of {}s", t.as_secs_f64(), limit.as_secs()))
}

fn dtw_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut mismatches = 0;
    let pairs = 600;
    for _ in 0..pairs {
        let n = r.random_range(1..=8);
        let m = r.random_range(1..=8);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        let got = dtw_distance(&a, &b, 1.0).unwrap();
        if got != exhaustive_dtw(&a, &b) {
            mismatches += 1;
        }
    }
    let (fast, t) = within(start, Duration::from_secs(10));
    outcome(mismatches == 0 && fast, format!("{pairs} pairs, {mismatches} mismatches, {t}"))
}

fn svm_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(2);
    let mut worst_gap: f64 = 0.0;
    let mut feasible = true;
    let check = |alphas: &[f64], c: f64| {
        let sum: f64 = alphas.iter().sum();
        (sum - 1.0).abs() <= 1e-6 && alphas.iter().all(|&a| a >= 0.0 && a <= c + 1e-12)
    };
    for _ in 0..200 {
        let n = r.random_range(2..=8);
        let dim = r.random_range(1..=4);
        let nu = r.random_range(0.05..0.95);
        let gamma = [0.1, 1.0, 2.0, 5.0, 10.0][r.random_range(0..5)];
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| r.random::<f64>()).collect()).collect();
        let sol = solve_dual(&x, nu, gamma);
        let c = 1.0 / (nu * n as f64);
        let (oracle, _) = brute_force_qp(&rbf_matrix(&x, gamma), c);
        worst_gap = worst_gap.max((sol.objective - oracle).abs());
        feasible &= check(&sol.alphas, c);
    }

    let mut worst_reject: f64 = 0.0;
    for (seed, gamma) in [(3u64, 1.0), (4, 10.0), (5, 50.0)] {
        let mut r = rng(seed);
        let centres = [[0.9, 0.1, 0.8], [0.6, 0.4, 0.2]];
        let x: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let c = centres[i % 2];
                c.iter().map(|m| m + 0.05 * gauss(&mut r)).collect()
            })
            .collect();
        let sol = solve_dual(&x, 0.05, gamma);
        feasible &= check(&sol.alphas, sol.upper_bound);
        let model = MasterModel::train(&x, 0.05, gamma).unwrap();
        let rejected = x.iter().filter(|f| !model.decide(f).unwrap()).count();
        worst_reject = worst_reject.max(rejected as f64 / 200.0);
    }
    let (fast, t) = within(start, Duration::from_secs(30));
    outcome(
        worst_gap <= 1e-3 && worst_reject <= 0.10 && feasible && fast,
        format!(
            "max |dual - oracle| = {worst_gap:.2e}, max rejection at N'=200 = {worst_reject:.3}, feasible = {feasible}, {t}"
        ),
    )
}

fn gauss(r: &mut impl Rng) -> f64 {
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn metric_formulas() -> Outcome {
    let a = harmonic_mean(0.83, 0.19);
    let b = harmonic_mean(1.0, 0.0);
    outcome(
        (a - 0.8199).abs() <= 1e-3 && b == 1.0,
        format!("HM(0.83, 0.19) = {a:.4}, HM(1, 0) = {b}"),
    )
}

fn v_oracle() -> Outcome {
    let mut r = rng(7);
    let mut matches = 0;
    let trials = 20;
    let mut notes = Vec::new();
    for trial in 0..trials {
        let data = random_dataset(&mut r);
        let config = TeaserConfig {
            w: IntervalLength::Fixed(r.random_range(2..=6)),
            slave_kind: if trial % 2 == 0 { SlaveKind::Dtw } else { SlaveKind::Bop },
            seed: r.random(),
            ..Default::default()
        };
        let model = train(&data, &config).unwrap();
        let scores = brute_force_v(&model, &data, &[1, 2, 3, 4, 5]);
        let best = scores
            .iter()
            .fold(scores[0], |best, &s| if s.1 > best.1 { s } else { best });
        if best.0 == model.v {
            matches += 1;
        } else {
            notes.push(format!("trial {trial}: trained v={} oracle v={}", model.v, best.0));
        }
    }
    outcome(matches == trials, format!("{matches}/{trials} exact matches {}", notes.join("; ")))
}

struct SynthRun {
    kind: SlaveKind,
    accuracy: f64,
    earliness: f64,
    rho: f64,
}

fn synth_data() -> SynthData {
    synth::generate(&SynthSpec::default()).unwrap()
}

fn run_teaser(data: &SynthData, kind: SlaveKind) -> SynthRun {
    let train_set = synth::to_dataset(&data.train).unwrap();
    let test_set = synth::to_dataset(&data.test).unwrap();
    let model = train(&train_set, &TeaserConfig { slave_kind: kind, ..Default::default() }).unwrap();
    let report = evaluate(&model, &test_set).unwrap();
    let offsets: Vec<f64> = data.test.iter().map(|t| t.offset as f64).collect();
    let used: Vec<f64> = report.rows.iter().map(|r| r.s_used as f64).collect();
    SynthRun {
        kind,
        accuracy: report.accuracy,
        earliness: report.earliness,
        rho: spearman(&offsets, &used),
    }
}

/// 1-NN slave on every series cut to `s` points.
fn fixed_time_accuracy(data: &SynthData, kind: SlaveKind, s: usize) -> f64 {
    let train_set = synth::to_dataset(&data.train).unwrap();
    let test_set = synth::to_dataset(&data.test).unwrap();
    let cut = |t: &TimeSeries| z_normalize(&t.values()[..s.min(t.len())]).unwrap();
    let level = LevelData::new(
        train_set.series().iter().map(cut).collect(),
        train_set.targets().to_vec(),
        train_set.n_classes(),
    )
    .unwrap();
    let slave = Slave::fit(kind, &level, 0).unwrap().slave;
    let correct = test_set
        .series()
        .iter()
        .zip(test_set.labels())
        .filter(|(t, l)| train_set.classes()[slave.predict(&cut(t)).unwrap().label] == **l)
        .count();
    correct as f64 / test_set.len() as f64
}

fn adaptive_earliness(data: &SynthData) -> Outcome {
    let start = Instant::now();
    let burst = SynthSpec::default().burst_length;
    let len = data.train[0].values.len();
    let s_fixed = (data.train.iter().map(|t| t.offset).max().unwrap() + burst).min(len);
    let fixed_earliness = s_fixed as f64 / len as f64;

    let mut lines = Vec::new();
    let mut any = false;
    for kind in [SlaveKind::Dtw, SlaveKind::Bop] {
        let run = run_teaser(data, kind);
        let fixed_acc = fixed_time_accuracy(data, kind, s_fixed);
        let ok = run.accuracy >= 0.90
            && run.earliness <= 0.60
            && run.rho >= 0.5
            && fixed_earliness > run.earliness
            && run.accuracy >= fixed_acc - 0.05;
        any |= ok;
        lines.push(format!(
            "{}: acc {:.3} earliness {:.3} spearman {:.3} | fixed-time s={s_fixed} acc {:.3} earliness {:.3} [{}]",
            run.kind,
            run.accuracy,
            run.earliness,
            run.rho,
            fixed_acc,
            fixed_earliness,
            if ok { "ok" } else { "miss" }
        ));
    }
    let (fast, t) = within(start, Duration::from_secs(300));
    outcome(any && fast, format!("{}; {t}", lines.join("; ")))
}

fn interval_trend(data: &SynthData) -> Outcome {
    let train_set = synth::to_dataset(&data.train).unwrap();
    let test_set = synth::to_dataset(&data.test).unwrap();
    let n_max = train_set.n_max();
    let ws: Vec<usize> = [0.10, 0.05, 0.03]
        .iter()
        .map(|f| ((f * n_max as f64).round() as usize).max(1))
        .collect();
    let points = sweep_w(&train_set, &test_set, &TeaserConfig::default(), &ws).unwrap();
    let medians: Vec<f64> = points.iter().map(|p| p.report.median_earliness()).collect();
    let monotone = medians.windows(2).all(|m| m[1] <= m[0]);
    let full = fixed_time_accuracy(data, SlaveKind::Dtw, n_max);
    let largest = points[0].report.accuracy;
    let close = (full - largest).abs() <= 0.05;
    let desc: Vec<String> = points
        .iter()
        .map(|p| format!("w={} median earliness {:.3} acc {:.3}", p.w, p.report.median_earliness(), p.report.accuracy))
        .collect();
    outcome(
        monotone && close,
        format!("{}; full-length acc {full:.3}", desc.join(", ")),
    )
}

fn push_all(model: &TeaserModel, values: &[f64], sizes: &mut impl FnMut() -> usize) -> Decision {
    let mut state = StreamState::new();
    let mut i = 0;
    while i < values.len() {
        let end = (i + sizes()).min(values.len());
        if let Some(d) = state.push(model, &values[i..end]).unwrap() {
            return d;
        }
        i = end;
    }
    state.finish(model).unwrap()
}

fn replay_and_determinism() -> Outcome {
    let spec = SynthSpec {
        n_train: 30,
        n_test: 30,
        length_min: 60,
        length_max: 90,
        burst_length: 10,
        seed: 11,
        ..Default::default()
    };
    let data = synth::generate(&spec).unwrap();
    let train_set = synth::to_dataset(&data.train).unwrap();
    let test_set = synth::to_dataset(&data.test).unwrap();

    let mut r = rng(12);
    let mut differing = 0;
    let mut identical_models = true;
    let mut identical_reports = true;
    for kind in [SlaveKind::Dtw, SlaveKind::Bop] {
        let config = TeaserConfig { slave_kind: kind, seed: 5, ..Default::default() };
        let model = train(&train_set, &config).unwrap();
        for _ in 0..100 {
            let n = r.random_range(1..=110);
            let values: Vec<f64> = (0..n).map(|i| (i as f64 / 4.0).sin() + r.random_range(-1.0..1.0)).collect();
            let t = TimeSeries::new(values.clone()).unwrap();
            let offline = classify_series(&model, &t).unwrap();
            let single = push_all(&model, &values, &mut || 1);
            let chunked = push_all(&model, &values, &mut || r.random_range(1..=25));
            if offline != single || offline != chunked {
                differing += 1;
            }
        }

        let again = train(&train_set, &config).unwrap();
        identical_models &= model.to_json().unwrap() == again.to_json().unwrap();
        let (a, b) = (evaluate(&model, &test_set).unwrap(), evaluate(&again, &test_set).unwrap());
        let (mut ca, mut cb) = (Vec::new(), Vec::new());
        a.write_csv(&mut ca).unwrap();
        b.write_csv(&mut cb).unwrap();
        identical_reports &= ca == cb && a.summary_json().unwrap() == b.summary_json().unwrap();
    }
    outcome(
        differing == 0 && identical_models && identical_reports,
        format!(
            "200 series, {differing} differing decisions; identical models {identical_models}, identical reports {identical_reports}"
        ),
    )
}

fn streak_suite() -> Outcome {
    let w = 5;
    let q = scripted_query(40);
    let run = |script: &[(usize, bool)], v: usize| {
        let model = scripted_model(&q, w, script, v);
        let mut state = StreamState::new();
        for chunk in q[..script.len() * w].chunks(w) {
            if let Some(d) = state.push(&model, chunk).unwrap() {
                return Some(d);
            }
        }
        None
    };
    let cases = [
        (run(&[(0, true), (0, true)], 1), Decision { label: 0, s_used: w, forced: false }),
        (
            run(&[(0, true), (0, false), (0, true), (0, true)], 2),
            Decision { label: 0, s_used: 4 * w, forced: false },
        ),
        (
            run(&[(0, true), (1, true), (1, true), (0, true)], 2),
            Decision { label: 1, s_used: 3 * w, forced: false },
        ),
    ];
    let passed = cases.iter().filter(|(got, want)| *got == Some(*want)).count();
    outcome(passed == 3, format!("{passed}/3 examples"))
}

fn main() -> ExitCode {
    let data = synth_data();
    let criteria: Vec<Criterion> = vec![
        ("1 dtw exhaustive oracle", Box::new(dtw_oracle)),
        ("2 one-class svm qp oracle", Box::new(svm_oracle)),
        ("3 metric formulas", Box::new(metric_formulas)),
        ("4 v grid-search oracle", Box::new(v_oracle)),
        ("5 adaptive earliness", Box::new(|| adaptive_earliness(&data))),
        ("6 interval-length trend", Box::new(|| interval_trend(&data))),
        ("7 replay equivalence and determinism", Box::new(replay_and_determinism)),
        ("8 streak semantics", Box::new(streak_suite)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!("{} criterion {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
