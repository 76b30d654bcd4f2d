use std::fs;
use std::path::Path;

use teaser_core::data::{format_dataset, load_dataset};
use teaser_core::metrics::{evaluate as evaluate_model, sweep_w, write_sweep_csv};
use teaser_core::synth::{self, SynthSeries, SynthSpec};
use teaser_core::{EvalReport, TeaserConfig, TeaserError, TeaserModel};

use crate::Failure;

pub fn train(train_path: &Path, config: &TeaserConfig, out: &Path) -> Result<(), Failure> {
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let data = load_dataset(train_path).map_err(|e| Failure::data(train_path.display(), e))?;
    let model = teaser_core::train(&data, config).map_err(|e| Failure::Training(format!("training failed: {e}")))?;
    model.save(out).map_err(|e| Failure::data(out.display(), e))?;

    println!(
        "levels S={} (w={}, n_max={}), slave={}",
        model.n_levels(),
        model.w(),
        model.n_max,
        model.slave_kind
    );
    println!("level\ts\tn_train\tcv_accuracy\tcorrect\tmaster");
    for (i, level) in model.levels.iter().enumerate() {
        let cv = level.slave.cv_accuracy().map_or("-".to_string(), |a| format!("{a:.4}"));
        let master = match level.master.gamma() {
            Some(g) => format!("gamma={g}"),
            None => "accept-all".to_string(),
        };
        let reused = level.reused_from.map_or(String::new(), |r| format!(" (reuses level {})", r + 1));
        println!(
            "{}\t{}\t{}\t{cv}\t{}\t{master}{reused}",
            i + 1,
            level.s,
            level.n_train,
            level.n_correct
        );
    }
    println!("selected v={}", model.v);
    if let Some(score) = model.train_score() {
        println!(
            "train accuracy={:.4} earliness={:.4} hm={:.4}",
            score.accuracy, score.earliness, score.hm
        );
    }
    println!("model written to {}", out.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<TeaserModel, Failure> {
    TeaserModel::load(path).map_err(|e| Failure::data(path.display(), e))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::data(path.display(), TeaserError::Io(e)))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::data(dir.display(), TeaserError::Io(e)))
}

fn report_warnings(report: &EvalReport) {
    if report.n_unknown_labels > 0 {
        eprintln!(
            "warning: {} test series carry labels unknown to the model and count as misclassified",
            report.n_unknown_labels
        );
    }
    if report.n_truncated > 0 {
        eprintln!(
            "warning: {} test series are longer than the last snapshot; extra points were ignored",
            report.n_truncated
        );
    }
}

pub fn evaluate(model_path: &Path, test_path: &Path, out: &Path) -> Result<(), Failure> {
    let model = load_model(model_path)?;
    let test = load_dataset(test_path).map_err(|e| Failure::data(test_path.display(), e))?;
    let report = evaluate_model(&model, &test).map_err(|e| Failure::data("evaluation", e))?;
    report_warnings(&report);

    create_dir(out)?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| Failure::data("decisions", e))?;
    write_file(&out.join("decisions.csv"), &csv)?;
    let summary = report.summary_json().map_err(|e| Failure::data("summary", e))?;
    write_file(&out.join("summary.json"), summary.as_bytes())?;

    println!(
        "n={} accuracy={:.4} earliness={:.4} hm={:.4} forced={:.4}",
        report.n_test, report.accuracy, report.earliness, report.hm, report.forced_fraction
    );
    Ok(())
}

pub fn synth(spec: &SynthSpec, out: &Path) -> Result<(), Failure> {
    let data = synth::generate(spec).map_err(|e| Failure::Usage(e.to_string()))?;
    create_dir(out)?;
    let rows = |set: &[SynthSeries]| {
        format_dataset(set.iter().map(|s| (s.label.as_str(), s.values.as_slice())))
    };
    write_file(&out.join("train.tsv"), rows(&data.train).as_bytes())?;
    write_file(&out.join("test.tsv"), rows(&data.test).as_bytes())?;
    write_file(&out.join("train_offsets.csv"), synth::format_offsets(&data.train).as_bytes())?;
    write_file(&out.join("test_offsets.csv"), synth::format_offsets(&data.test).as_bytes())?;
    println!(
        "wrote {} train and {} test series to {}",
        data.train.len(),
        data.test.len(),
        out.display()
    );
    Ok(())
}

pub fn sweep(
    train_path: &Path,
    test_path: &Path,
    w_values: &[usize],
    config: &TeaserConfig,
    out: &Path,
) -> Result<(), Failure> {
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    if w_values.contains(&0) {
        return Err(Failure::Usage("interval lengths must be positive".into()));
    }
    let train_set = load_dataset(train_path).map_err(|e| Failure::data(train_path.display(), e))?;
    let test_set = load_dataset(test_path).map_err(|e| Failure::data(test_path.display(), e))?;
    let points = sweep_w(&train_set, &test_set, config, w_values)
        .map_err(|e| Failure::Training(format!("sweep failed: {e}")))?;

    let mut csv = Vec::new();
    write_sweep_csv(&points, &mut csv).map_err(|e| Failure::data(out.display(), e))?;
    write_file(out, &csv)?;
    println!("w\taccuracy\tearliness\tmedian_earliness\thm");
    for p in &points {
        let r = &p.report;
        println!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            p.w,
            r.accuracy,
            r.earliness,
            r.median_earliness(),
            r.hm
        );
    }
    if let Some(first) = points.first() {
        report_warnings(&first.report);
    }
    Ok(())
}
