//! UCR-style delimited text: one series per line, class label first.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, TeaserError};
use crate::series::{LabeledDataset, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Comma,
    Tab,
    Whitespace,
}

impl Delimiter {
    /// Comma if the line has one, else tab, else any whitespace.
    pub fn detect(line: &str) -> Delimiter {
        if line.contains(',') {
            Delimiter::Comma
        } else if line.contains('\t') {
            Delimiter::Tab
        } else {
            Delimiter::Whitespace
        }
    }

    fn split<'a>(&self, line: &'a str) -> Vec<&'a str> {
        let mut fields: Vec<&str> = match self {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Tab => line.split('\t').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        };
        while fields.last() == Some(&"") {
            fields.pop();
        }
        fields
    }
}

/// Numeric labels written as floats ("1.0000000e+00") are canonicalized to
/// their integer spelling so that they match across files.
fn canonical_label(raw: &str) -> String {
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 => format!("{}", v as i64),
        _ => raw.to_string(),
    }
}

pub fn parse_dataset(text: &str) -> Result<LabeledDataset> {
    let mut delimiter = None;
    let mut series = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert_with(|| Delimiter::detect(trimmed));
        let fields = delim.split(trimmed);
        if fields.len() < 2 {
            return Err(TeaserError::Parse {
                line: line_no,
                message: "expected a label followed by at least one value".into(),
            });
        }
        if fields[0].is_empty() {
            return Err(TeaserError::Parse {
                line: line_no,
                message: "empty class label".into(),
            });
        }
        let values = fields[1..]
            .iter()
            .enumerate()
            .map(|(col, f)| match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(TeaserError::Parse {
                    line: line_no,
                    message: format!("field {} is not a finite number: '{f}'", col + 2),
                }),
            })
            .collect::<Result<Vec<f64>>>()?;
        labels.push(canonical_label(fields[0]));
        series.push(TimeSeries::new(values).map_err(|e| TeaserError::Parse {
            line: line_no,
            message: e.to_string(),
        })?);
    }
    if series.is_empty() {
        return Err(TeaserError::Parse {
            line: 0,
            message: "no series found".into(),
        });
    }
    LabeledDataset::new(series, labels)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    parse_dataset(&fs::read_to_string(path)?)
}

/// Tab-separated, label first.
pub fn format_dataset<'a>(rows: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> String {
    let mut out = String::new();
    for (label, values) in rows {
        out.push_str(label);
        for v in values {
            write!(out, "\t{v}").unwrap();
        }
        out.push('\n');
    }
    out
}
