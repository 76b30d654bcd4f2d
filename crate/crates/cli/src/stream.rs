//! Line protocol: `id,value` appends a point to series `id`, `id,END` closes
//! it. Every series still open at end of input is closed in order of first
//! appearance.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use teaser_core::{Decision, StreamState, TeaserError, TeaserModel};

use crate::Failure;

const END_MARKER: &str = "END";

#[derive(Debug, PartialEq)]
enum Record<'a> {
    Point(&'a str, f64),
    End(&'a str),
}

fn parse_line(line: &str) -> Result<Option<Record<'_>>, String> {
    let line = line.trim();
    if line.is_empty() {
        return Ok(None);
    }
    let (id, value) = line
        .split_once(',')
        .ok_or_else(|| "expected 'series_id,value'".to_string())?;
    let (id, value) = (id.trim(), value.trim());
    if id.is_empty() {
        return Err("empty series id".into());
    }
    if value.eq_ignore_ascii_case(END_MARKER) {
        return Ok(Some(Record::End(id)));
    }
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Some(Record::Point(id, v))),
        _ => Err(format!("'{value}' is not a finite number")),
    }
}

#[derive(Default)]
struct Series {
    state: StreamState,
    closed: bool,
    warned: bool,
}

struct Session<'m, W: Write> {
    model: &'m TeaserModel,
    out: W,
    series: HashMap<String, Series>,
    order: Vec<String>,
}

impl<W: Write> Session<'_, W> {
    fn emit(&mut self, id: &str, d: Decision) -> io::Result<()> {
        writeln!(self.out, "{id},{},{},{}", self.model.label_name(d.label), d.s_used, d.forced)?;
        self.out.flush()
    }

    fn entry(&mut self, id: &str) -> &mut Series {
        if !self.series.contains_key(id) {
            self.order.push(id.to_string());
        }
        self.series.entry(id.to_string()).or_default()
    }

    fn point(&mut self, id: &str, value: f64, line_no: usize) -> Result<(), Failure> {
        let model = self.model;
        let series = self.entry(id);
        if series.state.decision().is_some() || series.closed {
            if !series.warned {
                series.warned = true;
                eprintln!("warning: line {line_no}: series '{id}' already decided; further points ignored");
            }
            return Ok(());
        }
        let decision = series
            .state
            .push(model, &[value])
            .map_err(|e| Failure::data(format!("line {line_no}"), e))?;
        if let Some(d) = decision {
            self.emit(id, d).map_err(|e| Failure::data("output", TeaserError::Io(e)))?;
        }
        Ok(())
    }

    fn close(&mut self, id: &str, line_no: Option<usize>) -> Result<(), Failure> {
        let model = self.model;
        let Some(series) = self.series.get_mut(id) else {
            if let Some(n) = line_no {
                eprintln!("warning: line {n}: end marker for unknown series '{id}' ignored");
            }
            return Ok(());
        };
        if series.closed || series.state.decision().is_some() {
            series.closed = true;
            return Ok(());
        }
        series.closed = true;
        let d = series
            .state
            .finish(model)
            .map_err(|e| Failure::data(format!("series '{id}'"), e))?;
        self.emit(id, d).map_err(|e| Failure::data("output", TeaserError::Io(e)))
    }
}

pub fn run(model_path: &Path, input: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let model = TeaserModel::load(model_path).map_err(|e| Failure::data(model_path.display(), e))?;
    let reader: Box<dyn BufRead> = match input {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| Failure::data(p.display(), TeaserError::Io(e)))?,
        )),
        None => Box::new(io::stdin().lock()),
    };
    let writer: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).map_err(|e| Failure::data(p.display(), TeaserError::Io(e)))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut session = Session {
        model: &model,
        out: writer,
        series: HashMap::new(),
        order: Vec::new(),
    };

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Failure::data("input", TeaserError::Io(e)))?;
        match parse_line(&line) {
            Ok(None) => {}
            Ok(Some(Record::Point(id, v))) => session.point(id, v, line_no)?,
            Ok(Some(Record::End(id))) => session.close(id, Some(line_no))?,
            Err(m) => eprintln!("warning: line {line_no}: {m}; skipped"),
        }
    }
    for id in std::mem::take(&mut session.order) {
        session.close(&id, None)?;
    }
    Ok(())
}
