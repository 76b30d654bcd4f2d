use crate::error::{Result, TeaserError};
use crate::series::TimeSeries;
use crate::teaser::{Decision, Step, Streak, TeaserModel};

/// Incremental prediction state for one series.
#[derive(Debug, Clone, Default)]
pub struct StreamState {
    buffer: Vec<f64>,
    received: usize,
    next_level: usize,
    streak: Streak,
    last_label: Option<usize>,
    decided: Option<Decision>,
    exclude: Option<usize>,
    v_override: Option<usize>,
    steps: Option<Vec<Step>>,
}

impl StreamState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Replays a training series with its own exemplar left out and never
    /// decides; the evaluated steps are recorded.
    pub(crate) fn tracing(exclude: Option<usize>) -> Self {
        StreamState {
            exclude,
            v_override: Some(usize::MAX),
            steps: Some(Vec::new()),
            ..Self::default()
        }
    }

    pub(crate) fn into_steps(self) -> Vec<Step> {
        self.steps.unwrap_or_default()
    }

    /// Data points received so far, including ones beyond the last level.
    pub fn received(&self) -> usize {
        self.received
    }

    pub fn run_label(&self) -> Option<usize> {
        self.streak.label
    }

    pub fn run_length(&self) -> usize {
        self.streak.length
    }

    pub fn next_level(&self) -> usize {
        self.next_level
    }

    pub fn decision(&self) -> Option<&Decision> {
        self.decided.as_ref()
    }

    /// Appends points and evaluates every snapshot level they complete.
    /// Points past a decision inside the same chunk are dropped.
    pub fn push(&mut self, model: &TeaserModel, points: &[f64]) -> Result<Option<Decision>> {
        if self.decided.is_some() {
            return Err(TeaserError::InvalidState("series already decided".into()));
        }
        if let Some(pos) = points.iter().position(|p| !p.is_finite()) {
            return Err(TeaserError::InvalidArgument(format!(
                "non-finite value at offset {pos} of pushed chunk"
            )));
        }
        let cap = model.schedule.max_len();
        let lengths = &model.schedule.lengths;
        for &p in points {
            self.received += 1;
            if self.buffer.len() < cap {
                self.buffer.push(p);
            }
            while self.next_level < lengths.len() && self.buffer.len() >= lengths[self.next_level] {
                let level = self.next_level;
                self.next_level += 1;
                let s = lengths[level];
                if let Some(d) = self.observe(model, level, s)? {
                    return Ok(Some(d));
                }
            }
        }
        Ok(None)
    }

    /// Declares the end of the series. A prefix that stopped between two
    /// levels is evaluated with the pair of the next level; without `v`
    /// consecutive acceptances the last slave label is emitted as forced.
    pub fn finish(&mut self, model: &TeaserModel) -> Result<Decision> {
        if self.decided.is_some() {
            return Err(TeaserError::InvalidState("series already decided".into()));
        }
        let len = self.buffer.len();
        if len == 0 {
            return Err(TeaserError::InvalidState("stream ended without data".into()));
        }
        let lengths = &model.schedule.lengths;
        let evaluated = self.next_level.checked_sub(1).map_or(0, |i| lengths[i]);
        if self.next_level < lengths.len() && len > evaluated {
            let level = self.next_level;
            self.next_level = lengths.len();
            if let Some(d) = self.observe(model, level, len)? {
                return Ok(d);
            }
        }
        let decision = Decision {
            label: self.last_label.unwrap_or(model.fallback_class),
            s_used: len,
            forced: true,
        };
        self.decided = Some(decision);
        Ok(decision)
    }

    fn observe(&mut self, model: &TeaserModel, level: usize, s: usize) -> Result<Option<Decision>> {
        let Some(step) = model.evaluate_level(level, &self.buffer[..s], self.exclude)? else {
            return Ok(None);
        };
        self.last_label = Some(step.output.label);
        self.streak.observe(step.output.label, step.accepted);
        if let Some(steps) = self.steps.as_mut() {
            steps.push(step);
        }
        let v = self.v_override.unwrap_or(model.v);
        if self.streak.reached(v) {
            let decision = Decision {
                label: self.streak.label.unwrap(),
                s_used: s,
                forced: false,
            };
            self.decided = Some(decision);
            return Ok(Some(decision));
        }
        Ok(None)
    }
}

/// Feeds `t` through a fresh stream in `w`-sized chunks and ends it.
pub fn classify_series(model: &TeaserModel, t: &TimeSeries) -> Result<Decision> {
    let mut state = StreamState::new();
    for chunk in t.values().chunks(model.w()) {
        if let Some(d) = state.push(model, chunk)? {
            return Ok(d);
        }
    }
    state.finish(model)
}
