//! Synthetic datasets where each class is a short burst shape planted at a
//! random offset of a Gaussian noise baseline.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, TeaserError};
use crate::series::{LabeledDataset, TimeSeries};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub length_min: usize,
    pub length_max: usize,
    /// Burst start range as fractions of the series length.
    pub offset_min: f64,
    pub offset_max: f64,
    pub burst_length: usize,
    pub burst_amplitude: f64,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            n_classes: 2,
            n_train: 100,
            n_test: 100,
            length_min: 200,
            length_max: 200,
            offset_min: 0.05,
            offset_max: 0.5,
            burst_length: 20,
            burst_amplitude: 3.0,
            noise: 0.5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSeries {
    pub label: String,
    pub values: Vec<f64>,
    /// Index of the first burst point.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub train: Vec<SynthSeries>,
    pub test: Vec<SynthSeries>,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(TeaserError::InvalidArgument(m));
        if self.n_classes < 1 {
            return bad("need at least one class".into());
        }
        if self.length_min < 1 || self.length_min > self.length_max {
            return bad(format!("invalid length range {}..={}", self.length_min, self.length_max));
        }
        if !(0.0..=1.0).contains(&self.offset_min)
            || !(0.0..=1.0).contains(&self.offset_max)
            || self.offset_min > self.offset_max
        {
            return bad(format!("invalid offset range {}..={}", self.offset_min, self.offset_max));
        }
        if self.burst_length < 1 || self.burst_length > self.length_min {
            return bad(format!(
                "burst length {} does not fit the minimum series length {}",
                self.burst_length, self.length_min
            ));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return bad(format!("invalid noise level {}", self.noise));
        }
        Ok(())
    }
}

/// Burst value for class `class` at relative position `u` in `[0, 1)`.
fn burst_shape(class: usize, u: f64) -> f64 {
    match class {
        0 => (PI * u).sin(),
        1 => -(2.0 * PI * u).sin(),
        2 => 1.0,
        3 => (2.0 * PI * u).sin(),
        c => {
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * ((c - 2) as f64 * PI * u).sin()
        }
    }
}

fn draw(spec: &SynthSpec, index: usize, rng: &mut ChaCha8Rng) -> SynthSeries {
    let class = index % spec.n_classes;
    let len = rng.random_range(spec.length_min..=spec.length_max);
    let frac = if spec.offset_max > spec.offset_min {
        rng.random_range(spec.offset_min..=spec.offset_max)
    } else {
        spec.offset_min
    };
    let offset = ((frac * len as f64).round() as usize).min(len - spec.burst_length);
    let noise = Normal::new(0.0, spec.noise.max(f64::MIN_POSITIVE)).unwrap();
    let values = (0..len)
        .map(|t| {
            let mut v = 0.0;
            if spec.noise > 0.0 {
                v += noise.sample(rng);
            }
            if t >= offset && t < offset + spec.burst_length {
                let u = (t - offset) as f64 / spec.burst_length as f64;
                v += spec.burst_amplitude * burst_shape(class, u);
            }
            v
        })
        .collect();
    SynthSeries {
        label: (class + 1).to_string(),
        values,
        offset,
    }
}

pub fn generate(spec: &SynthSpec) -> Result<SynthData> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let train = (0..spec.n_train).map(|i| draw(spec, i, &mut rng)).collect();
    let test = (0..spec.n_test).map(|i| draw(spec, i, &mut rng)).collect();
    Ok(SynthData { train, test })
}

pub fn to_dataset(series: &[SynthSeries]) -> Result<LabeledDataset> {
    let ts = series
        .iter()
        .map(|s| TimeSeries::new(s.values.clone()))
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(ts, series.iter().map(|s| s.label.clone()).collect())
}

/// Ground truth CSV: `index,label,offset,length`.
pub fn format_offsets(series: &[SynthSeries]) -> String {
    let mut out = String::from("index,label,offset,length\n");
    for (i, s) in series.iter().enumerate() {
        out.push_str(&format!("{i},{},{},{}\n", s.label, s.offset, s.values.len()));
    }
    out
}
