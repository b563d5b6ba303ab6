//! Input → acceleration map and the repeated four-piece acceleration schedule.

use serde::{Deserialize, Serialize};

use crate::worldline::{AccelerationProfile, Segment};
use crate::{Error, Result};

/// Slack allowed outside the configured input range before erroring.
pub const RANGE_TOLERANCE: f64 = 1e-9;

/// Closed interval an input coordinate is expected to lie in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputRange {
    pub min: f64,
    pub max: f64,
}

impl InputRange {
    pub fn new(min: f64, max: f64) -> Self {
        InputRange { min, max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingConfig {
    /// Base acceleration a₀.
    pub a0: f64,
    /// Acceleration span Δa.
    pub delta_a: f64,
    /// Duration T of one (a, −a) pair; each piece lasts T/2.
    pub period: f64,
    /// Number of repetitions m of the whole sequence.
    pub repetitions: usize,
    pub input_ranges: Vec<InputRange>,
}

impl EncodingConfig {
    /// Configuration with Δa = 0.1·a₀.
    pub fn with_default_span(a0: f64, period: f64, repetitions: usize, input_ranges: Vec<InputRange>) -> Self {
        EncodingConfig { a0, delta_a: 0.1 * a0, period, repetitions, input_ranges }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0) {
            return Err(Error::Config(format!("a0 must be positive, got {}", self.a0)));
        }
        if !(self.delta_a >= 0.0) {
            return Err(Error::Config(format!("delta_a must be non-negative, got {}", self.delta_a)));
        }
        if !(self.period > 0.0) {
            return Err(Error::Config(format!("period T must be positive, got {}", self.period)));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions m must be at least 1".into()));
        }
        if self.input_ranges.is_empty() {
            return Err(Error::Config("no input ranges configured".into()));
        }
        for (i, r) in self.input_ranges.iter().enumerate() {
            if !(r.min < r.max) || !r.min.is_finite() || !r.max.is_finite() {
                return Err(Error::Config(format!(
                    "input range {i} is degenerate: [{}, {}]",
                    r.min, r.max
                )));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.input_ranges.len()
    }

    /// Number of constant pieces: 4·N·m.
    pub fn segment_count(&self) -> usize {
        4 * self.input_dim() * self.repetitions
    }

    /// Total proper duration 2·N·T·m.
    pub fn total_duration(&self) -> f64 {
        2.0 * self.input_dim() as f64 * self.period * self.repetitions as f64
    }
}

/// aᵢ = a₀ + Δa·(xᵢ − minᵢ)/(maxᵢ − minᵢ).
pub fn map_input(x: &[f64], cfg: &EncodingConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if x.len() != cfg.input_dim() {
        return Err(Error::Dimension { expected: cfg.input_dim(), got: x.len() });
    }
    x.iter()
        .zip(&cfg.input_ranges)
        .enumerate()
        .map(|(i, (&xi, r))| {
            if !xi.is_finite() || xi < r.min - RANGE_TOLERANCE || xi > r.max + RANGE_TOLERANCE {
                return Err(Error::Encoding(format!(
                    "input coordinate {i} = {xi} outside [{}, {}]",
                    r.min, r.max
                )));
            }
            Ok(cfg.a0 + cfg.delta_a * (xi - r.min) / (r.max - r.min))
        })
        .collect()
}

/// m repetitions of (a₁, −a₁, −a₁, a₁, …, a_N, −a_N, −a_N, a_N), each piece T/2.
pub fn build_profile(accelerations: &[f64], cfg: &EncodingConfig) -> Result<AccelerationProfile> {
    cfg.validate()?;
    if let Some(a) = accelerations.iter().find(|a| !(**a > 0.0)) {
        return Err(Error::Encoding(format!("encoded acceleration {a} is not positive")));
    }
    let half = 0.5 * cfg.period;
    let mut segments = Vec::with_capacity(4 * accelerations.len() * cfg.repetitions);
    for _ in 0..cfg.repetitions {
        for &a in accelerations {
            segments.extend([
                Segment::new(a, half),
                Segment::new(-a, half),
                Segment::new(-a, half),
                Segment::new(a, half),
            ]);
        }
    }
    AccelerationProfile::new(segments)
}

/// Convenience: map an input and build its profile.
pub fn encode(x: &[f64], cfg: &EncodingConfig) -> Result<AccelerationProfile> {
    build_profile(&map_input(x, cfg)?, cfg)
}
