//! World lines of a detector driven by a piecewise-constant proper
//! acceleration in 1+1D Minkowski spacetime (metric diag(+1, -1), c = 1).
//!
//! Every segment has constant acceleration, so rapidity is piecewise linear
//! and position/coordinate time have closed forms per segment. A [`Worldline`]
//! caches the state at each segment boundary and evaluates inside a segment
//! without any quadrature.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Accelerations below this magnitude use the inertial (linear) branch.
pub const ZERO_ACCELERATION: f64 = 1e-12;

/// One constant-acceleration piece of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    /// Proper acceleration (natural units).
    pub acceleration: f64,
    /// Proper duration, strictly positive.
    pub duration: f64,
}

impl Segment {
    pub fn new(acceleration: f64, duration: f64) -> Self {
        Segment { acceleration, duration }
    }
}

/// Ordered list of constant-acceleration segments starting at τ = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Segment>", into = "Vec<Segment>")]
pub struct AccelerationProfile {
    segments: Vec<Segment>,
    /// Proper-time grid τ₀ = 0 < τ₁ < … < τ_K.
    boundaries: Vec<f64>,
}

impl AccelerationProfile {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Config("acceleration profile has no segments".into()));
        }
        let mut boundaries = Vec::with_capacity(segments.len() + 1);
        boundaries.push(0.0);
        let mut tau = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            if !(seg.duration > 0.0) || !seg.duration.is_finite() {
                return Err(Error::Config(format!(
                    "segment {i} has non-positive duration {}",
                    seg.duration
                )));
            }
            if !seg.acceleration.is_finite() {
                return Err(Error::Config(format!("segment {i} has non-finite acceleration")));
            }
            tau += seg.duration;
            boundaries.push(tau);
        }
        Ok(AccelerationProfile { segments, boundaries })
    }

    /// Single constant-acceleration segment (a Rindler observer).
    pub fn constant(acceleration: f64, duration: f64) -> Result<Self> {
        Self::new(vec![Segment::new(acceleration, duration)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn total_duration(&self) -> f64 {
        self.boundaries[self.boundaries.len() - 1]
    }

    pub fn max_abs_acceleration(&self) -> f64 {
        self.segments.iter().fold(0.0, |m, s| f64::max(m, s.acceleration.abs()))
    }

    /// Index of the segment containing `tau`. Boundary points belong to the
    /// segment that starts there, except the final endpoint.
    pub fn segment_index(&self, tau: f64) -> Result<usize> {
        let total = self.total_duration();
        if !(0.0..=total).contains(&tau) {
            return Err(Error::OutOfRange { tau, total });
        }
        let k = self.boundaries.partition_point(|&b| b <= tau);
        Ok(k.saturating_sub(1).min(self.segments.len() - 1))
    }
}

impl TryFrom<Vec<Segment>> for AccelerationProfile {
    type Error = Error;
    fn try_from(segments: Vec<Segment>) -> Result<Self> {
        AccelerationProfile::new(segments)
    }
}

impl From<AccelerationProfile> for Vec<Segment> {
    fn from(p: AccelerationProfile) -> Self {
        p.segments
    }
}

/// Relativistic world line or the Newtonian control with t(τ) = τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KinematicsMode {
    #[serde(alias = "rel")]
    Relativistic,
    #[serde(alias = "newt")]
    Newtonian,
}

impl KinematicsMode {
    pub const ALL: [KinematicsMode; 2] = [KinematicsMode::Relativistic, KinematicsMode::Newtonian];

    pub fn short_name(self) -> &'static str {
        match self {
            KinematicsMode::Relativistic => "rel",
            KinematicsMode::Newtonian => "newt",
        }
    }
}

impl std::fmt::Display for KinematicsMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for KinematicsMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rel" | "relativistic" => Ok(KinematicsMode::Relativistic),
            "newt" | "newtonian" => Ok(KinematicsMode::Newtonian),
            other => Err(Error::Config(format!("unknown kinematics `{other}`"))),
        }
    }
}

/// Event on the world line at proper time `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldlinePoint {
    pub tau: f64,
    pub t: f64,
    pub x: f64,
    /// Rapidity; the velocity is tanh ξ.
    pub xi: f64,
}

/// A profile together with the cached world-line state at each segment start.
#[derive(Debug, Clone)]
pub struct Worldline {
    profile: AccelerationProfile,
    mode: KinematicsMode,
    knots: Vec<WorldlinePoint>,
}

impl Worldline {
    /// World line starting at rest at the origin.
    pub fn new(profile: &AccelerationProfile, mode: KinematicsMode) -> Self {
        let start = WorldlinePoint { tau: 0.0, t: 0.0, x: 0.0, xi: 0.0 };
        Self::build(profile, mode, start)
    }

    /// Relativistic world line with general initial data (t₀, x₀, u^x(0)).
    /// Only the drive-synthesis code needs this.
    pub fn with_initial(profile: &AccelerationProfile, t0: f64, x0: f64, ux0: f64) -> Self {
        let start = WorldlinePoint { tau: 0.0, t: t0, x: x0, xi: ux0.asinh() };
        Self::build(profile, KinematicsMode::Relativistic, start)
    }

    fn build(profile: &AccelerationProfile, mode: KinematicsMode, start: WorldlinePoint) -> Self {
        let mut knots = Vec::with_capacity(profile.segments.len() + 1);
        knots.push(start);
        let mut cur = start;
        for (i, seg) in profile.segments.iter().enumerate() {
            let mut next = advance(&cur, seg.acceleration, seg.duration, mode);
            next.tau = profile.boundaries[i + 1];
            knots.push(next);
            cur = next;
        }
        Worldline { profile: profile.clone(), mode, knots }
    }

    pub fn profile(&self) -> &AccelerationProfile {
        &self.profile
    }

    pub fn mode(&self) -> KinematicsMode {
        self.mode
    }

    /// State at the start of each segment, followed by the final state.
    pub fn knots(&self) -> &[WorldlinePoint] {
        &self.knots
    }

    pub fn at(&self, tau: f64) -> Result<WorldlinePoint> {
        let i = self.profile.segment_index(tau)?;
        Ok(self.in_segment(i, tau))
    }

    /// Closed-form evaluation inside segment `i`; `tau` is not range checked.
    #[inline]
    pub fn in_segment(&self, i: usize, tau: f64) -> WorldlinePoint {
        let start = &self.knots[i];
        let mut p = advance(start, self.profile.segments[i].acceleration, tau - start.tau, self.mode);
        p.tau = tau;
        p
    }

    /// Largest |ξ| reached; rapidity is piecewise linear so it peaks at a knot.
    pub fn max_abs_rapidity(&self) -> f64 {
        self.knots.iter().fold(0.0, |m, k| f64::max(m, k.xi.abs()))
    }

    /// Range of x over the whole world line, sampled at knots and at interior
    /// turning points (ξ = 0 inside a segment).
    pub fn position_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, k) in self.knots.iter().enumerate() {
            lo = lo.min(k.x);
            hi = hi.max(k.x);
            if let Some(seg) = self.profile.segments.get(i) {
                if seg.acceleration.abs() >= ZERO_ACCELERATION {
                    let s = -k.xi / seg.acceleration;
                    if s > 0.0 && s < seg.duration {
                        let p = self.in_segment(i, k.tau + s);
                        lo = lo.min(p.x);
                        hi = hi.max(p.x);
                    }
                }
            }
        }
        (lo, hi)
    }
}

/// Advance `start` by proper time `s` at constant acceleration `a`.
#[inline]
fn advance(start: &WorldlinePoint, a: f64, s: f64, mode: KinematicsMode) -> WorldlinePoint {
    let xi0 = start.xi;
    let xi = xi0 + a * s;
    let (t, x) = match mode {
        KinematicsMode::Relativistic => {
            if a.abs() < ZERO_ACCELERATION {
                (start.t + s * xi0.cosh(), start.x + s * xi0.sinh())
            } else {
                (
                    start.t + (xi.sinh() - xi0.sinh()) / a,
                    start.x + (xi.cosh() - xi0.cosh()) / a,
                )
            }
        }
        KinematicsMode::Newtonian => (start.t + s, start.x + xi0 * s + 0.5 * a * s * s),
    };
    WorldlinePoint { tau: start.tau + s, t, x, xi }
}

/// Rapidity ξ(τ) = ∫₀^τ a(τ′) dτ′.
pub fn rapidity(profile: &AccelerationProfile, tau: f64) -> Result<f64> {
    let i = profile.segment_index(tau)?;
    let completed: f64 = profile.segments[..i].iter().map(|s| s.acceleration * s.duration).sum();
    Ok(completed + profile.segments[i].acceleration * (tau - profile.boundaries[i]))
}

/// One-off evaluation of the world line from rest; build a [`Worldline`]
/// when evaluating many points.
pub fn evaluate(profile: &AccelerationProfile, tau: f64, mode: KinematicsMode) -> Result<WorldlinePoint> {
    Worldline::new(profile, mode).at(tau)
}
