//! Segment-aligned fixed-step RK4 for linear complex ODEs.
//!
//! The step grid never straddles an acceleration discontinuity or a
//! requested sample time: both are inserted as breakpoints.

use crate::worldline::AccelerationProfile;
use crate::{Error, Result, C64};

/// Breakpoints closer than this (relative to the total duration) are merged.
const MERGE_TOLERANCE: f64 = 1e-9;

/// Right-hand side of dy/dτ = G(τ) y for τ inside a given segment.
pub(crate) trait Generator {
    fn eval(&mut self, segment: usize, tau: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Interval {
    pub segment: usize,
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct StepGrid {
    pub intervals: Vec<Interval>,
    /// Sample times snapped onto breakpoints.
    pub samples: Vec<f64>,
}

impl StepGrid {
    /// `rate` is the fastest angular frequency present in the generator;
    /// each segment gets `max(min_steps, ceil(steps_per_period·rate·d/2π))` steps.
    pub fn new(
        profile: &AccelerationProfile,
        sample_times: &[f64],
        rate: f64,
        steps_per_period: usize,
        min_steps: usize,
    ) -> Result<Self> {
        let total = profile.total_duration();
        let tol = MERGE_TOLERANCE * total.max(1.0);
        let mut samples = Vec::with_capacity(sample_times.len());
        let mut prev = f64::NEG_INFINITY;
        for &s in sample_times {
            if !s.is_finite() || s < -tol || s > total + tol {
                return Err(Error::OutOfRange { tau: s, total });
            }
            if s < prev {
                return Err(Error::Config("sample times must be sorted".into()));
            }
            prev = s;
            samples.push(s.clamp(0.0, total));
        }

        let mut breaks: Vec<f64> = profile.boundaries().to_vec();
        for &s in &samples {
            let k = breaks.partition_point(|&b| b < s);
            let near = |j: usize| breaks.get(j).is_some_and(|&b| (b - s).abs() <= tol);
            if !(near(k) || (k > 0 && near(k - 1))) {
                breaks.insert(k, s);
            }
        }
        // snap samples to the breakpoint they were merged with
        for s in samples.iter_mut() {
            let k = breaks.partition_point(|&b| b < *s - tol);
            if let Some(&b) = breaks.get(k) {
                if (b - *s).abs() <= tol {
                    *s = b;
                }
            }
        }

        let per_segment: Vec<usize> = profile
            .segments()
            .iter()
            .map(|seg| {
                let want = (steps_per_period as f64 * rate * seg.duration / std::f64::consts::TAU).ceil();
                (want as usize).max(min_steps)
            })
            .collect();

        let mut intervals = Vec::with_capacity(breaks.len());
        for w in breaks.windows(2) {
            let (start, end) = (w[0], w[1]);
            let segment = profile.segment_index(0.5 * (start + end))?;
            let seg = profile.segments()[segment];
            let h = seg.duration / per_segment[segment] as f64;
            let steps = (((end - start) / h) - 1e-9).ceil().max(1.0) as usize;
            intervals.push(Interval { segment, start, end, steps });
        }
        Ok(StepGrid { intervals, samples })
    }
}

/// Integrate `y` across the grid, calling `emit(sample_index, y)` at every
/// sample time.
pub(crate) fn integrate<G, E>(gen: &mut G, grid: &StepGrid, y: &mut [C64], mut emit: E) -> Result<()>
where
    G: Generator,
    E: FnMut(usize, &[C64]) -> Result<()>,
{
    let n = y.len();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();

    let mut next = 0;
    while next < grid.samples.len() && grid.samples[next] <= 0.0 {
        emit(next, y)?;
        next += 1;
    }
    for iv in &grid.intervals {
        let h = (iv.end - iv.start) / iv.steps as f64;
        let half = 0.5 * h;
        for j in 0..iv.steps {
            let t0 = iv.start + j as f64 * h;
            let tm = t0 + half;
            let t1 = if j + 1 == iv.steps { iv.end } else { t0 + h };
            gen.eval(iv.segment, t0, y, &mut k1);
            for i in 0..n {
                tmp[i] = y[i] + k1[i] * half;
            }
            gen.eval(iv.segment, tm, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + k2[i] * half;
            }
            gen.eval(iv.segment, tm, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + k3[i] * h;
            }
            gen.eval(iv.segment, t1, &tmp, &mut k4);
            let w = h / 6.0;
            for i in 0..n {
                y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
            }
        }
        while next < grid.samples.len() && grid.samples[next] <= iv.end {
            emit(next, y)?;
            next += 1;
        }
    }
    debug_assert_eq!(next, grid.samples.len());
    Ok(())
}
