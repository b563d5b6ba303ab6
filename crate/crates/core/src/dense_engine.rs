//! State-vector evolution of a detector coupled to one truncated Fock mode.
//!
//! The detector is either a qubit (σ⁻ replaces b) or a harmonic oscillator
//! truncated to `d` levels. The latter is a brute-force oracle for the
//! Gaussian engine. The interaction-picture Hamiltonian
//!
//! H(τ) = g(τ)[L a e^{−i(Ωτ+ωt)} + L a† e^{−i(Ωτ−ωt)}] + H.c.
//!
//! is applied as a ladder-structured product; it is never materialized.

use serde::{Deserialize, Serialize};

use crate::gaussian_engine::{DetectorObservables, ModeSet, StepConfig};
use crate::stepping::{integrate, Generator};
use crate::worldline::{AccelerationProfile, KinematicsMode, Worldline};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Probability allowed in the top three Fock levels.
pub const LEAKAGE_LIMIT: f64 = 1e-6;
/// Allowed drift of the state norm over a trajectory.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    TwoLevel,
    Harmonic { levels: usize },
}

impl DetectorKind {
    pub fn levels(self) -> usize {
        match self {
            DetectorKind::TwoLevel => 2,
            DetectorKind::Harmonic { levels } => levels,
        }
    }

    /// ⟨d−1|L|d⟩ for d = 0..levels (entry 0 unused).
    fn ladder(self) -> Vec<f64> {
        match self {
            DetectorKind::TwoLevel => vec![0.0, 1.0],
            DetectorKind::Harmonic { levels } => (0..levels).map(|d| (d as f64).sqrt()).collect(),
        }
    }
}

/// Amplitudes over detector ⊗ Fock(n_max + 1), index = level·(n_max + 1) + n.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub kind: DetectorKind,
    pub n_max: usize,
    pub amplitudes: Vec<C64>,
}

impl DenseState {
    fn fock_dim(&self) -> usize {
        self.n_max + 1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability in Fock levels n ≥ n_max − 2.
    pub fn leakage(&self) -> f64 {
        let f = self.fock_dim();
        let lo = self.n_max.saturating_sub(2);
        self.amplitudes
            .chunks_exact(f)
            .map(|row| row[lo..].iter().map(|a| a.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Marginal Fock distribution of the field mode.
    pub fn fock_probabilities(&self) -> Vec<f64> {
        let f = self.fock_dim();
        let mut p = vec![0.0; f];
        for row in self.amplitudes.chunks_exact(f) {
            for (pn, a) in p.iter_mut().zip(row) {
                *pn += a.norm_sqr();
            }
        }
        p
    }

    /// ⟨L†L⟩ and ⟨L⟩ for the detector lowering operator.
    fn detector_moments(&self) -> (f64, C64) {
        let f = self.fock_dim();
        let ladder = self.kind.ladder();
        let mut number = 0.0;
        let mut lowering = ZERO;
        for d in 1..self.kind.levels() {
            let (lower, upper) = (&self.amplitudes[(d - 1) * f..d * f], &self.amplitudes[d * f..(d + 1) * f]);
            let pop: f64 = upper.iter().map(|a| a.norm_sqr()).sum();
            number += ladder[d] * ladder[d] * pop;
            let overlap: C64 = lower.iter().zip(upper).map(|(l, u)| l.conj() * u).sum();
            lowering += overlap * ladder[d];
        }
        (number, lowering)
    }

    /// (⟨L†L⟩, √2 Re⟨L⟩, √2 Im⟨L⟩): (n, q, p) for a harmonic detector.
    pub fn detector_observables(&self) -> DetectorObservables {
        let (number, lowering) = self.detector_moments();
        DetectorObservables {
            n: number,
            q: std::f64::consts::SQRT_2 * lowering.re,
            p: std::f64::consts::SQRT_2 * lowering.im,
        }
    }
}

/// Qubit analogues of (n, q, p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitFeatures {
    /// ⟨σ⁺σ⁻⟩
    pub pz: f64,
    /// ⟨σ⁻ + σ⁺⟩/√2
    pub px: f64,
    /// ⟨i(σ⁺ − σ⁻)⟩/√2
    pub py: f64,
}

pub fn qubit_features(state: &DenseState) -> Result<QubitFeatures> {
    if state.kind != DetectorKind::TwoLevel {
        return Err(Error::Kind(format!("qubit features requested for {:?}", state.kind)));
    }
    let o = state.detector_observables();
    Ok(QubitFeatures { pz: o.n, px: o.q, py: o.p })
}

/// Smallest Fock cutoff accepted for amplitude α: |α|² + 8|α|.
pub fn coherent_cutoff(alpha: C64) -> f64 {
    alpha.norm_sqr() + 8.0 * alpha.norm()
}

/// Truncated coherent-state amplitudes e^{−|α|²/2} αⁿ/√n! for n ≤ n_max, and
/// the probability mass lost beyond the cutoff (before renormalization).
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> (Vec<C64>, f64) {
    let mut amps = Vec::with_capacity(n_max + 1);
    let mut a = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps.push(a);
    for n in 1..=n_max {
        a = a * alpha / (n as f64).sqrt();
        amps.push(a);
    }
    let kept: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    // direct tail sum of the Poisson weights beyond the cutoff
    let lambda = alpha.norm_sqr();
    let mut w = amps[n_max].norm_sqr();
    let mut tail = 0.0;
    for n in (n_max + 1)..(n_max + 1 + 4 * (lambda as usize + 50)) {
        w *= lambda / n as f64;
        tail += w;
        if w < 1e-300 {
            break;
        }
    }
    (amps, tail.max(1.0 - kept).max(0.0))
}

/// Detector ground state ⊗ truncated, renormalized coherent state |α⟩.
pub fn dense_initial(kind: DetectorKind, alpha: C64, n_max: usize) -> Result<DenseState> {
    if kind.levels() < 2 {
        return Err(Error::Config("detector needs at least two levels".into()));
    }
    let need = coherent_cutoff(alpha);
    if (n_max as f64) < need - 1e-9 {
        return Err(Error::Config(format!(
            "Fock cutoff {n_max} below |α|² + 8|α| = {need:.1}"
        )));
    }
    let (amps, _) = coherent_amplitudes(alpha, n_max);
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut amplitudes = vec![ZERO; kind.levels() * (n_max + 1)];
    for (slot, a) in amplitudes.iter_mut().zip(&amps) {
        *slot = a / norm;
    }
    Ok(DenseState { kind, n_max, amplitudes })
}

/// Snapshots from one dense trajectory with its validity diagnostics.
#[derive(Debug, Clone)]
pub struct DenseRun {
    pub snapshots: Vec<DenseState>,
    pub max_leakage: f64,
    pub max_norm_drift: f64,
}

impl DenseRun {
    pub fn is_valid(&self) -> bool {
        self.max_leakage < LEAKAGE_LIMIT && self.max_norm_drift < NORM_DRIFT_LIMIT
    }

    /// Snapshots, or the validity breach that invalidates them.
    pub fn into_valid(self) -> Result<Vec<DenseState>> {
        if self.max_leakage >= LEAKAGE_LIMIT {
            return Err(Error::Leakage { leakage: self.max_leakage, limit: LEAKAGE_LIMIT });
        }
        if self.max_norm_drift >= NORM_DRIFT_LIMIT {
            return Err(Error::Numerical(format!("norm drift {:.3e}", self.max_norm_drift)));
        }
        Ok(self.snapshots)
    }
}

struct LadderGenerator<'a> {
    worldline: &'a Worldline,
    detector_frequency: f64,
    omega: f64,
    amplitude: f64,
    levels: usize,
    fock: usize,
    ladder: Vec<f64>,
    sqrt_n: Vec<f64>,
}

impl Generator for LadderGenerator<'_> {
    fn eval(&mut self, segment: usize, tau: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.worldline.in_segment(segment, tau);
        let g = self.amplitude * (self.omega * p.x).sin();
        let det = C64::from_polar(g, -self.detector_frequency * tau);
        let ft = C64::from_polar(1.0, self.omega * p.t);
        let cm = det * ft.conj(); // L a
        let cp = det * ft; // L a†
        let (cmc, cpc) = (cm.conj(), cp.conj());
        let f = self.fock;
        let top = f - 1;
        for d in 0..self.levels {
            let out = &mut dy[d * f..(d + 1) * f];
            out.fill(ZERO);
            if d + 1 < self.levels {
                let l = self.ladder[d + 1];
                let src = &y[(d + 1) * f..(d + 2) * f];
                // c⁻ L a and c⁺ L a† from level d + 1
                for n in 0..f {
                    let mut acc = ZERO;
                    if n < top {
                        acc += cm * src[n + 1] * self.sqrt_n[n + 1];
                    }
                    if n > 0 {
                        acc += cp * src[n - 1] * self.sqrt_n[n];
                    }
                    out[n] += acc * l;
                }
            }
            if d > 0 {
                let l = self.ladder[d];
                let src = &y[(d - 1) * f..d * f];
                // conj(c⁻) L† a† and conj(c⁺) L† a from level d − 1
                for n in 0..f {
                    let mut acc = ZERO;
                    if n > 0 {
                        acc += cmc * src[n - 1] * self.sqrt_n[n];
                    }
                    if n < top {
                        acc += cpc * src[n + 1] * self.sqrt_n[n + 1];
                    }
                    out[n] += acc * l;
                }
            }
            for v in out.iter_mut() {
                *v = C64::new(v.im, -v.re);
            }
        }
    }
}

/// Evolve `state` along the world line of `profile`, returning snapshots at
/// `sample_times` with leakage and norm diagnostics. `modes` must hold a
/// single field mode.
pub fn dense_propagate(
    state: &DenseState,
    modes: &ModeSet,
    profile: &AccelerationProfile,
    kinematics: KinematicsMode,
    cfg: &StepConfig,
    sample_times: &[f64],
) -> Result<DenseRun> {
    modes.validate()?;
    if modes.n_field() != 1 {
        return Err(Error::Config(format!(
            "dense engine simulates one field mode, got {}",
            modes.n_field()
        )));
    }
    let levels = state.kind.levels();
    let fock = state.n_max + 1;
    if state.amplitudes.len() != levels * fock {
        return Err(Error::Dimension { expected: levels * fock, got: state.amplitudes.len() });
    }
    let n = modes.mode_numbers[0];
    let worldline = Worldline::new(profile, kinematics);
    let ladder = state.kind.ladder();
    let amplitude = modes.coupling_amplitude(n);
    let lmax = ladder.iter().cloned().fold(0.0, f64::max);
    let coupling_rate = 2.0 * amplitude.abs() * lmax * (fock as f64).sqrt();
    let rate = modes.phase_rate(&worldline) + coupling_rate;
    let grid = cfg.grid(profile, sample_times, rate)?;

    let mut gen = LadderGenerator {
        worldline: &worldline,
        detector_frequency: modes.detector_frequency,
        omega: modes.omega(n),
        amplitude,
        levels,
        fock,
        ladder,
        sqrt_n: (0..fock).map(|k| (k as f64).sqrt()).collect(),
    };
    let norm0 = state.norm_sqr();
    let mut y = state.amplitudes.clone();
    let mut snapshots = Vec::with_capacity(sample_times.len());
    let (mut max_leakage, mut max_norm_drift) = (state.leakage(), 0.0f64);
    integrate(&mut gen, &grid, &mut y, |_, y| {
        let snap = DenseState { kind: state.kind, n_max: state.n_max, amplitudes: y.to_vec() };
        max_leakage = max_leakage.max(snap.leakage());
        max_norm_drift = max_norm_drift.max((snap.norm_sqr() - norm0).abs());
        snapshots.push(snap);
        Ok(())
    })?;
    Ok(DenseRun { snapshots, max_leakage, max_norm_drift })
}
