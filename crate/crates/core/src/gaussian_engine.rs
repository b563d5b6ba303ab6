//! Exact Gaussian evolution of a harmonic detector coupled to N cavity modes.
//!
//! Operators are ordered Ψ = (b, a₁…a_N, b†, a₁†…a_N†). The interaction
//! Hamiltonian is H = Ψᵀ F(τ) Ψ, so the Heisenberg propagator obeys
//! dS/dτ = −i Ω F_sym(τ) S with S(0) = 1 and F_sym = F + Fᵀ, where Ω is the
//! symplectic form [[0, 1], [−1, 0]]. Covariances evolve as σ → S σ Sᵀ and
//! means as ⟨Ψ⟩ → S ⟨Ψ⟩.
//!
//! F_sym only couples the detector to field modes, so the propagation loop
//! applies it as a structured product (O(N) per column) instead of a dense
//! matrix multiply.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::stepping::{integrate, Generator, StepGrid};
use crate::worldline::{AccelerationProfile, KinematicsMode, Worldline, WorldlinePoint};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Detector, cavity geometry, coupling and the initial coherent amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSet {
    /// Cavity mode numbers n (ω_n = k_n = nπ/L), strictly increasing.
    pub mode_numbers: Vec<usize>,
    pub cavity_length: f64,
    /// Detector proper frequency Ω.
    pub detector_frequency: f64,
    /// Coupling constant λ.
    pub coupling: f64,
    /// Mode number prepared in the coherent state.
    pub coherent_mode: usize,
    pub alpha: C64,
}

impl ModeSet {
    /// Modes 1..=N with Ω = 1 resonant with mode 3 (L = 3π), λ = 0.1, α = 10i.
    pub fn paper_default(n_modes: usize) -> Self {
        ModeSet {
            mode_numbers: (1..=n_modes).collect(),
            cavity_length: 3.0 * PI,
            detector_frequency: 1.0,
            coupling: 0.1,
            coherent_mode: 3,
            alpha: C64::new(0.0, 10.0),
        }
    }

    /// Only mode `n`, which is also the coherent mode; geometry as in
    /// [`ModeSet::paper_default`].
    pub fn single_mode(n: usize) -> Self {
        ModeSet { mode_numbers: vec![n], coherent_mode: n, ..Self::paper_default(n) }
    }

    /// Cavity length that puts mode `n` in resonance with the detector.
    pub fn resonant_length(detector_frequency: f64, n: usize) -> f64 {
        n as f64 * PI / detector_frequency
    }

    pub fn with_alpha(mut self, alpha: C64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_coupling(mut self, coupling: f64) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode_numbers.is_empty() {
            return Err(Error::Config("mode set has no field modes".into()));
        }
        if self.mode_numbers[0] == 0 || self.mode_numbers.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("mode numbers must be positive and strictly increasing".into()));
        }
        if !(self.cavity_length > 0.0) || !(self.detector_frequency > 0.0) {
            return Err(Error::Config("cavity length and detector frequency must be positive".into()));
        }
        if !self.coupling.is_finite() || !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return Err(Error::Config("coupling and alpha must be finite".into()));
        }
        if self.alpha != ZERO && self.slot(self.coherent_mode).is_none() {
            return Err(Error::Config(format!(
                "coherent mode {} is not among the simulated modes",
                self.coherent_mode
            )));
        }
        Ok(())
    }

    pub fn n_field(&self) -> usize {
        self.mode_numbers.len()
    }

    /// Length of Ψ: 2(N + 1).
    pub fn dim(&self) -> usize {
        2 * (self.n_field() + 1)
    }

    /// ω_n = k_n = nπ/L.
    pub fn omega(&self, n: usize) -> f64 {
        n as f64 * PI / self.cavity_length
    }

    /// λ/√(L ω_n), the coupling prefactor of mode n.
    pub fn coupling_amplitude(&self, n: usize) -> f64 {
        self.coupling / (self.cavity_length * self.omega(n)).sqrt()
    }

    /// Position of mode `n` in the annihilation block (detector is slot 0).
    pub fn slot(&self, n: usize) -> Option<usize> {
        self.mode_numbers.iter().position(|&m| m == n).map(|i| i + 1)
    }

    /// Fastest phase rate max_n(Ω + ω_n·max(dt/dτ, |dx/dτ|)) along a world line.
    pub fn phase_rate(&self, worldline: &Worldline) -> f64 {
        let xi = worldline.max_abs_rapidity();
        let speed = match worldline.mode() {
            KinematicsMode::Relativistic => xi.cosh(),
            KinematicsMode::Newtonian => xi.max(1.0),
        };
        let top = *self.mode_numbers.last().expect("validated mode set");
        self.detector_frequency + self.omega(top) * speed
    }
}

/// Fixed-step RK4 resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    /// Steps per shortest Hamiltonian period, applied per segment.
    pub steps_per_period: usize,
}

impl StepConfig {
    pub const MIN_STEPS: usize = 16;

    pub fn new(steps_per_period: usize) -> Self {
        StepConfig { steps_per_period }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < Self::MIN_STEPS {
            return Err(Error::Config(format!(
                "steps_per_period = {} yields fewer than {} steps per segment",
                self.steps_per_period,
                Self::MIN_STEPS
            )));
        }
        Ok(())
    }

    pub(crate) fn grid(&self, profile: &AccelerationProfile, sample_times: &[f64], rate: f64) -> Result<StepGrid> {
        self.validate()?;
        StepGrid::new(profile, sample_times, rate, self.steps_per_period, Self::MIN_STEPS)
    }
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig { steps_per_period: 200 }
    }
}

/// First and second moments over Ψ.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<C64>,
    /// σ_ij = ⟨Ψ_iΨ_j⟩ − ⟨Ψ_i⟩⟨Ψ_j⟩.
    pub cov: DMatrix<C64>,
}

impl GaussianState {
    pub fn n_field(&self) -> usize {
        self.mean.len() / 2 - 1
    }
}

/// Heisenberg propagator Ψ(τ) = S(τ) Ψ(0).
#[derive(Debug, Clone, PartialEq)]
pub struct Propagator {
    pub matrix: DMatrix<C64>,
}

impl Propagator {
    pub fn identity(dim: usize) -> Self {
        Propagator { matrix: DMatrix::identity(dim, dim) }
    }

    /// max |S Ω Sᵀ − Ω|.
    pub fn symplectic_error(&self) -> f64 {
        let omega = symplectic_form(self.matrix.nrows() / 2 - 1);
        let s = &self.matrix;
        (s * &omega * s.transpose() - omega).iter().fold(0.0, |m, z| f64::max(m, z.norm()))
    }

    /// max |S − X conj(S) X| where X swaps annihilation and creation blocks.
    pub fn conjugation_error(&self) -> f64 {
        let s = &self.matrix;
        let d = s.nrows();
        let h = d / 2;
        let swap = |i: usize| if i < h { i + h } else { i - h };
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                err = err.max((s[(i, j)] - s[(swap(i), swap(j))].conj()).norm());
            }
        }
        err
    }
}

/// Ω = [[0, 1], [−1, 0]] for `n_field` modes plus the detector.
pub fn symplectic_form(n_field: usize) -> DMatrix<C64> {
    let h = n_field + 1;
    let mut m = DMatrix::from_element(2 * h, 2 * h, ZERO);
    for i in 0..h {
        m[(i, i + h)] = ONE;
        m[(i + h, i)] = -ONE;
    }
    m
}

/// Detector in its ground state, mode `coherent_mode` in |α⟩, others vacuum.
pub fn initial_state(modes: &ModeSet) -> Result<GaussianState> {
    modes.validate()?;
    let h = modes.n_field() + 1;
    let mut mean = DVector::from_element(2 * h, ZERO);
    if let Some(c) = modes.slot(modes.coherent_mode) {
        mean[c] = modes.alpha;
        mean[c + h] = modes.alpha.conj();
    }
    let mut cov = DMatrix::from_element(2 * h, 2 * h, ZERO);
    for k in 0..h {
        cov[(k, k + h)] = ONE;
    }
    Ok(GaussianState { mean, cov })
}

/// Per-mode coefficients of H = Σ_n c⁻_n b a_n + c⁺_n b a_n† + H.c.
struct Couplings {
    minus: Vec<C64>,
    plus: Vec<C64>,
}

fn couplings_at(modes: &ModeSet, p: &WorldlinePoint, out: &mut Couplings) {
    let det = C64::from_polar(1.0, -modes.detector_frequency * p.tau);
    let base = PI / modes.cavity_length;
    let et = C64::from_polar(1.0, base * p.t);
    let ex = C64::from_polar(1.0, base * p.x);
    let mut pt = ONE;
    let mut px = ONE;
    let mut j = 0;
    let top = *modes.mode_numbers.last().unwrap();
    for n in 1..=top {
        pt *= et;
        px *= ex;
        if modes.mode_numbers[j] == n {
            let g = modes.coupling_amplitude(n) * px.im;
            // e^{-i[Ωτ ± ω_n t]}
            out.minus[j] = det * pt.conj() * g;
            out.plus[j] = det * pt * g;
            j += 1;
        }
    }
}

/// F_sym(τ) = F + Fᵀ at the world-line event `wp`.
pub fn hamiltonian_fsym(modes: &ModeSet, wp: &WorldlinePoint) -> DMatrix<C64> {
    let n = modes.n_field();
    let h = n + 1;
    let mut c = Couplings { minus: vec![ZERO; n], plus: vec![ZERO; n] };
    couplings_at(modes, wp, &mut c);
    let mut f = DMatrix::from_element(2 * h, 2 * h, ZERO);
    // each coefficient is split c/2 into F_ij and F_ji, so F_sym carries c
    let mut put = |i: usize, j: usize, v: C64| {
        f[(i, j)] += v;
        f[(j, i)] += v;
    };
    for k in 0..n {
        let s = k + 1;
        put(0, s, c.minus[k]); // b a_n
        put(0, s + h, c.plus[k]); // b a_n†
        put(h, s + h, c.minus[k].conj()); // b† a_n†
        put(h, s, c.plus[k].conj()); // b† a_n
    }
    f
}

#[inline]
fn times_neg_i(z: C64) -> C64 {
    C64::new(z.im, -z.re)
}

#[inline]
fn times_i(z: C64) -> C64 {
    C64::new(-z.im, z.re)
}

/// Structured −iΩF_sym applied to a block of columns.
struct HeisenbergGenerator<'a> {
    modes: &'a ModeSet,
    worldline: &'a Worldline,
    couplings: Couplings,
    minus_conj: Vec<C64>,
    plus_conj: Vec<C64>,
}

impl<'a> HeisenbergGenerator<'a> {
    fn new(modes: &'a ModeSet, worldline: &'a Worldline) -> Self {
        let n = modes.n_field();
        HeisenbergGenerator {
            modes,
            worldline,
            couplings: Couplings { minus: vec![ZERO; n], plus: vec![ZERO; n] },
            minus_conj: vec![ZERO; n],
            plus_conj: vec![ZERO; n],
        }
    }
}

impl Generator for HeisenbergGenerator<'_> {
    fn eval(&mut self, segment: usize, tau: f64, y: &[C64], dy: &mut [C64]) {
        let p = self.worldline.in_segment(segment, tau);
        couplings_at(self.modes, &p, &mut self.couplings);
        let n = self.modes.n_field();
        let h = n + 1;
        let (cm, cp) = (&self.couplings.minus, &self.couplings.plus);
        for k in 0..n {
            self.minus_conj[k] = cm[k].conj();
            self.plus_conj[k] = cp[k].conj();
        }
        let (cmc, cpc) = (&self.minus_conj, &self.plus_conj);
        for (col, dcol) in y.chunks_exact(2 * h).zip(dy.chunks_exact_mut(2 * h)) {
            let (v, w) = col.split_at(h);
            let (v0, w0) = (v[0], w[0]);
            let mut sv = ZERO;
            let mut sw = ZERO;
            for k in 0..n {
                let (vn, wn) = (v[k + 1], w[k + 1]);
                sv += cpc[k] * vn + cmc[k] * wn;
                sw += cp[k] * wn + cm[k] * vn;
                dcol[k + 1] = times_neg_i(cp[k] * v0 + cmc[k] * w0);
                dcol[h + k + 1] = times_i(cpc[k] * w0 + cm[k] * v0);
            }
            dcol[0] = times_neg_i(sv);
            dcol[h] = times_i(sw);
        }
    }
}

fn prepare(
    modes: &ModeSet,
    profile: &AccelerationProfile,
    kinematics: KinematicsMode,
    cfg: &StepConfig,
    sample_times: &[f64],
) -> Result<(Worldline, StepGrid)> {
    modes.validate()?;
    let worldline = Worldline::new(profile, kinematics);
    let grid = cfg.grid(profile, sample_times, modes.phase_rate(&worldline))?;
    Ok((worldline, grid))
}

/// Full propagators S(τ_s) at each sample time, from one integration pass.
pub fn propagate(
    modes: &ModeSet,
    profile: &AccelerationProfile,
    kinematics: KinematicsMode,
    cfg: &StepConfig,
    sample_times: &[f64],
) -> Result<Vec<Propagator>> {
    let (worldline, grid) = prepare(modes, profile, kinematics, cfg, sample_times)?;
    let d = modes.dim();
    // column-major identity
    let mut y = vec![ZERO; d * d];
    for i in 0..d {
        y[i * d + i] = ONE;
    }
    let mut out = Vec::with_capacity(sample_times.len());
    let mut gen = HeisenbergGenerator::new(modes, &worldline);
    integrate(&mut gen, &grid, &mut y, |_, y| {
        out.push(Propagator { matrix: DMatrix::from_column_slice(d, d, y) });
        Ok(())
    })?;
    Ok(out)
}

/// σ ← S σ Sᵀ, ⟨Ψ⟩ ← S ⟨Ψ⟩.
pub fn evolve(state0: &GaussianState, s: &Propagator) -> Result<GaussianState> {
    let d = s.matrix.nrows();
    for got in [state0.mean.len(), state0.cov.nrows(), state0.cov.ncols(), s.matrix.ncols()] {
        if got != d {
            return Err(Error::Dimension { expected: d, got });
        }
    }
    Ok(GaussianState {
        mean: &s.matrix * &state0.mean,
        cov: &s.matrix * &state0.cov * s.matrix.transpose(),
    })
}

/// Detector expectation values: n̂ = b†b, q̂ = (b + b†)/√2, p̂ = i(b† − b)/√2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorObservables {
    pub n: f64,
    pub q: f64,
    pub p: f64,
}

impl DetectorObservables {
    pub fn from_moments(beta: C64, excess_number: f64) -> Self {
        DetectorObservables {
            n: excess_number + beta.norm_sqr(),
            q: std::f64::consts::SQRT_2 * beta.re,
            p: std::f64::consts::SQRT_2 * beta.im,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.n - other.n).abs().max((self.q - other.q).abs()).max((self.p - other.p).abs())
    }
}

pub fn detector_observables(state: &GaussianState) -> DetectorObservables {
    let h = state.n_field() + 1;
    DetectorObservables::from_moments(state.mean[0], state.cov[(h, 0)].re)
}

/// Detector observables at each sample time without forming the full
/// propagator.
///
/// For the vacuum-plus-coherent initial state only the creation-operator
/// columns of S matter: ⟨b†b⟩ − |β|² = Σ_k |S_{0,h+k}|², and the annihilation
/// columns follow from the conjugation symmetry S = X conj(S) X.
pub fn detector_trajectory(
    modes: &ModeSet,
    profile: &AccelerationProfile,
    kinematics: KinematicsMode,
    cfg: &StepConfig,
    sample_times: &[f64],
) -> Result<Vec<DetectorObservables>> {
    let (worldline, grid) = prepare(modes, profile, kinematics, cfg, sample_times)?;
    let h = modes.n_field() + 1;
    let d = 2 * h;
    let mut y = vec![ZERO; h * d];
    for k in 0..h {
        y[k * d + h + k] = ONE;
    }
    let coherent = modes.slot(modes.coherent_mode).filter(|_| modes.alpha != ZERO);
    let alpha = modes.alpha;
    let mut out = Vec::with_capacity(sample_times.len());
    let mut gen = HeisenbergGenerator::new(modes, &worldline);
    integrate(&mut gen, &grid, &mut y, |_, y| {
        let excess: f64 = (0..h).map(|k| y[k * d].norm_sqr()).sum();
        let beta = match coherent {
            // S_{0,c} = conj(S_{h, h+c})
            Some(c) => alpha * y[c * d + h].conj() + alpha.conj() * y[c * d],
            None => ZERO,
        };
        let obs = DetectorObservables::from_moments(beta, excess);
        if !(obs.n.is_finite() && obs.q.is_finite() && obs.p.is_finite()) {
            return Err(Error::Numerical("non-finite detector observable".into()));
        }
        out.push(obs);
        Ok(())
    })?;
    Ok(out)
}

/// CSV rows `tau,n,q,p` for debugging trajectories.
pub fn write_trajectory_csv<W: Write>(mut w: W, times: &[f64], obs: &[DetectorObservables]) -> Result<()> {
    writeln!(w, "tau,n,q,p")?;
    for (t, o) in times.iter().zip(obs) {
        writeln!(w, "{t:.16e},{:.16e},{:.16e},{:.16e}", o.n, o.q, o.p)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{encode, EncodingConfig, InputRange};
    use approx::assert_abs_diff_eq;

    fn small_profile(a0: f64, period: f64, m: usize) -> AccelerationProfile {
        let cfg = EncodingConfig::with_default_span(a0, period, m, vec![InputRange::new(0.0, 1.0); 2]);
        encode(&[0.3, 0.8], &cfg).unwrap()
    }

    fn sample_grid(profile: &AccelerationProfile, dt: f64) -> Vec<f64> {
        let k = (profile.total_duration() / dt).round() as usize;
        (1..=k).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn initial_state_structure() {
        let zero = initial_state(&ModeSet::paper_default(5).with_alpha(ZERO)).unwrap();
        assert!(zero.mean.iter().all(|z| *z == ZERO));
        let coh = initial_state(&ModeSet::paper_default(5)).unwrap();
        assert_eq!(coh.cov, zero.cov);
        assert_eq!(coh.mean[3], C64::new(0.0, 10.0));
        assert_eq!(coh.mean[6 + 3], C64::new(0.0, -10.0));
        assert_eq!(coh.mean.iter().filter(|z| **z != ZERO).count(), 2);
        // commutator encoding σ − σᵀ = Ω
        let diff = &coh.cov - coh.cov.transpose() - symplectic_form(5);
        assert!(diff.iter().all(|z| *z == ZERO));
        assert_eq!(detector_observables(&coh), DetectorObservables { n: 0.0, q: 0.0, p: 0.0 });
    }

    #[test]
    fn invalid_mode_sets() {
        let mut m = ModeSet::paper_default(2);
        assert!(m.validate().is_err(), "coherent mode 3 missing");
        m.alpha = ZERO;
        assert!(m.validate().is_ok());
        let mut m = ModeSet::paper_default(4);
        m.mode_numbers = vec![2, 1];
        assert!(m.validate().is_err());
        m.mode_numbers = vec![];
        assert!(m.validate().is_err());
    }

    #[test]
    fn fsym_vanishes_at_node_or_without_coupling() {
        let modes = ModeSet::paper_default(4);
        let at_mirror = WorldlinePoint { tau: 0.7, t: 0.9, x: 0.0, xi: 0.3 };
        assert!(hamiltonian_fsym(&modes, &at_mirror).iter().all(|z| *z == ZERO));
        let off = WorldlinePoint { tau: 0.7, t: 0.9, x: 1.3, xi: 0.3 };
        let free = modes.clone().with_coupling(0.0);
        assert!(hamiltonian_fsym(&free, &off).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn fsym_single_mode_hand_expansion() {
        let modes = ModeSet { mode_numbers: vec![1], coherent_mode: 1, ..ModeSet::paper_default(1) };
        assert_abs_diff_eq!(modes.omega(1), 1.0 / 3.0, epsilon = 1e-15);
        // g₁ = 0.1 sin(1/3) / √(3π · 1/3)
        let g = 0.1 * (1.0f64 / 3.0).sin() / PI.sqrt();
        assert_abs_diff_eq!(g, 0.0184600, epsilon = 1e-7);
        let f = hamiltonian_fsym(&modes, &WorldlinePoint { tau: 0.0, t: 0.0, x: 1.0, xi: 0.0 });
        // Ψ = (b, a, b†, a†); every term couples b or b† to a or a†
        let g_c = C64::new(g, 0.0);
        for (i, j) in [(0, 1), (0, 3), (2, 1), (2, 3)] {
            assert_abs_diff_eq!((f[(i, j)] - g_c).norm(), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!((f[(j, i)] - g_c).norm(), 0.0, epsilon = 1e-15);
        }
        for (i, j) in [(0, 0), (0, 2), (1, 1), (1, 3), (2, 2), (3, 3)] {
            assert_eq!(f[(i, j)], ZERO);
        }

        // with phases: τ = 0.5, t = 0.7, x = 1
        let wp = WorldlinePoint { tau: 0.5, t: 0.7, x: 1.0, xi: 0.0 };
        let f = hamiltonian_fsym(&modes, &wp);
        let w = 1.0 / 3.0;
        let c_minus = C64::from_polar(g, -(0.5 + w * 0.7));
        let c_plus = C64::from_polar(g, -(0.5 - w * 0.7));
        assert!((f[(0, 1)] - c_minus).norm() < 1e-15);
        assert!((f[(0, 3)] - c_plus).norm() < 1e-15);
        assert!((f[(2, 3)] - c_minus.conj()).norm() < 1e-15);
        assert!((f[(2, 1)] - c_plus.conj()).norm() < 1e-15);
    }

    #[test]
    fn structured_generator_matches_dense_eom() {
        let modes = ModeSet::paper_default(4);
        let profile = small_profile(2.0, 1.0, 1);
        let wl = Worldline::new(&profile, KinematicsMode::Relativistic);
        let tau = 1.37;
        let seg = profile.segment_index(tau).unwrap();
        let wp = wl.in_segment(seg, tau);
        let d = modes.dim();
        let m = symplectic_form(4) * hamiltonian_fsym(&modes, &wp) * C64::new(0.0, -1.0);
        let v = DMatrix::from_fn(d, 3, |i, j| C64::new((i as f64 * 0.37 + j as f64).sin(), (i * j) as f64 * 0.1));
        let mut dy = vec![ZERO; d * 3];
        HeisenbergGenerator::new(&modes, &wl).eval(seg, tau, v.as_slice(), &mut dy);
        let expect = &m * &v;
        for (a, b) in dy.iter().zip(expect.iter()) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn uncoupled_propagator_is_identity() {
        let modes = ModeSet::paper_default(3).with_coupling(0.0);
        let profile = small_profile(2.0, 2.0, 1);
        let times = sample_grid(&profile, 1.0);
        let ss = propagate(&modes, &profile, KinematicsMode::Relativistic, &StepConfig::default(), &times).unwrap();
        for s in ss {
            assert_eq!(s, Propagator::identity(8));
        }
    }

    #[test]
    fn symplectic_and_conjugation_preserved() {
        let modes = ModeSet::paper_default(5);
        let profile = small_profile(3.0, 2.0, 1);
        let times = sample_grid(&profile, 1.0);
        for kin in KinematicsMode::ALL {
            let ss = propagate(&modes, &profile, kin, &StepConfig::default(), &times).unwrap();
            assert_eq!(ss.len(), times.len());
            for s in &ss {
                assert!(s.symplectic_error() < 1e-9, "{kin}: {}", s.symplectic_error());
                assert!(s.conjugation_error() < 1e-12);
            }
            // evolved covariance keeps the commutator structure
            let st = evolve(&initial_state(&modes).unwrap(), ss.last().unwrap()).unwrap();
            let c = &st.cov - st.cov.transpose() - symplectic_form(5);
            assert!(c.iter().all(|z| z.norm() < 1e-9));
        }
    }

    #[test]
    fn fast_path_matches_full_propagator() {
        let modes = ModeSet::paper_default(4).with_alpha(C64::new(0.4, 1.2));
        let profile = small_profile(2.0, 2.0, 1);
        let times = sample_grid(&profile, 1.0);
        for kin in KinematicsMode::ALL {
            let cfg = StepConfig::default();
            let fast = detector_trajectory(&modes, &profile, kin, &cfg, &times).unwrap();
            let full = propagate(&modes, &profile, kin, &cfg, &times).unwrap();
            let s0 = initial_state(&modes).unwrap();
            for (f, s) in fast.iter().zip(&full) {
                let slow = detector_observables(&evolve(&s0, s).unwrap());
                assert!(f.max_abs_diff(&slow) < 1e-12, "{f:?} vs {slow:?}");
            }
        }
    }

    #[test]
    fn evolve_identity_and_dimension_check() {
        let s0 = initial_state(&ModeSet::paper_default(3)).unwrap();
        assert_eq!(evolve(&s0, &Propagator::identity(8)).unwrap(), s0);
        assert!(matches!(evolve(&s0, &Propagator::identity(6)), Err(Error::Dimension { .. })));
    }

    #[test]
    fn coherent_detector_observables() {
        let mut s = initial_state(&ModeSet::paper_default(3).with_alpha(ZERO)).unwrap();
        let beta = C64::new(1.0, 1.0);
        s.mean[0] = beta;
        s.mean[4] = beta.conj();
        let o = detector_observables(&s);
        assert_abs_diff_eq!(o.q, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(o.p, 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(o.n, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn covariance_independent_of_alpha() {
        let profile = small_profile(2.0, 2.0, 1);
        let times = sample_grid(&profile, 1.0);
        let cfg = StepConfig::default();
        let vac = ModeSet::paper_default(4).with_alpha(ZERO);
        let coh = ModeSet::paper_default(4);
        let sv = propagate(&vac, &profile, KinematicsMode::Relativistic, &cfg, &times).unwrap();
        let sc = propagate(&coh, &profile, KinematicsMode::Relativistic, &cfg, &times).unwrap();
        for (a, b) in sv.iter().zip(&sc) {
            let ev = evolve(&initial_state(&vac).unwrap(), a).unwrap();
            let ec = evolve(&initial_state(&coh).unwrap(), b).unwrap();
            assert!((&ev.cov - &ec.cov).iter().all(|z| z.norm() < 1e-12));
            assert!(ev.mean.iter().all(|z| *z == ZERO));
        }
    }

    #[test]
    fn step_halving_converges() {
        let modes = ModeSet::paper_default(10);
        let profile = small_profile(3.0, 2.0, 1);
        let times = sample_grid(&profile, 1.0);
        for kin in KinematicsMode::ALL {
            let a = detector_trajectory(&modes, &profile, kin, &StepConfig::new(200), &times).unwrap();
            let b = detector_trajectory(&modes, &profile, kin, &StepConfig::new(400), &times).unwrap();
            let worst = a.iter().zip(&b).map(|(x, y)| x.max_abs_diff(y)).fold(0.0, f64::max);
            assert!(worst < 1e-8, "{kin}: step halving changed observables by {worst:e}");
        }
    }

    #[test]
    fn too_coarse_steps_rejected() {
        let profile = small_profile(1.0, 1.0, 1);
        let r = propagate(&ModeSet::paper_default(3), &profile, KinematicsMode::Newtonian, &StepConfig::new(8), &[1.0]);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn trajectory_csv_layout() {
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &[0.5], &[DetectorObservables { n: 1.0, q: 0.0, p: -1.0 }]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("tau,n,q,p\n5.0000000000000000e-1,"));
    }
}
