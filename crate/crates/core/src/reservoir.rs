//! Input → acceleration profile → detector dynamics → feature vector.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dense_engine::{self, DetectorKind};
use crate::encoding::{self, EncodingConfig};
use crate::gaussian_engine::{self, DetectorObservables, ModeSet, StepConfig};
use crate::worldline::{AccelerationProfile, KinematicsMode, Worldline};
use crate::{Error, Result};

/// Layout tag of [`FeatureVector`], stored with trained models.
pub const FEATURE_LAYOUT_VERSION: u32 = 1;

/// Which simulator produces the detector observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    /// Harmonic detector, exact Gaussian dynamics over all configured modes.
    Gaussian,
    /// Two-level detector on the coherent mode only, Fock cutoff `n_max`
    /// (None: ⌈|α|² + 8|α|⌉).
    DenseQubit { n_max: Option<usize> },
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Engine::Gaussian),
            "qubit" | "dense_qubit" => Ok(Engine::DenseQubit { n_max: None }),
            other => Err(Error::Config(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    pub encoding: EncodingConfig,
    pub modes: ModeSet,
    pub kinematics: KinematicsMode,
    pub engine: Engine,
    /// Measurement interval ΔT; defaults to T/2.
    pub measurement_interval: Option<f64>,
    pub step: StepConfig,
}

impl ReservoirConfig {
    pub fn new(encoding: EncodingConfig, modes: ModeSet, kinematics: KinematicsMode) -> Self {
        ReservoirConfig {
            encoding,
            modes,
            kinematics,
            engine: Engine::Gaussian,
            measurement_interval: None,
            step: StepConfig::default(),
        }
    }

    pub fn delta_t(&self) -> f64 {
        self.measurement_interval.unwrap_or(0.5 * self.encoding.period)
    }

    /// Measurement times τ_k = k·ΔT for k = 1..=K_tot.
    pub fn measurement_times(&self) -> Result<Vec<f64>> {
        let total = self.encoding.total_duration();
        let dt = self.delta_t();
        if !(dt > 0.0) {
            return Err(Error::Config(format!("measurement interval must be positive, got {dt}")));
        }
        let k = (total / dt).round();
        if k < 1.0 || (k * dt - total).abs() > 1e-12 * total.max(1.0) {
            return Err(Error::Config(format!(
                "measurement interval {dt} does not divide the duration {total}"
            )));
        }
        let k = k as usize;
        Ok((1..=k).map(|i| if i == k { total } else { i as f64 * dt }).collect())
    }

    /// 3·K_tot + 1.
    pub fn feature_dim(&self) -> Result<usize> {
        Ok(3 * self.measurement_times()?.len() + 1)
    }

    pub fn validate(&self) -> Result<()> {
        self.encoding.validate()?;
        self.modes.validate()?;
        self.step.validate()?;
        self.measurement_times()?;
        Ok(())
    }

    /// Mode set actually simulated by the selected engine.
    pub fn engine_modes(&self) -> ModeSet {
        match self.engine {
            Engine::Gaussian => self.modes.clone(),
            Engine::DenseQubit { .. } => {
                ModeSet { mode_numbers: vec![self.modes.coherent_mode], ..self.modes.clone() }
            }
        }
    }

    /// Column names n_k, q_k, p_k, …, bias.
    pub fn feature_names(&self) -> Result<Vec<String>> {
        let k = self.measurement_times()?.len();
        let mut names = Vec::with_capacity(3 * k + 1);
        for i in 1..=k {
            names.extend([format!("n_{i}"), format!("q_{i}"), format!("p_{i}")]);
        }
        names.push("bias".into());
        Ok(names)
    }
}

/// (n, q, p) at each measurement time followed by a constant 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn from_observables(obs: &[DetectorObservables]) -> Self {
        let mut values = Vec::with_capacity(3 * obs.len() + 1);
        for o in obs {
            values.extend([o.n, o.q, o.p]);
        }
        values.push(1.0);
        FeatureVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum()
    }
}

fn check_cavity(profile: &AccelerationProfile, cfg: &ReservoirConfig) {
    let wl = Worldline::new(profile, cfg.kinematics);
    let (lo, hi) = wl.position_range();
    if lo < -1e-12 || hi > cfg.modes.cavity_length {
        log::warn!(
            "detector leaves the cavity: x ∈ [{lo:.4}, {hi:.4}], L = {:.4}",
            cfg.modes.cavity_length
        );
    }
}

/// Detector observables at every measurement time for input `x`.
pub fn observables_for(x: &[f64], cfg: &ReservoirConfig) -> Result<Vec<DetectorObservables>> {
    cfg.validate()?;
    let profile = encoding::encode(x, &cfg.encoding)?;
    check_cavity(&profile, cfg);
    let times = cfg.measurement_times()?;
    let modes = cfg.engine_modes();
    match cfg.engine {
        Engine::Gaussian => gaussian_engine::detector_trajectory(&modes, &profile, cfg.kinematics, &cfg.step, &times),
        Engine::DenseQubit { n_max } => {
            let n_max = n_max.unwrap_or_else(|| dense_engine::coherent_cutoff(modes.alpha).ceil() as usize);
            let s0 = dense_engine::dense_initial(DetectorKind::TwoLevel, modes.alpha, n_max)?;
            let run = dense_engine::dense_propagate(&s0, &modes, &profile, cfg.kinematics, &cfg.step, &times)?;
            run.into_valid()?
                .iter()
                .map(|s| dense_engine::qubit_features(s).map(|q| DetectorObservables { n: q.pz, q: q.px, p: q.py }))
                .collect()
        }
    }
}

/// Feature vector X(x).
pub fn features_for(x: &[f64], cfg: &ReservoirConfig) -> Result<FeatureVector> {
    let fv = FeatureVector::from_observables(&observables_for(x, cfg)?);
    if fv.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite feature".into()));
    }
    Ok(fv)
}

/// Features for many inputs on `workers` threads; output order follows input
/// order.
pub fn feature_matrix(inputs: &[Vec<f64>], cfg: &ReservoirConfig, workers: usize) -> Result<Vec<FeatureVector>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| inputs.par_iter().map(|x| features_for(x, cfg)).collect())
}
