//! Batch experiment runner behind the `relqrc` binary.
//!
//! Every command reads one TOML [`ExperimentConfig`], applies command-line
//! and environment overrides, writes the fully resolved configuration beside
//! its outputs and tags each output file with the configuration hash and
//! [`ARTIFACT_VERSION`].

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cqed_drive::{self, DriveParams, FrequencyUnit};
use crate::datasets::{self, LabeledDataset, Sampling, SpiralParams};
use crate::encoding::{self, EncodingConfig, InputRange};
use crate::gaussian_engine::{ModeSet, StepConfig};
use crate::learning::{self, DesignMatrix, TrainedModel};
use crate::reservoir::{self, Engine, FeatureVector, ReservoirConfig};
use crate::worldline::{KinematicsMode, Worldline};
use crate::{Error, Result, ARTIFACT_VERSION, C64};

/// Number of leading nonzero eigenvalues flagged in kernel reports.
pub const HIGHLIGHTED_EIGENVALUES: usize = 40;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSection {
    pub n: usize,
    pub turns: f64,
    pub radius: f64,
    pub noise_sd: f64,
    pub sampling: Sampling,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub split_seed: u64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        let s = SpiralParams::default();
        DatasetSection {
            n: 1000,
            turns: s.turns,
            radius: s.radius,
            noise_sd: s.noise_sd,
            sampling: s.sampling,
            seed: 0,
            n_train: 800,
            n_test: 200,
            split_seed: 1,
        }
    }
}

impl DatasetSection {
    pub fn spiral(&self) -> SpiralParams {
        SpiralParams {
            n: self.n,
            turns: self.turns,
            radius: self.radius,
            noise_sd: self.noise_sd,
            seed: self.seed,
            sampling: self.sampling,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodingSection {
    pub a0: f64,
    /// Δa; resolves to 0.1·a0.
    pub delta_a: Option<f64>,
    pub period: f64,
    pub repetitions: usize,
    /// ΔT; resolves to T/2.
    pub measurement_interval: Option<f64>,
    /// Per-coordinate input ranges; resolve to the dataset bounding box.
    pub input_ranges: Option<Vec<InputRange>>,
}

impl Default for EncodingSection {
    fn default() -> Self {
        EncodingSection {
            a0: 3.0,
            delta_a: None,
            period: 2.0,
            repetitions: 4,
            measurement_interval: None,
            input_ranges: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    /// Number of field modes N.
    pub count: usize,
    pub cavity_length: f64,
    pub detector_frequency: f64,
    pub coupling: f64,
    pub coherent_mode: usize,
    pub alpha_re: f64,
    pub alpha_im: f64,
}

impl Default for ModesSection {
    fn default() -> Self {
        let m = ModeSet::paper_default(10);
        ModesSection {
            count: 10,
            cavity_length: m.cavity_length,
            detector_frequency: m.detector_frequency,
            coupling: m.coupling,
            coherent_mode: m.coherent_mode,
            alpha_re: m.alpha.re,
            alpha_im: m.alpha.im,
        }
    }
}

impl ModesSection {
    /// `count` modes: 1..=count, or when that would miss the coherent mode,
    /// the `count` modes ending at it.
    pub fn mode_set(&self, count: usize) -> ModeSet {
        let first = if count >= self.coherent_mode { 1 } else { self.coherent_mode + 1 - count };
        ModeSet {
            mode_numbers: (first..first + count).collect(),
            cavity_length: self.cavity_length,
            detector_frequency: self.detector_frequency,
            coupling: self.coupling,
            coherent_mode: self.coherent_mode,
            alpha: C64::new(self.alpha_re, self.alpha_im),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Gaussian,
    Qubit,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EngineKind::Gaussian),
            "qubit" => Ok(EngineKind::Qubit),
            other => Err(Error::Config(format!("unknown engine `{other}` (expected gaussian or qubit)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EngineSection {
    pub kind: EngineKind,
    /// Fock cutoff of the qubit engine; resolves to ⌈|α|² + 8|α|⌉.
    pub n_max: Option<usize>,
    pub steps_per_period: usize,
}

impl Default for EngineSection {
    fn default() -> Self {
        EngineSection { kind: EngineKind::Gaussian, n_max: None, steps_per_period: StepConfig::default().steps_per_period }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearningSection {
    pub regularization: f64,
    pub standardize: bool,
    /// Effective-rank threshold on the normalized spectrum; resolves to the
    /// regularization.
    pub rank_threshold: Option<f64>,
}

impl Default for LearningSection {
    fn default() -> Self {
        LearningSection { regularization: 1e-6, standardize: false, rank_threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub a0: Vec<f64>,
    pub period: Vec<f64>,
    pub repetitions: Vec<usize>,
    pub kinematics: Vec<KinematicsMode>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            a0: vec![1.0],
            period: vec![1.0, 2.0, 3.0],
            repetitions: vec![4],
            kinematics: KinematicsMode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    pub mode_counts: Vec<usize>,
    /// Training inputs used for the report; 0 disables it.
    pub samples: usize,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        ConvergenceSection { mode_counts: vec![1, 3, 5, 10, 15], samples: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveSection {
    pub params: DriveParams,
    pub a0: f64,
    pub delta_a_ratio: f64,
    pub period: f64,
    pub repetitions: usize,
    /// Input point on the unit square encoded into the world line.
    pub input: Vec<f64>,
    pub samples_per_period: f64,
    pub export_unit: FrequencyUnit,
}

impl Default for DriveSection {
    fn default() -> Self {
        DriveSection {
            params: DriveParams::circuit_example(),
            a0: 2.0,
            delta_a_ratio: 0.1,
            period: 2.0,
            repetitions: 1,
            input: vec![0.5, 0.5],
            samples_per_period: 20.0,
            export_unit: FrequencyUnit::MHz,
        }
    }
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kinematics: KinematicsMode,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub dataset: DatasetSection,
    pub encoding: EncodingSection,
    pub modes: ModesSection,
    pub engine: EngineSection,
    pub learning: LearningSection,
    pub sweep: SweepSection,
    pub convergence: ConvergenceSection,
    pub drive: DriveSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kinematics: KinematicsMode::Relativistic,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out_dir: PathBuf::from("relqrc-out"),
            dataset: DatasetSection::default(),
            encoding: EncodingSection::default(),
            modes: ModesSection::default(),
            engine: EngineSection::default(),
            learning: LearningSection::default(),
            sweep: SweepSection::default(),
            convergence: ConvergenceSection::default(),
            drive: DriveSection::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Fill every optional field; input ranges come from `data` when unset.
    pub fn resolve(&mut self, data: &LabeledDataset) -> Result<()> {
        if self.encoding.delta_a.is_none() {
            self.encoding.delta_a = Some(0.1 * self.encoding.a0);
        }
        if self.encoding.measurement_interval.is_none() {
            self.encoding.measurement_interval = Some(0.5 * self.encoding.period);
        }
        if self.encoding.input_ranges.is_none() {
            self.encoding.input_ranges = Some(data.bounding_box()?);
        }
        if self.learning.rank_threshold.is_none() {
            self.learning.rank_threshold = Some(self.learning.regularization);
        }
        if self.engine.kind == EngineKind::Qubit && self.engine.n_max.is_none() {
            let alpha = C64::new(self.modes.alpha_re, self.modes.alpha_im);
            self.engine.n_max = Some(crate::dense_engine::coherent_cutoff(alpha).ceil() as usize);
        }
        Ok(())
    }

    /// SHA-256 over the resolved configuration, excluding the output
    /// directory and worker count (neither affects results).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        c.workers = 0;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))[..16].to_string()
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.spiral().validate()?;
        if self.dataset.n_train == 0 || self.dataset.n_test == 0 {
            return Err(Error::Config("n_train and n_test must be positive".into()));
        }
        if self.dataset.n_train + self.dataset.n_test > self.dataset.n {
            return Err(Error::Config(format!(
                "n_train + n_test = {} exceeds dataset size {}",
                self.dataset.n_train + self.dataset.n_test,
                self.dataset.n
            )));
        }
        if !(self.learning.regularization > 0.0) {
            return Err(Error::Config("learning.regularization must be positive".into()));
        }
        if self.modes.count == 0 {
            return Err(Error::Config("modes.count must be at least 1".into()));
        }
        self.mode_set().validate()?;
        let s = &self.sweep;
        if s.a0.iter().chain(&s.period).any(|v| !(*v > 0.0)) || s.repetitions.contains(&0) {
            return Err(Error::Config("sweep axes must hold positive values".into()));
        }
        if self.convergence.mode_counts.contains(&0) {
            return Err(Error::Config("convergence.mode_counts must be positive".into()));
        }
        if self.drive.input.len() != 2 || !(self.drive.samples_per_period > 0.0) {
            return Err(Error::Config("drive.input needs two coordinates and a positive sampling".into()));
        }
        Ok(())
    }

    pub fn mode_set(&self) -> ModeSet {
        self.modes.mode_set(self.modes.count)
    }

    /// Reservoir at the given encoding axes; the resolved fields are used
    /// when present.
    pub fn reservoir(&self, a0: f64, period: f64, repetitions: usize, kinematics: KinematicsMode) -> Result<ReservoirConfig> {
        let ranges = self
            .encoding
            .input_ranges
            .clone()
            .ok_or_else(|| Error::Config("input ranges unresolved".into()))?;
        let same_axes = a0 == self.encoding.a0 && period == self.encoding.period;
        let delta_a = match self.encoding.delta_a {
            Some(d) if same_axes => d,
            _ => 0.1 * a0,
        };
        let measurement_interval = match self.encoding.measurement_interval {
            Some(dt) if same_axes => Some(dt),
            _ => None,
        };
        let enc = EncodingConfig { a0, delta_a, period, repetitions, input_ranges: ranges };
        let engine = match self.engine.kind {
            EngineKind::Gaussian => Engine::Gaussian,
            EngineKind::Qubit => Engine::DenseQubit { n_max: self.engine.n_max },
        };
        let cfg = ReservoirConfig {
            encoding: enc,
            modes: self.mode_set(),
            kinematics,
            engine,
            measurement_interval,
            step: StepConfig::new(self.engine.steps_per_period),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn base_reservoir(&self) -> Result<ReservoirConfig> {
        self.reservoir(self.encoding.a0, self.encoding.period, self.encoding.repetitions, self.kinematics)
    }
}

#[derive(Debug, Parser)]
#[command(name = "relqrc", version, about = "Relativistic quantum reservoir computing experiments")]
pub struct Cli {
    /// Experiment configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "RELQRC_OUT")]
    pub out: Option<PathBuf>,
    /// Dataset and split seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for feature extraction.
    #[arg(long, global = true, env = "RELQRC_WORKERS")]
    pub workers: Option<usize>,
    /// Kinematics: rel or newt.
    #[arg(long, global = true, value_parser = parse_kinematics)]
    pub kinematics: Option<KinematicsMode>,
    /// Engine: gaussian or qubit.
    #[arg(long, global = true, value_parser = parse_engine)]
    pub engine: Option<EngineKind>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the two-spiral dataset and write train/test CSVs.
    Dataset,
    /// Write feature matrices and the mode-convergence report.
    Features {
        /// Dataset CSV to featurize instead of the configured train/test split.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Train the ridge readout; write the model and metrics.
    Train,
    /// Sweep the configured axes under each kinematics.
    Sweep,
    /// Write the kernel eigenvalue spectrum of the training features.
    Kernel,
    /// Synthesize the circuit-QED drive for the configured world line.
    Drive,
}

fn parse_kinematics(s: &str) -> std::result::Result<KinematicsMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_engine(s: &str) -> std::result::Result<EngineKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Loaded configuration plus derived data shared by all commands.
pub struct Context {
    pub config: ExperimentConfig,
    pub hash: String,
    pub dataset: LabeledDataset,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

impl Context {
    pub fn new(mut config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let dataset = datasets::two_spirals(&config.dataset.spiral())?;
        let (train, test) = datasets::split(&dataset, config.dataset.n_train, config.dataset.n_test, config.dataset.split_seed)?;
        config.resolve(&dataset)?;
        config.base_reservoir()?;
        let hash = config.hash();
        fs::create_dir_all(&config.out_dir)?;
        let ctx = Context { config, hash, dataset, train, test };
        let text = format!("# {}\n{}", ctx.stamp(), ctx.config.to_toml());
        fs::write(ctx.path("resolved_config.toml"), text)?;
        Ok(ctx)
    }

    pub fn stamp(&self) -> String {
        format!("{ARTIFACT_VERSION} config={}", self.hash)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.config.out_dir.join(name)
    }

    /// Features for `data` under `cfg`, cached on disk by (dataset, reservoir)
    /// hash.
    pub fn features(&self, data: &LabeledDataset, cfg: &ReservoirConfig) -> Result<Vec<FeatureVector>> {
        let key = {
            let json = serde_json::to_string(cfg).map_err(|e| Error::Config(e.to_string()))?;
            let mut h = Sha256::new();
            h.update(data.content_hash().as_bytes());
            h.update(json.as_bytes());
            h.update(ARTIFACT_VERSION.as_bytes());
            hex::encode(h.finalize())[..24].to_string()
        };
        let dir = self.path("cache");
        let file = dir.join(format!("features_{key}.csv"));
        if file.exists() {
            if let Ok(f) = read_feature_csv(&file, cfg.feature_dim()?) {
                if f.len() == data.len() {
                    log::info!("feature cache hit {}", file.display());
                    return Ok(f);
                }
            }
            log::warn!("ignoring unreadable feature cache {}", file.display());
        }
        let start = Instant::now();
        let feats = reservoir::feature_matrix(&data.inputs(), cfg, self.config.workers)?;
        log::info!(
            "{} features ({}) for {} samples in {:.1}s",
            cfg.kinematics,
            cfg.feature_dim()?,
            data.len(),
            start.elapsed().as_secs_f64()
        );
        fs::create_dir_all(&dir)?;
        write_feature_csv(&file, &self.stamp(), &cfg.feature_names()?, &feats, None)?;
        Ok(feats)
    }
}

fn write_feature_csv(
    path: &Path,
    stamp: &str,
    names: &[String],
    feats: &[FeatureVector],
    data: Option<&LabeledDataset>,
) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "# {stamp}")?;
    let lead = if data.is_some() { "x1,x2,label," } else { "" };
    writeln!(out, "{lead}{}", names.join(","))?;
    for (i, f) in feats.iter().enumerate() {
        if let Some(d) = data {
            write!(out, "{:.16e},{:.16e},{},", d.points[i][0], d.points[i][1], d.labels[i] as i64)?;
        }
        let row: Vec<String> = f.values.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    fs::write(path, out)?;
    Ok(())
}

fn read_feature_csv(path: &Path, dim: usize) -> Result<Vec<FeatureVector>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.starts_with('#')).skip(1) {
        let values = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() }))
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != dim {
            return Err(Error::Parse { line: i + 1, msg: format!("expected {dim} columns") });
        }
        out.push(FeatureVector { values });
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Data(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Outcome of training one reservoir on the configured split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainOutcome {
    pub a_train: f64,
    pub a_test: f64,
    pub effective_rank: usize,
    #[serde(skip)]
    pub model: TrainedModel,
    #[serde(skip)]
    pub test_predictions: Vec<f64>,
}

/// Train on the context's split under `cfg`.
pub fn train_reservoir(ctx: &Context, cfg: &ReservoirConfig) -> Result<TrainOutcome> {
    let ftr = ctx.features(&ctx.train, cfg)?;
    let fte = ctx.features(&ctx.test, cfg)?;
    let design = DesignMatrix::from_features(&ftr, &ctx.train.labels)?;
    let l = ctx.config.learning.regularization;
    let mut model = learning::train_ridge_standardized(&design, l, ctx.config.learning.standardize)?;
    model.reservoir = Some(cfg.clone());
    let threshold = ctx.config.learning.rank_threshold.unwrap_or(l);
    let effective_rank = learning::kernel_spectrum(&design.phi, threshold).normalized().effective_rank();
    let test_predictions = fte.iter().map(|x| learning::predict(&model, x)).collect::<Result<Vec<_>>>()?;
    Ok(TrainOutcome {
        a_train: learning::accuracy(&model, &ftr, &ctx.train.labels)?,
        a_test: learning::accuracy(&model, &fte, &ctx.test.labels)?,
        effective_rank,
        model,
        test_predictions,
    })
}

pub fn cmd_dataset(ctx: &Context) -> Result<()> {
    let stamp = ctx.stamp();
    datasets::save(&ctx.train, &ctx.path("train.csv"), Some(&stamp))?;
    datasets::save(&ctx.test, &ctx.path("test.csv"), Some(&stamp))?;
    log::info!("wrote {} train and {} test samples", ctx.train.len(), ctx.test.len());
    Ok(())
}

/// Relative ∞-norm difference of feature sets against a reference.
fn relative_difference(a: &[FeatureVector], reference: &[FeatureVector]) -> (f64, f64) {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (x, r) in a.iter().zip(reference) {
        for (u, v) in x.values.iter().zip(&r.values) {
            diff = diff.max((u - v).abs());
            scale = scale.max(v.abs());
        }
    }
    (diff, if scale > 0.0 { diff / scale } else { diff })
}

/// Features vs number of field modes, relative to the largest count.
pub fn mode_convergence(ctx: &Context) -> Result<Vec<(usize, f64, f64)>> {
    let conv = &ctx.config.convergence;
    if conv.samples == 0 || conv.mode_counts.is_empty() || ctx.config.engine.kind != EngineKind::Gaussian {
        return Ok(Vec::new());
    }
    let subset = LabeledDataset {
        points: ctx.train.points.iter().take(conv.samples).copied().collect(),
        labels: ctx.train.labels.iter().take(conv.samples).copied().collect(),
    };
    let mut counts = conv.mode_counts.clone();
    counts.sort_unstable();
    counts.dedup();
    let base = ctx.config.base_reservoir()?;
    let run = |count: usize| {
        let cfg = ReservoirConfig { modes: ctx.config.modes.mode_set(count), ..base.clone() };
        reservoir::feature_matrix(&subset.inputs(), &cfg, ctx.config.workers)
    };
    let reference = run(*counts.last().expect("non-empty"))?;
    counts
        .iter()
        .map(|&c| {
            let (abs, rel) = relative_difference(&run(c)?, &reference);
            Ok((c, abs, rel))
        })
        .collect()
}

pub fn cmd_features(ctx: &Context, data: Option<&Path>) -> Result<()> {
    let cfg = ctx.config.base_reservoir()?;
    let names = cfg.feature_names()?;
    let stamp = ctx.stamp();
    match data {
        Some(path) => {
            let ds = datasets::load(path)?;
            for (i, p) in ds.points.iter().enumerate() {
                encoding::map_input(p, &cfg.encoding).map_err(|e| Error::Data(format!("sample {}: {e}", i + 1)))?;
            }
            let f = ctx.features(&ds, &cfg)?;
            write_feature_csv(&ctx.path("features.csv"), &stamp, &names, &f, Some(&ds))?;
        }
        None => {
            let ftr = ctx.features(&ctx.train, &cfg)?;
            let fte = ctx.features(&ctx.test, &cfg)?;
            write_feature_csv(&ctx.path("features_train.csv"), &stamp, &names, &ftr, Some(&ctx.train))?;
            write_feature_csv(&ctx.path("features_test.csv"), &stamp, &names, &fte, Some(&ctx.test))?;
        }
    }
    let report = mode_convergence(ctx)?;
    if !report.is_empty() {
        let mut out = Vec::new();
        writeln!(out, "# {stamp}")?;
        writeln!(out, "modes,max_abs_diff,relative_diff")?;
        for (c, abs, rel) in report {
            writeln!(out, "{c},{abs:.6e},{rel:.6e}")?;
        }
        fs::write(ctx.path("mode_convergence.csv"), out)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainMetrics<'a> {
    artifact_version: &'a str,
    config_hash: &'a str,
    kinematics: KinematicsMode,
    engine: EngineKind,
    regularization: f64,
    n_train: usize,
    n_test: usize,
    a_train: f64,
    a_test: f64,
    effective_rank: usize,
}

#[derive(Serialize)]
struct ModelArtifact<'a> {
    artifact_version: &'a str,
    config_hash: &'a str,
    model: &'a TrainedModel,
}

pub fn cmd_train(ctx: &Context) -> Result<()> {
    let cfg = ctx.config.base_reservoir()?;
    let out = train_reservoir(ctx, &cfg)?;
    let metrics = TrainMetrics {
        artifact_version: ARTIFACT_VERSION,
        config_hash: &ctx.hash,
        kinematics: cfg.kinematics,
        engine: ctx.config.engine.kind,
        regularization: ctx.config.learning.regularization,
        n_train: ctx.train.len(),
        n_test: ctx.test.len(),
        a_train: out.a_train,
        a_test: out.a_test,
        effective_rank: out.effective_rank,
    };
    write_json(&ctx.path("metrics.json"), &metrics)?;
    write_json(
        &ctx.path("model.json"),
        &ModelArtifact { artifact_version: ARTIFACT_VERSION, config_hash: &ctx.hash, model: &out.model },
    )?;
    let mut pred = Vec::new();
    writeln!(pred, "# {}", ctx.stamp())?;
    writeln!(pred, "x1,x2,label,f_hat")?;
    for ((p, y), f) in ctx.test.points.iter().zip(&ctx.test.labels).zip(&out.test_predictions) {
        writeln!(pred, "{:.16e},{:.16e},{},{:.16e}", p[0], p[1], *y as i64, f)?;
    }
    fs::write(ctx.path("predictions_test.csv"), pred)?;
    log::info!("A_train = {:.4}, A_test = {:.4}", out.a_train, out.a_test);
    Ok(())
}

pub fn cmd_sweep(ctx: &Context) -> Result<()> {
    let s = &ctx.config.sweep;
    let stamp = ctx.stamp();
    let mut rows = Vec::new();
    let mut timing = Vec::new();
    writeln!(rows, "# {stamp}")?;
    writeln!(rows, "kinematics,a0,period,repetitions,a_train,a_test,effective_rank")?;
    writeln!(timing, "# {stamp}")?;
    writeln!(timing, "kinematics,a0,period,repetitions,wall_seconds")?;
    for &a0 in &s.a0 {
        for &period in &s.period {
            for &m in &s.repetitions {
                for &kin in &s.kinematics {
                    let start = Instant::now();
                    let cfg = ctx.config.reservoir(a0, period, m, kin)?;
                    let out = train_reservoir(ctx, &cfg)?;
                    let wall = start.elapsed().as_secs_f64();
                    writeln!(
                        rows,
                        "{},{a0},{period},{m},{:.6},{:.6},{}",
                        kin.short_name(),
                        out.a_train,
                        out.a_test,
                        out.effective_rank
                    )?;
                    writeln!(timing, "{},{a0},{period},{m},{wall:.3}", kin.short_name())?;
                    log::info!("{kin} a0={a0} T={period} m={m}: A_test = {:.4}", out.a_test);
                }
            }
        }
    }
    fs::write(ctx.path("sweep.csv"), rows)?;
    fs::write(ctx.path("sweep_timing.csv"), timing)?;
    Ok(())
}

pub fn cmd_kernel(ctx: &Context) -> Result<()> {
    let cfg = ctx.config.base_reservoir()?;
    let feats = ctx.features(&ctx.train, &cfg)?;
    let design = DesignMatrix::from_features(&feats, &ctx.train.labels)?;
    let threshold = ctx.config.learning.rank_threshold.unwrap_or(ctx.config.learning.regularization);
    let spectrum = learning::kernel_spectrum(&design.phi, threshold);
    let norm = spectrum.normalized();
    let mut out = Vec::new();
    writeln!(out, "# {} kinematics={} effective_rank={}", ctx.stamp(), cfg.kinematics, norm.effective_rank())?;
    writeln!(out, "index,eigenvalue,normalized,highlighted")?;
    let shown = norm.nonzero(HIGHLIGHTED_EIGENVALUES).len();
    for (i, (g, gn)) in spectrum.eigenvalues.iter().zip(&norm.eigenvalues).enumerate() {
        writeln!(out, "{},{g:.16e},{gn:.16e},{}", i + 1, u8::from(i < shown))?;
    }
    fs::write(ctx.path(&format!("kernel_spectrum_{}.csv", cfg.kinematics.short_name())), out)?;
    Ok(())
}

#[derive(Serialize)]
struct DriveReport<'a> {
    artifact_version: &'a str,
    config_hash: &'a str,
    diagnostics: Option<cqed_drive::DriveDiagnostics>,
    coupling: cqed_drive::CouplingReport,
    warnings: Vec<String>,
    samples: usize,
}

pub fn cmd_drive(ctx: &Context) -> Result<()> {
    let d = &ctx.config.drive;
    let enc = EncodingConfig {
        a0: d.a0,
        delta_a: d.delta_a_ratio * d.a0,
        period: d.period,
        repetitions: d.repetitions,
        input_ranges: vec![InputRange::new(0.0, 1.0); d.input.len()],
    };
    let profile = encoding::encode(&d.input, &enc)?;
    let wl = Worldline::new(&profile, ctx.config.kinematics);
    let grid = cqed_drive::uniform_grid(&d.params, profile.total_duration(), d.samples_per_period)?;
    let signal = cqed_drive::drive_waveform(&d.params, &wl, &grid)?;
    let file = fs::File::create(ctx.path("drive.csv"))?;
    signal.write_csv(std::io::BufWriter::new(file), d.export_unit, Some(&ctx.stamp()))?;
    let report = DriveReport {
        artifact_version: ARTIFACT_VERSION,
        config_hash: &ctx.hash,
        diagnostics: signal.diagnostics,
        coupling: cqed_drive::effective_coupling_check(&d.params, &ctx.config.mode_set())?,
        warnings: d.params.warnings(),
        samples: signal.len(),
    };
    write_json(&ctx.path("drive_report.json"), &report)?;
    Ok(())
}

/// Configuration after applying file, command-line and environment inputs.
pub fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(s) = cli.seed {
        cfg.dataset.seed = s;
        cfg.dataset.split_seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w.max(1);
    }
    if let Some(k) = cli.kinematics {
        cfg.kinematics = k;
    }
    if let Some(e) = cli.engine {
        cfg.engine.kind = e;
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<()> {
    let ctx = Context::new(effective_config(cli)?)?;
    match &cli.command {
        Command::Dataset => cmd_dataset(&ctx),
        Command::Features { data } => cmd_features(&ctx, data.as_deref()),
        Command::Train => cmd_train(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
        Command::Kernel => cmd_kernel(&ctx),
        Command::Drive => cmd_drive(&ctx),
    }
}

/// Parse arguments, run, and map failures to a one-line diagnostic and an
/// exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[code={}]: {e}", e.code());
            e.exit_code()
        }
    }
}
