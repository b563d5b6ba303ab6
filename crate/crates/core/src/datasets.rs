//! Two-spiral benchmark generation, seeded splits and CSV persistence.

use std::f64::consts::TAU;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::encoding::InputRange;
use crate::{Error, Result};

/// How spiral angles are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Independent draw per sample, branches alternating.
    #[default]
    Random,
    /// One draw per pair of samples, shared by both branches.
    Paired,
    /// Evenly spaced angles, both branches (the classic discrete benchmark).
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpiralParams {
    pub n: usize,
    pub turns: f64,
    pub radius: f64,
    pub noise_sd: f64,
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
}

impl Default for SpiralParams {
    fn default() -> Self {
        SpiralParams { n: 5000, turns: 1.5, radius: 1.0, noise_sd: 0.02, seed: 0, sampling: Sampling::Random }
    }
}

impl SpiralParams {
    /// 2×97 points, 3.25 turns, outer radius 6.5, no noise.
    pub fn classic() -> Self {
        SpiralParams { n: 194, turns: 3.25, radius: 6.5, noise_sd: 0.0, seed: 0, sampling: Sampling::Grid }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!("spiral sample count must be even and ≥ 2, got {}", self.n)));
        }
        if !(self.turns > 0.0) || !(self.radius > 0.0) || !(self.noise_sd >= 0.0) {
            return Err(Error::Config("spiral turns and radius must be positive, noise non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub points: Vec<[f64; 2]>,
    /// ±1 branch labels.
    pub labels: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(points: Vec<[f64; 2]>, labels: Vec<f64>) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::Dimension { expected: points.len(), got: labels.len() });
        }
        if let Some(y) = labels.iter().find(|y| **y != 1.0 && **y != -1.0) {
            return Err(Error::Data(format!("label {y} is not ±1")));
        }
        Ok(LabeledDataset { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn inputs(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.to_vec()).collect()
    }

    /// Per-coordinate bounding box.
    pub fn bounding_box(&self) -> Result<Vec<InputRange>> {
        if self.is_empty() {
            return Err(Error::Data("bounding box of an empty dataset".into()));
        }
        let mut r = vec![InputRange::new(f64::INFINITY, f64::NEG_INFINITY); 2];
        for p in &self.points {
            for (ri, v) in r.iter_mut().zip(p) {
                ri.min = ri.min.min(*v);
                ri.max = ri.max.max(*v);
            }
        }
        Ok(r)
    }

    /// #(+1) − #(−1).
    pub fn label_imbalance(&self) -> i64 {
        self.labels.iter().map(|y| *y as i64).sum()
    }

    fn subset(&self, idx: &[usize]) -> LabeledDataset {
        LabeledDataset {
            points: idx.iter().map(|&i| self.points[i]).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// CSV with header `x1,x2,label`; floats carry 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "x1,x2,label")?;
        for (p, y) in self.points.iter().zip(&self.labels) {
            writeln!(w, "{:.16e},{:.16e},{}", p[0], p[1], *y as i64)?;
        }
        Ok(())
    }

    /// Inverse of [`write_csv`](Self::write_csv); `#` lines are skipped.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels = Vec::new();
        let mut header_seen = false;
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if !header_seen {
                if t != "x1,x2,label" {
                    return Err(Error::Parse { line: lineno, msg: format!("expected header `x1,x2,label`, got `{t}`") });
                }
                header_seen = true;
                continue;
            }
            let cols: Vec<&str> = t.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Parse { line: lineno, msg: format!("expected 3 columns, got {}", cols.len()) });
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse { line: lineno, msg: format!("`{s}`: {e}") })
            };
            let y = num(cols[2])?;
            if y != 1.0 && y != -1.0 {
                return Err(Error::Parse { line: lineno, msg: format!("label `{}` is not ±1", cols[2]) });
            }
            points.push([num(cols[0])?, num(cols[1])?]);
            labels.push(y);
        }
        if !header_seen {
            return Err(Error::Parse { line: 0, msg: "missing header".into() });
        }
        Ok(LabeledDataset { points, labels })
    }

    /// SHA-256 of the canonical CSV serialization (no comment line).
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, None).expect("writing to memory");
        hex::encode(Sha256::digest(&buf))
    }
}

pub fn save(ds: &LabeledDataset, path: &Path, comment: Option<&str>) -> Result<()> {
    let mut buf = Vec::new();
    ds.write_csv(&mut buf, comment)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<LabeledDataset> {
    LabeledDataset::read_csv(fs::File::open(path)?)
}

fn spiral_point(theta: f64, branch: f64, params: &SpiralParams) -> [f64; 2] {
    let r = params.radius * theta / (TAU * params.turns);
    [branch * r * theta.sin(), branch * r * theta.cos()]
}

/// Two interlocking spirals: θ = 2π·turns·√u, r = radius·θ/(2π·turns),
/// point = s·(r sin θ, r cos θ) + N(0, noise_sd²), label s ∈ {+1, −1}.
pub fn two_spirals(params: &SpiralParams) -> Result<LabeledDataset> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_sd).map_err(|e| Error::Config(e.to_string()))?;
    let theta_max = TAU * params.turns;
    let half = params.n / 2;
    let mut points = Vec::with_capacity(params.n);
    let mut labels = Vec::with_capacity(params.n);
    let mut shared = 0.0;
    for i in 0..params.n {
        let branch = if i % 2 == 0 { 1.0 } else { -1.0 };
        let theta = match params.sampling {
            Sampling::Random => theta_max * (1.0 - rng.gen::<f64>()).sqrt(),
            Sampling::Paired => {
                if i % 2 == 0 {
                    shared = theta_max * (1.0 - rng.gen::<f64>()).sqrt();
                }
                shared
            }
            Sampling::Grid => theta_max * (i / 2 + 1) as f64 / half as f64,
        };
        let mut p = spiral_point(theta, branch, params);
        if params.noise_sd > 0.0 {
            p[0] += noise.sample(&mut rng);
            p[1] += noise.sample(&mut rng);
        }
        points.push(p);
        labels.push(branch);
    }
    LabeledDataset::new(points, labels)
}

/// Disjoint seeded shuffle-split into (train, test).
pub fn split(ds: &LabeledDataset, n_train: usize, n_test: usize, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if n_train + n_test > ds.len() {
        return Err(Error::Config(format!(
            "split of {n_train} + {n_test} exceeds dataset size {}",
            ds.len()
        )));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((ds.subset(&idx[..n_train]), ds.subset(&idx[n_train..n_train + n_test])))
}
