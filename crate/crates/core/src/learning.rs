//! Closed-form ridge readout, accuracy, and empirical kernel spectra.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::reservoir::{features_for, FeatureVector, ReservoirConfig, FEATURE_LAYOUT_VERSION};
use crate::{Error, Result};

/// Eigenvalues below this fraction of the largest are reported as zero.
pub const RELATIVE_ZERO: f64 = 1e-12;

/// Feature columns Φ (one column per sample) and ±1 labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub phi: DMatrix<f64>,
    pub labels: Vec<f64>,
}

impl DesignMatrix {
    pub fn new(phi: DMatrix<f64>, labels: Vec<f64>) -> Result<Self> {
        if phi.ncols() != labels.len() {
            return Err(Error::Dimension { expected: phi.ncols(), got: labels.len() });
        }
        Ok(DesignMatrix { phi, labels })
    }

    pub fn from_features(features: &[FeatureVector], labels: &[f64]) -> Result<Self> {
        let d = features.first().map_or(0, |f| f.len());
        if let Some(f) = features.iter().find(|f| f.len() != d) {
            return Err(Error::Dimension { expected: d, got: f.len() });
        }
        let phi = DMatrix::from_fn(d, features.len(), |i, j| features[j].values[i]);
        Self::new(phi, labels.to_vec())
    }

    pub fn n_samples(&self) -> usize {
        self.phi.ncols()
    }

    pub fn feature_dim(&self) -> usize {
        self.phi.nrows()
    }

    fn check_finite(&self) -> Result<()> {
        if self.phi.iter().chain(&self.labels).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite entry in design matrix or labels".into()));
        }
        Ok(())
    }
}

/// Per-feature z-scoring fitted on training data; the bias row is left alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    /// Rows with zero spread keep unit scale. The last row (bias) is untouched.
    pub fn fit(phi: &DMatrix<f64>) -> Self {
        let (d, n) = phi.shape();
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        for i in 0..d.saturating_sub(1) {
            let row = phi.row(i);
            let m = row.sum() / n as f64;
            let var = row.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n as f64;
            mean[i] = m;
            if var > 0.0 {
                scale[i] = var.sqrt();
            }
        }
        Standardizer { mean, scale }
    }

    pub fn apply_matrix(&self, phi: &DMatrix<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(phi.nrows(), phi.ncols(), |i, j| (phi[(i, j)] - self.mean[i]) / self.scale[i])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter().enumerate().map(|(i, v)| (v - self.mean[i]) / self.scale[i]).collect()
    }
}

/// Ridge weights with everything needed to reproduce features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    /// Readout weights, bias absorbed as the last entry.
    pub weights: Vec<f64>,
    pub regularization: f64,
    #[serde(default)]
    pub standardizer: Option<Standardizer>,
    /// Reservoir (including encoding ranges) the weights were trained on.
    #[serde(default)]
    pub reservoir: Option<ReservoirConfig>,
    pub feature_layout_version: u32,
}

/// w* = (ΦΦᵀ + l·N·1)⁻¹ Φ y, via Cholesky.
pub fn train_ridge(data: &DesignMatrix, l: f64) -> Result<TrainedModel> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::Config(format!("regularization must be positive, got {l}")));
    }
    let n = data.n_samples();
    if n == 0 {
        return Err(Error::Data("no training samples".into()));
    }
    data.check_finite()?;
    let phi = &data.phi;
    let mut gram = phi * phi.transpose();
    let shift = l * n as f64;
    for i in 0..gram.nrows() {
        gram[(i, i)] += shift;
    }
    let rhs = phi * DVector::from_column_slice(&data.labels);
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Numerical("regularized normal matrix is not positive definite".into()))?;
    let w = chol.solve(&rhs);
    Ok(TrainedModel {
        weights: w.iter().copied().collect(),
        regularization: l,
        standardizer: None,
        reservoir: None,
        feature_layout_version: FEATURE_LAYOUT_VERSION,
    })
}

/// Fit with optional z-scoring of the non-bias rows.
pub fn train_ridge_standardized(data: &DesignMatrix, l: f64, standardize: bool) -> Result<TrainedModel> {
    if !standardize {
        return train_ridge(data, l);
    }
    let st = Standardizer::fit(&data.phi);
    let scaled = DesignMatrix::new(st.apply_matrix(&data.phi), data.labels.clone())?;
    let mut model = train_ridge(&scaled, l)?;
    model.standardizer = Some(st);
    Ok(model)
}

/// L(w) = (1/2N) Σ (yᵢ − wᵀXᵢ)² + (l/2)‖w‖².
pub fn ridge_loss(data: &DesignMatrix, w: &[f64], l: f64) -> f64 {
    let w = DVector::from_column_slice(w);
    let resid = DVector::from_column_slice(&data.labels) - data.phi.transpose() * &w;
    0.5 * resid.norm_squared() / data.n_samples() as f64 + 0.5 * l * w.norm_squared()
}

/// ∇L(w) = −(1/N) Φ (y − Φᵀw) + l w.
pub fn ridge_gradient(data: &DesignMatrix, w: &[f64], l: f64) -> Vec<f64> {
    let w = DVector::from_column_slice(w);
    let resid = DVector::from_column_slice(&data.labels) - data.phi.transpose() * &w;
    let g = -(&data.phi * resid) / data.n_samples() as f64 + w * l;
    g.iter().copied().collect()
}

/// f̂ = wᵀX.
pub fn predict(model: &TrainedModel, x: &FeatureVector) -> Result<f64> {
    if x.len() != model.weights.len() {
        return Err(Error::Dimension { expected: model.weights.len(), got: x.len() });
    }
    let dot = |v: &[f64]| v.iter().zip(&model.weights).map(|(a, b)| a * b).sum::<f64>();
    Ok(match &model.standardizer {
        Some(st) => dot(&st.apply(&x.values)),
        None => dot(&x.values),
    })
}

/// sign(f̂) with sign(0) = +1.
pub fn classify(model: &TrainedModel, x: &FeatureVector) -> Result<f64> {
    Ok(if predict(model, x)? >= 0.0 { 1.0 } else { -1.0 })
}

/// Fraction of samples whose predicted class equals the label.
pub fn accuracy(model: &TrainedModel, features: &[FeatureVector], labels: &[f64]) -> Result<f64> {
    if features.is_empty() {
        return Err(Error::Data("accuracy of an empty dataset".into()));
    }
    if features.len() != labels.len() {
        return Err(Error::Dimension { expected: features.len(), got: labels.len() });
    }
    let mut hits = 0usize;
    for (x, y) in features.iter().zip(labels) {
        if classify(model, x)? == *y {
            hits += 1;
        }
    }
    Ok(hits as f64 / features.len() as f64)
}

/// Descending kernel eigenvalues with the threshold used for effective rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpectrum {
    pub eigenvalues: Vec<f64>,
    pub threshold: f64,
}

impl KernelSpectrum {
    /// #{γ > threshold}.
    pub fn effective_rank(&self) -> usize {
        self.rank_above(self.threshold)
    }

    pub fn rank_above(&self, threshold: f64) -> usize {
        self.eigenvalues.iter().take_while(|&&g| g > threshold).count()
    }

    /// Spectrum rescaled so the largest eigenvalue is 1.
    pub fn normalized(&self) -> KernelSpectrum {
        let top = self.eigenvalues.first().copied().unwrap_or(0.0);
        let s = if top > 0.0 { 1.0 / top } else { 1.0 };
        KernelSpectrum { eigenvalues: self.eigenvalues.iter().map(|g| g * s).collect(), threshold: self.threshold }
    }

    /// Strictly positive eigenvalues, at most `limit` of them.
    pub fn nonzero(&self, limit: usize) -> &[f64] {
        let k = self.eigenvalues.iter().take_while(|&&g| g > 0.0).count().min(limit);
        &self.eigenvalues[..k]
    }
}

fn sorted_spectrum(m: DMatrix<f64>, threshold: f64) -> KernelSpectrum {
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let top = ev.first().copied().unwrap_or(0.0).max(0.0);
    for g in ev.iter_mut() {
        if *g < RELATIVE_ZERO * top {
            *g = 0.0;
        }
    }
    KernelSpectrum { eigenvalues: ev, threshold }
}

/// Eigenvalues of ΦΦᵀ/N, with effective-rank threshold `threshold`
/// (conventionally the regularization l).
pub fn kernel_spectrum(phi: &DMatrix<f64>, threshold: f64) -> KernelSpectrum {
    let n = phi.ncols().max(1) as f64;
    sorted_spectrum(phi * phi.transpose() / n, threshold)
}

/// Eigenvalues of the Gram matrix ΦᵀΦ/N; shares its nonzero spectrum with
/// [`kernel_spectrum`].
pub fn gram_spectrum(phi: &DMatrix<f64>, threshold: f64) -> KernelSpectrum {
    let n = phi.ncols().max(1) as f64;
    sorted_spectrum(phi.transpose() * phi / n, threshold)
}

/// k(x, x′) = X(x′)ᵀX(x).
pub fn kernel(x: &[f64], x_prime: &[f64], cfg: &ReservoirConfig) -> Result<f64> {
    Ok(features_for(x, cfg)?.dot(&features_for(x_prime, cfg)?))
}
