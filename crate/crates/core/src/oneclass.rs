//! Gaussian-kernel PCA novelty detector.
//!
//! The training features are mapped implicitly through the Gaussian kernel,
//! centered in feature space, and the top `q` principal directions are kept.
//! A sample's score is its squared feature-space distance to that subspace
//! (after centering), evaluated entirely through kernel values. Eigenvectors
//! are scaled so `lambda_j * |alpha_j|^2 = 1`, which makes each feature-space
//! direction unit length.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{AedError, Result};
use crate::featnet::{descending_order, FeatureVector};

/// Eigenvalues below this fraction of the largest do not count toward rank.
pub const RANK_RTOL: f64 = 1e-10;
/// Most negative eigenvalue of the centered kernel tolerated as round-off.
pub const PSD_TOL: f64 = 1e-8;
/// Negative scores down to this are round-off and clamp to zero.
pub const SCORE_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpcaHyper {
    pub sigma: f64,
    pub q: usize,
}

impl KpcaHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(AedError::InvalidParameter(format!("kpca.sigma must be > 0, got {}", self.sigma)));
        }
        if self.q == 0 {
            return Err(AedError::InvalidParameter("kpca.q must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Normal,
    Anomaly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub status: Status,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KpcaModel {
    pub(crate) features: Vec<FeatureVector>,
    pub(crate) sigma: f64,
    /// `q` rows of length `N`.
    pub(crate) alphas: Vec<Vec<f64>>,
    pub(crate) lambdas: Vec<f64>,
    pub(crate) col_means: Vec<f64>,
    pub(crate) grand_mean: f64,
    pub(crate) threshold: f64,
    pub(crate) rank: usize,
}

impl KpcaModel {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn q(&self) -> usize {
        self.lambdas.len()
    }

    pub fn train_len(&self) -> usize {
        self.features.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn train_features(&self) -> &[FeatureVector] {
        &self.features
    }

    /// Coefficients of component `j` over the training points.
    pub fn alpha(&self, j: usize) -> &[f64] {
        &self.alphas[j]
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn col_means(&self) -> &[f64] {
        &self.col_means
    }

    pub fn grand_mean(&self) -> f64 {
        self.grand_mean
    }

    /// Largest training score; samples scoring above it are anomalies.
    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Number of usable components found at fit time (upper bound for `q`).
    pub fn rank(&self) -> usize {
        self.rank
    }

    fn check_len(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.feature_dim() {
            return Err(AedError::dims(
                format!("feature length {}", self.feature_dim()),
                format!("feature length {}", z.len()),
            ));
        }
        Ok(())
    }

    fn kernel_row(&self, z: &[f64]) -> Vec<f64> {
        self.features
            .iter()
            .map(|f| kernel_unchecked(z, f.as_slice(), self.sigma))
            .collect()
    }

    fn project_row(&self, row: &[f64]) -> Vec<f64> {
        let n = row.len() as f64;
        let row_mean = row.iter().sum::<f64>() / n;
        self.alphas
            .iter()
            .map(|alpha| {
                alpha
                    .iter()
                    .zip(row)
                    .zip(&self.col_means)
                    .map(|((a, v), m)| a * (v - m - row_mean + self.grand_mean))
                    .sum()
            })
            .collect()
    }

    fn score_row(&self, row: &[f64]) -> Result<f64> {
        let n = row.len() as f64;
        let row_mean = row.iter().sum::<f64>() / n;
        let explained: f64 = self.project_row(row).iter().map(|p| p * p).sum();
        let r = 1.0 - 2.0 * row_mean + self.grand_mean - explained;
        if r >= 0.0 {
            Ok(r)
        } else if r >= -SCORE_CLAMP {
            Ok(0.0)
        } else {
            Err(AedError::BrokenEigensystem { value: r })
        }
    }
}

#[inline]
fn kernel_unchecked(a: &[f64], b: &[f64], sigma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// `exp(-|a - b|^2 / (2 sigma^2))`.
pub fn gaussian_kernel(a: &[f64], b: &[f64], sigma: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(AedError::dims(a.len(), b.len()));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(AedError::InvalidParameter(format!("sigma must be > 0, got {sigma}")));
    }
    Ok(kernel_unchecked(a, b, sigma))
}

/// Gram matrix of `features` under the Gaussian kernel.
pub fn kernel_matrix(features: &[FeatureVector], sigma: f64) -> DMatrix<f64> {
    let n = features.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    if i == j {
                        1.0
                    } else {
                        kernel_unchecked(features[i].as_slice(), features[j].as_slice(), sigma)
                    }
                })
                .collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| if i <= j { upper[i][j - i] } else { upper[j][i - j] })
}

/// Double centering: `V_ij - mean_a V_ia - mean_a V_aj + mean_ab V_ab`.
pub fn center_kernel(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = v.nrows();
    if n == 0 || v.ncols() != n {
        return Err(AedError::dims("non-empty square matrix", format!("{}x{}", v.nrows(), v.ncols())));
    }
    for i in 0..n {
        for j in i + 1..n {
            if (v[(i, j)] - v[(j, i)]).abs() > 1e-12 {
                return Err(AedError::InvalidParameter(format!(
                    "kernel matrix is not symmetric at ({i},{j})"
                )));
            }
        }
    }
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| v.row(i).sum() / nf).collect();
    let col_means: Vec<f64> = (0..n).map(|j| v.column(j).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    Ok(DMatrix::from_fn(n, n, |i, j| v[(i, j)] - row_means[i] - col_means[j] + grand))
}

/// Fits the detector on normal-only features and sets the threshold to the
/// largest training score.
pub fn fit(features: &[FeatureVector], hyper: &KpcaHyper) -> Result<KpcaModel> {
    hyper.validate()?;
    let n = features.len();
    if n < 2 {
        return Err(AedError::NoTrainingData(format!(
            "kernel PCA needs at least 2 training features, got {n}"
        )));
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|f| f.len() != dim) {
        return Err(AedError::dims(format!("feature length {dim}"), format!("feature length {}", bad.len())));
    }

    let v = kernel_matrix(features, hyper.sigma);
    let nf = n as f64;
    let col_means: Vec<f64> = (0..n).map(|i| v.row(i).sum() / nf).collect();
    let grand_mean = col_means.iter().sum::<f64>() / nf;
    let centered = center_kernel(&v)?;

    let eig = SymmetricEigen::try_new(centered, f64::EPSILON, 0)
        .ok_or_else(|| AedError::EigenSolver("centered kernel matrix did not converge".into()))?;
    let order = descending_order(eig.eigenvalues.as_slice());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let min = *values.last().expect("n >= 2");
    if min < -PSD_TOL {
        return Err(AedError::NotPsd { min_eigenvalue: min });
    }
    let top = values[0];
    let rank = if top > 0.0 {
        values.iter().take_while(|&&l| l > RANK_RTOL * top).count()
    } else {
        0
    };
    if rank == 0 {
        return Err(AedError::DegenerateInput(
            "training features are identical in kernel space; achievable maximum q is 0".into(),
        ));
    }
    if hyper.q > rank {
        return Err(AedError::RankExceeded { requested: hyper.q, max: rank });
    }

    let mut alphas = Vec::with_capacity(hyper.q);
    let mut lambdas = Vec::with_capacity(hyper.q);
    for &idx in order.iter().take(hyper.q) {
        let lambda = eig.eigenvalues[idx];
        let scale = lambda.sqrt().recip();
        alphas.push(eig.eigenvectors.column(idx).iter().map(|a| a * scale).collect());
        lambdas.push(lambda);
    }

    let mut model = KpcaModel {
        features: features.to_vec(),
        sigma: hyper.sigma,
        alphas,
        lambdas,
        col_means,
        grand_mean,
        threshold: 0.0,
        rank,
    };
    let scores = (0..n)
        .into_par_iter()
        .map(|k| model.score_row(v.row(k).transpose().as_slice()))
        .collect::<Result<Vec<f64>>>()?;
    model.threshold = scores.into_iter().fold(0.0, f64::max);
    Ok(model)
}

/// Coordinates of the centered mapped sample along each retained direction.
pub fn project(model: &KpcaModel, z: &FeatureVector) -> Result<Vec<f64>> {
    model.check_len(z.as_slice())?;
    Ok(model.project_row(&model.kernel_row(z.as_slice())))
}

/// Squared residual of the centered mapped sample after projection.
pub fn reconstruction_error(model: &KpcaModel, z: &FeatureVector) -> Result<f64> {
    model.check_len(z.as_slice())?;
    model.score_row(&model.kernel_row(z.as_slice()))
}

/// Anomaly iff the score is strictly above the training maximum.
pub fn classify(model: &KpcaModel, z: &FeatureVector) -> Result<Classification> {
    let score = reconstruction_error(model, z)?;
    let status = if score > model.threshold {
        Status::Anomaly
    } else {
        Status::Normal
    };
    Ok(Classification { status, score })
}

/// Scores many samples in parallel, results in input order.
pub fn reconstruction_errors(model: &KpcaModel, zs: &[FeatureVector]) -> Result<Vec<f64>> {
    zs.par_iter().map(|z| reconstruction_error(model, z)).collect()
}
