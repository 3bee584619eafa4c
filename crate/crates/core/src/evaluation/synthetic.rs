use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_features: usize,
    pub eigen_decay: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub const FEATURE_COUNTS: std::ops::RangeInclusive<usize> = 10..=250;

    pub fn new(n_features: usize, seed: u64) -> Self {
        Self {
            n_rows: 1000,
            n_features,
            eigen_decay: 0.8,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n_features.is_multiple_of(10) || !Self::FEATURE_COUNTS.contains(&self.n_features) {
            return Err(Error::InvalidInput(format!(
                "n_features must be a multiple of 10 in 10..=250, got {}",
                self.n_features
            )));
        }
        if !(self.eigen_decay > 0.0 && self.eigen_decay < 1.0) {
            return Err(Error::InvalidInput(format!(
                "eigen_decay must be in (0, 1), got {}",
                self.eigen_decay
            )));
        }
        if self.n_rows < 2 {
            return Err(Error::InvalidInput("n_rows must be at least 2".into()));
        }
        Ok(())
    }
}

/// All 25 feature counts 10, 20, …, 250.
pub fn synthetic_feature_counts() -> Vec<usize> {
    SyntheticSpec::FEATURE_COUNTS.step_by(10).collect()
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    // row-major fill so the stream order does not depend on storage layout
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
    m
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs fixed so that R has a positive diagonal.
fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian(n, n, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `X = Z · Qᵀ · diag(s) · Q'` with `Z` standard normal and `s_j = decay^j`.
pub fn synthetic_dataset(spec: &SyntheticSpec) -> Result<DataMatrix> {
    spec.validate()?;
    let f = spec.n_features;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let q = random_orthogonal(f, &mut rng);
    let q_prime = random_orthogonal(f, &mut rng);
    let z = gaussian(spec.n_rows, f, &mut rng);
    let mut mixing = q.transpose();
    for j in 0..f {
        let s = spec.eigen_decay.powi(j as i32);
        mixing.column_mut(j).scale_mut(s);
    }
    let x = z * (mixing * q_prime);
    DataMatrix::from_nalgebra(&x)
}
