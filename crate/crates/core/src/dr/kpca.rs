//! RBF kernel PCA with out-of-sample projection.
//!
//! The training kernel matrix is double-centered before eigendecomposition.
//! New points are centered with the stored row means and grand mean of the
//! uncentered training kernel, so projecting a training row out-of-sample
//! reproduces its in-sample coordinates.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{orient_largest_positive, symmetric_eigen_desc};
use crate::matrix::{squared_distance, DataMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpcaModel {
    /// Support data, M × N.
    pub training_rows: DataMatrix,
    pub gamma: f64,
    /// M × N_r; column j is eigenvector j divided by sqrt(λ_j).
    pub alphas: DataMatrix,
    pub kernel_row_means: Vec<f64>,
    pub kernel_grand_mean: f64,
    /// Retained eigenvalues of the centered kernel matrix.
    pub eigenvalues: Vec<f64>,
}

#[inline]
fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Fits RBF kernel PCA. `gamma` defaults to `1 / n_features`.
pub fn kpca_fit(data: &DataMatrix, n_components: usize, gamma: Option<f64>) -> Result<KpcaModel> {
    let m = data.rows();
    if n_components == 0 || n_components > m {
        return Err(Error::InvalidInput(format!(
            "n_components must be in 1..={m}, got {n_components}"
        )));
    }
    let gamma = gamma.unwrap_or(1.0 / data.cols() as f64);
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }

    let mut kernel = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        kernel[(i, i)] = 1.0;
        for j in (i + 1)..m {
            let k = rbf(gamma, data.row(i), data.row(j));
            kernel[(i, j)] = k;
            kernel[(j, i)] = k;
        }
    }
    let row_means: Vec<f64> = (0..m).map(|i| kernel.row(i).sum() / m as f64).collect();
    let grand_mean = row_means.iter().sum::<f64>() / m as f64;
    for i in 0..m {
        for j in 0..m {
            kernel[(i, j)] += grand_mean - row_means[i] - row_means[j];
        }
    }

    let (eigenvalues, vectors) = symmetric_eigen_desc(kernel);
    let tolerance = eigenvalues[0].max(0.0) * m as f64 * f64::EPSILON;
    let achievable = eigenvalues.iter().take_while(|&&l| l > tolerance).count();
    if achievable < n_components {
        return Err(Error::InsufficientComponents {
            requested: n_components,
            achievable,
        });
    }

    let mut alphas = DataMatrix::zeros(m, n_components);
    for (j, lambda) in eigenvalues.iter().enumerate().take(n_components) {
        let mut v: Vec<f64> = vectors.column(j).iter().copied().collect();
        orient_largest_positive(&mut v);
        let scale = lambda.sqrt();
        for (i, vi) in v.into_iter().enumerate() {
            alphas.set(i, j, vi / scale);
        }
    }

    Ok(KpcaModel {
        training_rows: data.clone(),
        gamma,
        alphas,
        kernel_row_means: row_means,
        kernel_grand_mean: grand_mean,
        eigenvalues: eigenvalues[..n_components].to_vec(),
    })
}

impl KpcaModel {
    pub fn input_dims(&self) -> usize {
        self.training_rows.cols()
    }

    pub fn reduced_dims(&self) -> usize {
        self.alphas.cols()
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("KPCA input", self.input_dims(), x.len())?;
        check_finite("KPCA input", x)?;
        let mut out = vec![0.0; self.reduced_dims()];
        self.transform_unchecked(x, &mut out);
        Ok(out)
    }

    pub(crate) fn transform_unchecked(&self, x: &[f64], out: &mut [f64]) {
        let m = self.training_rows.rows();
        let mut k: Vec<f64> = self
            .training_rows
            .iter_rows()
            .map(|t| rbf(self.gamma, x, t))
            .collect();
        let k_mean = k.iter().sum::<f64>() / m as f64;
        for (ki, ri) in k.iter_mut().zip(&self.kernel_row_means) {
            *ki = *ki - k_mean - ri + self.kernel_grand_mean;
        }
        out.iter_mut().for_each(|o| *o = 0.0);
        for (ki, alpha_row) in k.iter().zip(self.alphas.iter_rows()) {
            for (o, a) in out.iter_mut().zip(alpha_row) {
                *o += ki * a;
            }
        }
    }

    /// In-sample projections of the training rows, `K̃ · alphas`.
    pub fn training_projections(&self) -> DataMatrix {
        let mut out = DataMatrix::zeros(self.training_rows.rows(), self.reduced_dims());
        for i in 0..self.training_rows.rows() {
            self.transform_unchecked(self.training_rows.row(i), out.row_mut(i));
        }
        out
    }
}
