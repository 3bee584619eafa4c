//! Principal component analysis via covariance eigendecomposition.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::{orient_largest_positive, symmetric_eigen_desc};
use crate::matrix::{dot, DataMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// N_r × N, row k is the weight vector of component k.
    pub components: DataMatrix,
    /// Per-feature training means.
    pub mean: Vec<f64>,
    /// Share of total variance carried by each retained component.
    pub explained_variance_ratio: Vec<f64>,
}

/// Full eigen-spectrum of the sample covariance, as variance ratios summing to 1.
#[derive(Debug, Clone)]
pub struct PcaSpectrum {
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    vectors: DMatrix<f64>,
    mean: Vec<f64>,
}

impl PcaSpectrum {
    pub fn compute(data: &DataMatrix) -> Result<Self> {
        if data.rows() < 2 {
            return Err(Error::InvalidInput(format!(
                "PCA needs at least 2 rows, got {}",
                data.rows()
            )));
        }
        let n = data.cols();
        let mean = data.column_means();
        let mut cov = DMatrix::<f64>::zeros(n, n);
        let mut centered = vec![0.0; n];
        for row in data.iter_rows() {
            for ((c, x), m) in centered.iter_mut().zip(row).zip(&mean) {
                *c = x - m;
            }
            for i in 0..n {
                let ci = centered[i];
                if ci == 0.0 {
                    continue;
                }
                for j in i..n {
                    cov[(i, j)] += ci * centered[j];
                }
            }
        }
        let denom = (data.rows() - 1) as f64;
        for i in 0..n {
            for j in i..n {
                let v = cov[(i, j)] / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
        if cov.iter().all(|v| *v == 0.0) {
            return Err(Error::Degenerate(
                "covariance is the zero matrix; all components are tied".into(),
            ));
        }
        let (eigenvalues, vectors) = symmetric_eigen_desc(cov);
        // round-off can leave tiny negative eigenvalues on rank-deficient data
        let clipped: Vec<f64> = eigenvalues.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let ratios = clipped.iter().map(|v| v / total).collect();
        Ok(Self {
            eigenvalues,
            ratios,
            vectors,
            mean,
        })
    }

    /// Smallest number of leading components whose cumulative variance
    /// ratio reaches `threshold`.
    pub fn components_for_variance(&self, threshold: f64) -> usize {
        let mut cumulative = 0.0;
        for (i, r) in self.ratios.iter().enumerate() {
            cumulative += r;
            if cumulative >= threshold {
                return i + 1;
            }
        }
        self.ratios.len()
    }

    pub fn into_model(self, n_components: usize) -> Result<PcaModel> {
        let n = self.mean.len();
        if n_components == 0 || n_components > n {
            return Err(Error::InvalidInput(format!(
                "n_components must be in 1..={n}, got {n_components}"
            )));
        }
        let mut values = Vec::with_capacity(n_components * n);
        for k in 0..n_components {
            let mut row: Vec<f64> = self.vectors.column(k).iter().copied().collect();
            orient_largest_positive(&mut row);
            values.extend(row);
        }
        Ok(PcaModel {
            components: DataMatrix::new(n_components, n, values)?,
            mean: self.mean,
            explained_variance_ratio: self.ratios[..n_components].to_vec(),
        })
    }
}

pub fn pca_fit(data: &DataMatrix, n_components: usize) -> Result<PcaModel> {
    if n_components == 0 || n_components > data.cols() {
        return Err(Error::InvalidInput(format!(
            "n_components must be in 1..={}, got {n_components}",
            data.cols()
        )));
    }
    PcaSpectrum::compute(data)?.into_model(n_components)
}

impl PcaModel {
    pub fn input_dims(&self) -> usize {
        self.mean.len()
    }

    pub fn reduced_dims(&self) -> usize {
        self.components.rows()
    }

    /// `components · (x − mean)`
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("PCA input", self.input_dims(), x.len())?;
        check_finite("PCA input", x)?;
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        Ok(self.components.mul_vec(&centered))
    }

    /// `componentsᵀ · x_reduced + mean`
    pub fn inverse(&self, x_reduced: &[f64]) -> Result<Vec<f64>> {
        check_len("PCA reduced input", self.reduced_dims(), x_reduced.len())?;
        check_finite("PCA reduced input", x_reduced)?;
        let mut out = self.components.tr_mul_vec(x_reduced);
        out.iter_mut().zip(&self.mean).for_each(|(o, m)| *o += m);
        Ok(out)
    }

    pub fn cumulative_variance(&self) -> f64 {
        self.explained_variance_ratio.iter().sum()
    }

    pub(crate) fn transform_unchecked(&self, x: &[f64], out: &mut [f64]) {
        let centered: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        for (o, row) in out.iter_mut().zip(self.components.iter_rows()) {
            *o = dot(row, &centered);
        }
    }
}
