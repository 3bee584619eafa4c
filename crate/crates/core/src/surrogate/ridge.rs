//! Closed-form sample-weighted ridge regression with an unpenalized intercept.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, check_len, Error, Result};
use crate::linalg::symmetric_eigen_desc;
use crate::matrix::{dot, DataMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFit {
    pub slope: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
    /// Set when α = 0 and the weighted design was rank deficient, in which
    /// case `slope` is the least-norm solution.
    pub rank_deficient: bool,
}

impl RidgeFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        dot(&self.slope, x) + self.intercept
    }
}

enum Solver {
    Cholesky(Cholesky<f64, Dyn>),
    PseudoInverse(DMatrix<f64>),
}

/// Factored normal equations `(X_cᵀ Λ X_c + αI) w = X_cᵀ Λ t_c` for a fixed
/// design and weights, reusable across targets.
pub struct RidgeSystem {
    center: Vec<f64>,
    /// sqrt(λ_j)·(x_j − x̄), row-major M × N
    scaled: DMatrix<f64>,
    sqrt_weights: Vec<f64>,
    weights: Vec<f64>,
    weight_sum: f64,
    alpha: f64,
    solver: Solver,
    rank_deficient: bool,
}

/// λ-weighted mean computed as an offset from the first value, so a constant
/// column has a mean exactly equal to that constant.
fn weighted_mean(values: &[f64], weights: &[f64], weight_sum: f64) -> f64 {
    let Some(&origin) = values.first() else {
        return 0.0;
    };
    let shift: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * (v - origin))
        .sum();
    origin + shift / weight_sum
}

impl RidgeSystem {
    pub fn new(x: &DataMatrix, weights: &[f64], alpha: f64) -> Result<Self> {
        let m = x.rows();
        let n = x.cols();
        check_len("sample weights", m, weights.len())?;
        if m < 2 {
            return Err(Error::InsufficientNeighborhood { size: m });
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidInput(
                "sample weights must be finite and positive".into(),
            ));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        let weight_sum: f64 = weights.iter().sum();
        let center: Vec<f64> = (0..n)
            .map(|j| weighted_mean(&x.column(j), weights, weight_sum))
            .collect();
        let sqrt_weights: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let mut scaled = DMatrix::<f64>::zeros(m, n);
        for (i, row) in x.iter_rows().enumerate() {
            for j in 0..n {
                scaled[(i, j)] = sqrt_weights[i] * (row[j] - center[j]);
            }
        }
        let mut gram = scaled.tr_mul(&scaled);
        for j in 0..n {
            gram[(j, j)] += alpha;
        }

        let (solver, rank_deficient) = if alpha > 0.0 {
            match Cholesky::new(gram.clone()) {
                Some(c) => (Solver::Cholesky(c), false),
                None => (Solver::PseudoInverse(pseudo_inverse(gram).0), false),
            }
        } else {
            let (pinv, rank) = pseudo_inverse(gram);
            (Solver::PseudoInverse(pinv), rank < n)
        };

        Ok(Self {
            center,
            scaled,
            sqrt_weights,
            weights: weights.to_vec(),
            weight_sum,
            alpha,
            solver,
            rank_deficient,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    pub fn fit(&self, target: &[f64]) -> Result<RidgeFit> {
        check_len("target", self.weights.len(), target.len())?;
        check_finite("target", target)?;
        let t_mean = weighted_mean(target, &self.weights, self.weight_sum);
        let scaled_t: Vec<f64> = target
            .iter()
            .zip(&self.sqrt_weights)
            .map(|(t, s)| s * (t - t_mean))
            .collect();
        let rhs = self.scaled.tr_mul(&DVector::from_vec(scaled_t));
        let slope = match &self.solver {
            Solver::Cholesky(c) => c.solve(&rhs),
            Solver::PseudoInverse(p) => p * rhs,
        };
        let slope: Vec<f64> = slope.iter().copied().collect();
        let intercept = t_mean - dot(&slope, &self.center);
        Ok(RidgeFit {
            slope,
            intercept,
            alpha: self.alpha,
            rank_deficient: self.rank_deficient,
        })
    }
}

/// Pseudo-inverse of a symmetric PSD matrix and its numerical rank.
fn pseudo_inverse(m: DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let n = m.nrows();
    let (values, vectors) = symmetric_eigen_desc(m);
    let tolerance = values.first().copied().unwrap_or(0.0).max(0.0) * n as f64 * f64::EPSILON;
    let mut pinv = DMatrix::<f64>::zeros(n, n);
    let mut rank = 0;
    for (k, &l) in values.iter().enumerate() {
        if l <= tolerance {
            continue;
        }
        rank += 1;
        let v = vectors.column(k);
        pinv += (v * v.transpose()) / l;
    }
    (pinv, rank)
}

/// Minimizes `Σ_j λ_j (w·x_j + c − t_j)² + α‖w‖²`; the intercept is not penalized.
pub fn weighted_ridge(
    x: &DataMatrix,
    target: &[f64],
    weights: &[f64],
    alpha: f64,
) -> Result<RidgeFit> {
    RidgeSystem::new(x, weights, alpha)?.fit(target)
}
