//! Attribution for linear predictors trained on reduced data, and what-if
//! feature tweaks that re-project through the true reducer.

use serde::{Deserialize, Serialize};

use crate::dr::Reducer;
use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::{dot, DataMatrix};
use crate::surrogate::{weighted_ridge, Explanation};

/// Unweighted ridge regression fitted on reduced features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgePredictor {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub alpha: f64,
}

impl RidgePredictor {
    pub fn predict(&self, x_reduced: &[f64]) -> Result<f64> {
        check_len("predictor input", self.coefficients.len(), x_reduced.len())?;
        Ok(dot(&self.coefficients, x_reduced) + self.intercept)
    }
}

pub fn ridge_predictor_fit(
    x_reduced: &DataMatrix,
    y: &[f64],
    alpha: f64,
) -> Result<RidgePredictor> {
    check_len("target", x_reduced.rows(), y.len())?;
    let fit = weighted_ridge(x_reduced, y, &vec![1.0; y.len()], alpha)?;
    Ok(RidgePredictor {
        coefficients: fit.slope,
        intercept: fit.intercept,
        alpha,
    })
}

/// Per-component contributions `coef ⊙ x'`.
pub fn local_attribution(predictor: &RidgePredictor, x_reduced: &[f64]) -> Result<Vec<f64>> {
    check_len(
        "reduced instance",
        predictor.coefficients.len(),
        x_reduced.len(),
    )?;
    check_finite("reduced instance", x_reduced)?;
    Ok(predictor
        .coefficients
        .iter()
        .zip(x_reduced)
        .map(|(c, x)| c * x)
        .collect())
}

/// Maps reduced-space attributions to original features: `attrᵀ · slopes`.
pub fn propagate_to_original(attr: &[f64], explanation: &Explanation) -> Result<Vec<f64>> {
    check_len("attribution", explanation.reduced_dims(), attr.len())?;
    check_finite("attribution", attr)?;
    Ok(explanation.slopes.tr_mul_vec(attr))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalAttribution {
    #[serde(rename = "reduced")]
    pub reduced_contribution: Vec<f64>,
    #[serde(rename = "original")]
    pub original_contribution: Vec<f64>,
    pub model_coefficients: Vec<f64>,
    pub prediction: f64,
}

impl LocalAttribution {
    pub fn compute(
        predictor: &RidgePredictor,
        x_reduced: &[f64],
        explanation: &Explanation,
    ) -> Result<Self> {
        let reduced = local_attribution(predictor, x_reduced)?;
        let original = propagate_to_original(&reduced, explanation)?;
        Ok(Self {
            reduced_contribution: reduced,
            original_contribution: original,
            model_coefficients: predictor.coefficients.clone(),
            prediction: predictor.predict(x_reduced)?,
        })
    }

    /// Index of the original feature with the most negative contribution.
    pub fn most_negative_feature(&self) -> Option<usize> {
        self.original_contribution
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub feature: usize,
    pub old_value: f64,
    pub new_value: f64,
    #[serde(rename = "before")]
    pub x_reduced_before: Vec<f64>,
    #[serde(rename = "after")]
    pub x_reduced_after: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_before: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction_after: Option<f64>,
}

/// Overwrites one feature of `x` and projects both versions through `dr`.
pub fn whatif_tweak<R: Reducer + ?Sized>(
    dr: &R,
    predictor: Option<&RidgePredictor>,
    x: &[f64],
    feature: usize,
    new_value: f64,
) -> Result<WhatIf> {
    check_len("instance", dr.input_dims(), x.len())?;
    if feature >= x.len() {
        return Err(Error::IndexOutOfRange {
            what: "feature",
            index: feature,
            len: x.len(),
        });
    }
    if !new_value.is_finite() {
        return Err(Error::NonFinite("tweak value"));
    }
    let mut tweaked = x.to_vec();
    tweaked[feature] = new_value;
    let before = dr.transform(x)?;
    let after = dr.transform(&tweaked)?;
    let (prediction_before, prediction_after) = match predictor {
        Some(p) => (Some(p.predict(&before)?), Some(p.predict(&after)?)),
        None => (None, None),
    };
    Ok(WhatIf {
        feature,
        old_value: x[feature],
        new_value,
        x_reduced_before: before,
        x_reduced_after: after,
        prediction_before,
        prediction_after,
    })
}
