use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dr::Reducer;
use crate::error::{check_finite, check_len, Error, Result};
use crate::matrix::DataMatrix;
use crate::surrogate::{explanation_predict, Explanation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InstanceDifference,
    WeightsDifference,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::InstanceDifference => "instance_difference",
            Metric::WeightsDifference => "weights_difference",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub metric: Metric,
    pub value: f64,
    /// `100 · value`, for display.
    pub scaled_value: f64,
}

impl MetricResult {
    pub fn new(metric: Metric, value: f64) -> Self {
        Self {
            metric,
            value,
            scaled_value: value * 100.0,
        }
    }
}

/// `sqrt(Σ (y_i − ŷ_i)²)`
pub fn euclidean_distance(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_len("distance operand", y.len(), y_hat.len())?;
    check_finite("distance operand", y)?;
    check_finite("distance operand", y_hat)?;
    Ok(y.iter()
        .zip(y_hat)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Distance between the surrogate's reduction of `x` and the reducer's own.
pub fn instance_difference<R: Reducer + ?Sized>(
    dr: &R,
    e: &Explanation,
    x: &[f64],
) -> Result<MetricResult> {
    check_len(
        "explanation reduced dims",
        dr.reduced_dims(),
        e.reduced_dims(),
    )?;
    let surrogate = explanation_predict(e, x)?;
    let truth = dr.transform(x)?;
    Ok(MetricResult::new(
        Metric::InstanceDifference,
        euclidean_distance(&surrogate, &truth)?,
    ))
}

/// Distance between flattened slope matrices; intercepts do not enter.
pub fn weights_difference(e: &Explanation, reference: &DataMatrix) -> Result<MetricResult> {
    if e.slopes.rows() != reference.rows() || e.slopes.cols() != reference.cols() {
        return Err(Error::Shape {
            what: "reference weights",
            expected: e.slopes.rows() * e.slopes.cols(),
            found: reference.rows() * reference.cols(),
        });
    }
    let d = euclidean_distance(e.slopes.as_slice(), reference.as_slice())?;
    Ok(MetricResult::new(Metric::WeightsDifference, d))
}
