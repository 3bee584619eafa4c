//! The two end-to-end pipelines: attribution for a regressor trained on
//! reduced data, and explaining an outlier in a 2-D kernel PCA embedding.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attribution::{
    ridge_predictor_fit, whatif_tweak, LocalAttribution, RidgePredictor, WhatIf,
};
use crate::data::{
    load_bundled, standardize, train_test_indices, BundledDataset, Dataset, SplitSpec,
};
use crate::dr::{DrKind, FitParams, FittedDR, Reducer};
use crate::error::{Error, Result};
use crate::evaluation::{instance_difference, weights_difference};
use crate::neighborhood::NgConfig;
use crate::surrogate::{lxdr_explain, Explanation, LxdrConfig};

#[derive(Debug, Clone, Serialize)]
pub struct RegressionCase {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub test_mae: f64,
    pub predictor: RidgePredictor,
    /// Dataset row of the explained instance (drawn from the test split).
    pub instance_row: usize,
    pub x_reduced: Vec<f64>,
    pub explanation: Explanation,
    pub attribution: LocalAttribution,
    pub weights_difference: f64,
    pub instance_difference: f64,
    /// Feature with the most negative propagated contribution.
    pub feature: usize,
    pub tweak: WhatIf,
    #[serde(skip)]
    pub reducer: FittedDR,
}

#[derive(Debug, Clone)]
pub struct RegressionSettings {
    pub split: SplitSpec,
    pub n_components: usize,
    pub predictor_alpha: f64,
    pub k: usize,
    /// Seed of the uniform pick of the explained test instance.
    pub instance_seed: u64,
    /// Standardize every feature over the full dataset before splitting.
    pub standardize: bool,
    /// Explain this dataset row instead of a seeded test-split pick.
    pub instance_row: Option<usize>,
}

impl Default for RegressionSettings {
    fn default() -> Self {
        Self {
            split: SplitSpec::default(),
            n_components: 8,
            predictor_alpha: 1.0,
            k: 150,
            instance_seed: 42,
            standardize: true,
            instance_row: None,
        }
    }
}

fn column_means(d: &Dataset) -> Vec<f64> {
    d.features.column_means()
}

/// PCA on the training split, ridge on the reduced training data, then an
/// explanation of one test instance, its propagated attribution, and a tweak
/// of its most negatively contributing feature to the training mean.
///
/// With `standardize` on, the ridge penalty acts on component scores of
/// order one; on the raw bundled scale (feature variance 1/442) the same
/// α = 1 shrinks the minor components almost to zero.
pub fn diabetes_regression_case(settings: &RegressionSettings) -> Result<RegressionCase> {
    let data = load_bundled(BundledDataset::Diabetes)?;
    regression_case(&data, settings)
}

pub fn regression_case(data: &Dataset, settings: &RegressionSettings) -> Result<RegressionCase> {
    let standardized;
    let data = if settings.standardize {
        standardized = standardize(data)?.0;
        &standardized
    } else {
        data
    };
    data.target
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("regression case needs a target column".into()))?;
    let (train_rows, test_rows) = train_test_indices(data.rows(), settings.split)?;
    let train = data.select_rows(&train_rows);
    let test = data.select_rows(&test_rows);

    let reducer = FittedDR::fit(
        &train.features,
        &FitParams::new(DrKind::Pca, settings.n_components, settings.split.seed),
    )?;
    let train_reduced = reducer.transform_batch(&train.features)?;
    let train_target = train.target.as_ref().expect("split keeps the target");
    let predictor = ridge_predictor_fit(&train_reduced, train_target, settings.predictor_alpha)?;

    let test_reduced = reducer.transform_batch(&test.features)?;
    let test_target = test.target.as_ref().expect("split keeps the target");
    let mut abs_error = 0.0;
    for (row, y) in test_reduced.iter_rows().zip(test_target) {
        abs_error += (predictor.predict(row)? - y).abs();
    }
    let test_mae = abs_error / test_rows.len() as f64;

    let instance_row = match settings.instance_row {
        Some(row) => row,
        None => {
            test_rows
                [ChaCha8Rng::seed_from_u64(settings.instance_seed).random_range(0..test_rows.len())]
        }
    };
    let x = data.features.get_row(instance_row)?;

    let config = LxdrConfig::new(NgConfig::knn(settings.k), true);
    let explanation = lxdr_explain(&reducer, &train.features, x, &config)?;
    let x_reduced = reducer.transform(x)?;
    let attribution = LocalAttribution::compute(&predictor, &x_reduced, &explanation)?;
    let feature = attribution
        .most_negative_feature()
        .ok_or_else(|| Error::Degenerate("empty attribution".into()))?;
    let mean = column_means(&train)[feature];
    let tweak = whatif_tweak(&reducer, Some(&predictor), x, feature, mean)?;

    let reference = reducer.intrinsic_weights().expect("PCA has weights");
    let weights_difference = weights_difference(&explanation, reference)?.value;
    let instance_difference = instance_difference(&reducer, &explanation, x)?.value;

    Ok(RegressionCase {
        train_rows,
        test_rows,
        test_mae,
        predictor,
        instance_row,
        x_reduced,
        explanation,
        attribution,
        weights_difference,
        instance_difference,
        feature,
        tweak,
        reducer,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OutlierCase {
    /// Dataset row with the largest |component 1|.
    pub row: usize,
    pub x_reduced: Vec<f64>,
    pub explanation: Explanation,
    /// Feature with the largest component-1 slope.
    pub feature: usize,
    pub tweak: WhatIf,
    #[serde(skip)]
    pub reducer: FittedDR,
}

/// Two-component RBF kernel PCA on Diabetes; explains the point farthest out
/// along component 1 and moves its highest-weighted feature to the mean.
pub fn diabetes_outlier_case(seed: u64) -> Result<OutlierCase> {
    let data = load_bundled(BundledDataset::Diabetes)?;
    outlier_case(&data, seed)
}

pub fn outlier_case(data: &Dataset, seed: u64) -> Result<OutlierCase> {
    let reducer = FittedDR::fit(&data.features, &FitParams::new(DrKind::KpcaRbf, 2, seed))?;
    let embedding = reducer.transform_batch(&data.features)?;
    let row = embedding
        .iter_rows()
        .enumerate()
        .max_by(|a, b| a.1[0].abs().total_cmp(&b.1[0].abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Degenerate("empty dataset".into()))?;
    let x = data.features.row(row);
    let explanation = lxdr_explain(
        &reducer,
        &data.features,
        x,
        &LxdrConfig::new(NgConfig::default(), true),
    )?;
    let feature = explanation
        .slopes
        .row(0)
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(j, _)| j)
        .expect("at least one feature");
    let mean = column_means(data)[feature];
    let tweak = whatif_tweak(&reducer, None, x, feature, mean)?;
    Ok(OutlierCase {
        row,
        x_reduced: embedding.row(row).to_vec(),
        explanation,
        feature,
        tweak,
        reducer,
    })
}
