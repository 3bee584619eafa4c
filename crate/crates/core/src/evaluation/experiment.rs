use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{load_bundled, rescale_unit_range, subsample, BundledDataset};
use crate::dr::{DrKind, FitParams, FittedDR, PcaSpectrum};
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::neighborhood::NgConfig;
use crate::par::{map_range, Execution};
use crate::surrogate::{gxdr_explain, lxdr_explain, Explanation, LxdrConfig, DEFAULT_ALPHA};

use super::metrics::{instance_difference, weights_difference, Metric};
use super::synthetic::{synthetic_dataset, synthetic_feature_counts, SyntheticSpec};

pub const CSV_HEADER: &str =
    "dataset,dr_method,explainer,n_features,n_reduced,k,metric,mean_value,mean_value_x100,mean_seconds,n_failures";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Explainer {
    #[serde(rename = "LXDR")]
    Lxdr,
    #[serde(rename = "GXDR")]
    Gxdr,
}

impl Explainer {
    pub fn as_str(self) -> &'static str {
        match self {
            Explainer::Lxdr => "LXDR",
            Explainer::Gxdr => "GXDR",
        }
    }
}

/// One aggregated cell of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub dataset: String,
    pub dr_method: DrKind,
    pub explainer: Explainer,
    pub n_features: usize,
    pub n_reduced: usize,
    /// Neighborhood size; 0 for the global explainer.
    pub k: usize,
    pub metric: Metric,
    /// Mean over successful instances; `None` when every instance failed.
    pub mean_value: Option<f64>,
    /// Mean wall-clock seconds per explanation; `None` when timing is off.
    pub mean_seconds: Option<f64>,
    pub n_instances: usize,
    pub n_failures: usize,
}

impl ReportRow {
    pub fn mean_value_x100(&self) -> Option<f64> {
        self.mean_value.map(|v| v * 100.0)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentReport {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn find(
        &self,
        dataset: &str,
        dr_method: DrKind,
        explainer: Explainer,
        k: Option<usize>,
        metric: Metric,
    ) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.dataset == dataset
                && r.dr_method == dr_method
                && r.explainer == explainer
                && k.is_none_or(|k| r.k == k)
                && r.metric == metric
        })
    }

    /// Header plus one line per row. Floats use the shortest representation
    /// that round-trips, so equal reports give byte-identical text.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.dataset,
                r.dr_method.label(),
                r.explainer.as_str(),
                r.n_features,
                r.n_reduced,
                r.k,
                r.metric,
                opt(r.mean_value),
                opt(r.mean_value_x100()),
                opt(r.mean_seconds),
                r.n_failures
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    pub seed: u64,
    /// Off gives reports whose CSV is byte-identical across runs.
    pub record_timing: bool,
    pub execution: Execution,
    pub auto_alpha: bool,
    pub gxdr_alpha: f64,
    pub epochs: usize,
}

impl ExperimentOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            record_timing: true,
            execution: Execution::default(),
            auto_alpha: true,
            gxdr_alpha: DEFAULT_ALPHA,
            epochs: FitParams::DEFAULT_EPOCHS,
        }
    }
}

/// A dataset prepared for the table experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDataset {
    pub name: String,
    /// Instances to explain; reducers and the global explainer are fitted here.
    pub data: DataMatrix,
    /// Where neighbors are drawn from; `None` means `data`.
    pub pool: Option<DataMatrix>,
    pub k_values: Vec<usize>,
    pub n_reduced: usize,
    /// Rows of `data` to explain; `None` means all of them.
    pub instances: Option<Vec<usize>>,
}

impl TableDataset {
    pub fn pool(&self) -> &DataMatrix {
        self.pool.as_ref().unwrap_or(&self.data)
    }

    pub fn instance_rows(&self) -> Vec<usize> {
        self.instances
            .clone()
            .unwrap_or_else(|| (0..self.data.rows()).collect())
    }
}

/// Iris (K 50, 3 dims), Diabetes (K 150, 8 dims) and a seeded 449-row Digits
/// subset (K 750 over all 1797 rows, 25 dims, pixels scaled to [0, 1]).
pub fn table_datasets(seed: u64) -> Result<Vec<TableDataset>> {
    let iris = load_bundled(BundledDataset::Iris)?;
    let diabetes = load_bundled(BundledDataset::Diabetes)?;
    let (digits, _) = rescale_unit_range(&load_bundled(BundledDataset::Digits)?)?;
    let digits_subset = subsample(&digits, 0.25, seed)?;
    Ok(vec![
        TableDataset {
            name: "iris".into(),
            data: iris.features,
            pool: None,
            k_values: vec![50],
            n_reduced: 3,
            instances: None,
        },
        TableDataset {
            name: "diabetes".into(),
            data: diabetes.features,
            pool: None,
            k_values: vec![150],
            n_reduced: 8,
            instances: None,
        },
        TableDataset {
            name: "digits".into(),
            data: digits_subset.features,
            pool: Some(digits.features),
            k_values: vec![750],
            n_reduced: 25,
            instances: None,
        },
    ])
}

struct InstanceOutcome {
    instance: f64,
    weights: Option<f64>,
    seconds: f64,
}

#[derive(Default)]
struct Accumulator {
    instance_sum: f64,
    weights_sum: f64,
    seconds_sum: f64,
    successes: usize,
    failures: usize,
}

impl Accumulator {
    fn collect(outcomes: Vec<Result<InstanceOutcome>>) -> Self {
        let mut acc = Self::default();
        // summed in instance order, independent of scheduling
        for o in outcomes {
            match o {
                Ok(o) => {
                    acc.instance_sum += o.instance;
                    acc.weights_sum += o.weights.unwrap_or(0.0);
                    acc.seconds_sum += o.seconds;
                    acc.successes += 1;
                }
                Err(_) => acc.failures += 1,
            }
        }
        acc
    }

    fn mean(&self, sum: f64) -> Option<f64> {
        (self.successes > 0).then(|| sum / self.successes as f64)
    }
}

struct Cell<'a> {
    dataset: &'a str,
    dr_method: DrKind,
    explainer: Explainer,
    n_features: usize,
    n_reduced: usize,
    k: usize,
}

fn push_rows(
    rows: &mut Vec<ReportRow>,
    cell: Cell<'_>,
    acc: &Accumulator,
    with_weights: bool,
    timing: bool,
) {
    let mut metrics = vec![(Metric::InstanceDifference, acc.instance_sum)];
    if with_weights {
        metrics.push((Metric::WeightsDifference, acc.weights_sum));
    }
    for (metric, sum) in metrics {
        rows.push(ReportRow {
            dataset: cell.dataset.to_string(),
            dr_method: cell.dr_method,
            explainer: cell.explainer,
            n_features: cell.n_features,
            n_reduced: cell.n_reduced,
            k: cell.k,
            metric,
            mean_value: acc.mean(sum),
            mean_seconds: if timing {
                acc.mean(acc.seconds_sum).or(Some(0.0))
            } else {
                None
            },
            n_instances: acc.successes + acc.failures,
            n_failures: acc.failures,
        });
    }
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, start.elapsed().as_secs_f64()))
}

fn score(dr: &FittedDR, e: &Explanation, x: &[f64], seconds: f64) -> Result<InstanceOutcome> {
    let instance = instance_difference(dr, e, x)?.value;
    let weights = match dr.intrinsic_weights() {
        Some(w) => Some(weights_difference(e, w)?.value),
        None => None,
    };
    Ok(InstanceOutcome {
        instance,
        weights,
        seconds,
    })
}

fn lxdr_cell(
    dr: &FittedDR,
    queries: &DataMatrix,
    query_rows: &[usize],
    pool: &DataMatrix,
    k: usize,
    options: &ExperimentOptions,
) -> Accumulator {
    let config = LxdrConfig::new(NgConfig::knn(k), options.auto_alpha);
    Accumulator::collect(map_range(query_rows.len(), options.execution, |i| {
        let x = queries.get_row(query_rows[i])?;
        let (e, seconds) = timed(|| lxdr_explain(dr, pool, x, &config))?;
        score(dr, &e, x, seconds)
    }))
}

/// LXDR at every K plus GXDR, for every (dataset, reducer) pair, over every
/// dataset row. Weights difference is reported only for PCA.
pub fn run_table_experiment(
    datasets: &[TableDataset],
    dr_methods: &[DrKind],
    options: &ExperimentOptions,
) -> ExperimentReport {
    let mut rows = Vec::new();
    for ds in datasets {
        let n_features = ds.data.cols();
        let all = ds.instance_rows();
        for &kind in dr_methods {
            let mut params = FitParams::new(kind, ds.n_reduced, options.seed);
            params.epochs = options.epochs;
            let fitted = FittedDR::fit(&ds.data, &params);
            let with_weights = kind == DrKind::Pca;
            let cell = |explainer, k| Cell {
                dataset: &ds.name,
                dr_method: kind,
                explainer,
                n_features,
                n_reduced: ds.n_reduced,
                k,
            };
            let failed = || Accumulator {
                failures: all.len(),
                ..Accumulator::default()
            };

            for &k in &ds.k_values {
                let acc = match &fitted {
                    Ok(dr) => lxdr_cell(dr, &ds.data, &all, ds.pool(), k, options),
                    Err(_) => failed(),
                };
                push_rows(
                    &mut rows,
                    cell(Explainer::Lxdr, k),
                    &acc,
                    with_weights,
                    options.record_timing,
                );
            }

            let acc = match &fitted {
                Ok(dr) => match timed(|| gxdr_explain(dr, &ds.data, options.gxdr_alpha)) {
                    Ok((e, seconds)) => {
                        Accumulator::collect(map_range(all.len(), options.execution, |i| {
                            let row = ds.data.get_row(all[i])?;
                            score(dr, &e, row, seconds)
                        }))
                    }
                    Err(_) => failed(),
                },
                Err(_) => failed(),
            };
            push_rows(
                &mut rows,
                cell(Explainer::Gxdr, 0),
                &acc,
                with_weights,
                options.record_timing,
            );
        }
    }
    ExperimentReport { rows }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    pub feature_counts: Vec<usize>,
    pub k_values: Vec<usize>,
    pub queries_per_dataset: usize,
    pub eigen_decay: f64,
    pub variance_threshold: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            feature_counts: synthetic_feature_counts(),
            k_values: vec![250, 500, 750],
            queries_per_dataset: 20,
            eigen_decay: 0.8,
            variance_threshold: 0.95,
        }
    }
}

/// Per-dataset seed, so each feature count gets its own stream.
fn dataset_seed(seed: u64, n_features: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(n_features as u64)
}

/// LXDR on synthetic datasets reduced by PCA, at every K, over a fixed
/// seeded sample of query rows per dataset. Cells run one after another so
/// their timings are comparable; queries within a cell may run in parallel.
pub fn run_scaling_experiment(
    config: &ScalingConfig,
    options: &ExperimentOptions,
) -> Result<ExperimentReport> {
    let mut rows = Vec::new();
    for &f in &config.feature_counts {
        let mut spec = SyntheticSpec::new(f, dataset_seed(options.seed, f));
        spec.eigen_decay = config.eigen_decay;
        let data = synthetic_dataset(&spec)?;
        let spectrum = PcaSpectrum::compute(&data)?;
        let n_reduced = spectrum.components_for_variance(config.variance_threshold);
        let dr = FittedDR::from_pca(spectrum.into_model(n_reduced)?, options.seed);

        let n_queries = config.queries_per_dataset.min(data.rows());
        if n_queries == 0 {
            return Err(Error::InvalidInput(
                "queries_per_dataset must be at least 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let mut queries = index::sample(&mut rng, data.rows(), n_queries).into_vec();
        queries.sort_unstable();

        let name = format!("synthetic-f{f}");
        for &k in &config.k_values {
            let acc = lxdr_cell(&dr, &data, &queries, &data, k, options);
            let cell = Cell {
                dataset: &name,
                dr_method: DrKind::Pca,
                explainer: Explainer::Lxdr,
                n_features: f,
                n_reduced,
                k,
            };
            push_rows(&mut rows, cell, &acc, true, options.record_timing);
        }
    }
    Ok(ExperimentReport { rows })
}
