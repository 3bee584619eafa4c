use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::QueryRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap};
use axum::Json;
use lxdr_core::attribution::{ridge_predictor_fit, whatif_tweak, WhatIf};
use lxdr_core::data::{
    load_bundled, parse_csv, standardize, BundledDataset, Dataset, TargetColumn,
};
use lxdr_core::dr::PcaSpectrum;
use lxdr_core::evaluation::instance_difference;
use lxdr_core::{
    lxdr_explain, DataMatrix, DrKind, Explanation, FitParams, FittedDR, Generator, LxdrConfig,
    NgConfig, Reducer,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{parse_json, ApiError};
use crate::registry::ModelEntry;
use crate::AppState;

type ApiResult<T> = Result<Json<T>, ApiError>;

/// Runs CPU-bound work off the async executor.
async fn compute<T, F>(f: F) -> Result<T, ApiError>
where
    T: Send + 'static,
    F: FnOnce() -> Result<T, ApiError> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

pub async fn health() -> Json<Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

pub async fn not_found() -> ApiError {
    ApiError::not_found("path", "no such route")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRequest {
    bundled: Option<String>,
    csv: Option<String>,
    #[serde(default = "default_true")]
    has_header: bool,
    target: Option<TargetSpec>,
    name: Option<String>,
    #[serde(default)]
    standardize: bool,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TargetSpec {
    Index(usize),
    Name(String),
}

impl TargetSpec {
    fn column(self) -> TargetColumn {
        match self {
            TargetSpec::Index(i) => TargetColumn::Index(i),
            TargetSpec::Name(n) if n == "last" => TargetColumn::Last,
            TargetSpec::Name(n) => TargetColumn::Name(n),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DatasetInfo {
    dataset_id: String,
    name: String,
    rows: usize,
    cols: usize,
    feature_names: Vec<String>,
    has_target: bool,
    feature_means: Vec<f64>,
}

impl DatasetInfo {
    fn new(dataset_id: String, d: &Dataset) -> Self {
        Self {
            dataset_id,
            name: d.name.clone(),
            rows: d.rows(),
            cols: d.cols(),
            feature_names: d.feature_names.clone(),
            has_target: d.target.is_some(),
            feature_means: d.features.column_means(),
        }
    }
}

/// JSON `{bundled}` / `{csv}` bodies, or a raw `text/csv` body configured by
/// the `header`, `target` and `name` query parameters.
pub async fn create_dataset(
    State(registry): State<AppState>,
    headers: HeaderMap,
    query: Result<Query<HashMap<String, String>>, QueryRejection>,
    body: Bytes,
) -> ApiResult<DatasetInfo> {
    let is_csv = headers
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("text/csv") || v.starts_with("text/plain"));
    let request = if is_csv {
        let Query(params) = query.map_err(|e| ApiError::bad_request("query", e.body_text()))?;
        let text = String::from_utf8(body.to_vec())
            .map_err(|_| ApiError::bad_request("body", "CSV is not UTF-8"))?;
        let has_header = match params.get("header").map(String::as_str) {
            None | Some("true") | Some("1") => true,
            Some("false") | Some("0") => false,
            Some(other) => {
                return Err(ApiError::bad_request(
                    "header",
                    format!("`{other}` is not a boolean"),
                ))
            }
        };
        DatasetRequest {
            bundled: None,
            csv: Some(text),
            has_header,
            target: params.get("target").map(|t| match t.parse() {
                Ok(i) => TargetSpec::Index(i),
                Err(_) => TargetSpec::Name(t.clone()),
            }),
            name: params.get("name").cloned(),
            standardize: params
                .get("standardize")
                .is_some_and(|v| v == "true" || v == "1"),
        }
    } else {
        parse_json(&body)?
    };

    let dataset = compute(move || {
        let dataset = match (request.bundled, request.csv) {
            (Some(name), None) => {
                let which: BundledDataset = name.parse().map_err(|e: lxdr_core::Error| {
                    ApiError::unprocessable("bundled", e.to_string())
                })?;
                load_bundled(which).map_err(|e| ApiError::internal(e.to_string()))?
            }
            (None, Some(text)) => {
                let name = request.name.as_deref().unwrap_or("upload");
                parse_csv(
                    name,
                    &text,
                    request.has_header,
                    request.target.map(TargetSpec::column),
                )
                .map_err(|e| ApiError::from_core("csv", e))?
            }
            _ => {
                return Err(ApiError::unprocessable(
                    "body",
                    "give exactly one of `bundled` and `csv`",
                ))
            }
        };
        if request.standardize {
            Ok(standardize(&dataset)
                .map_err(|e| ApiError::from_core("standardize", e))?
                .0)
        } else {
            Ok(dataset)
        }
    })
    .await?;
    let (id, dataset) = registry.add_dataset(dataset);
    Ok(Json(DatasetInfo::new(id, &dataset)))
}

pub async fn get_dataset(
    State(registry): State<AppState>,
    Path(id): Path<String>,
) -> ApiResult<DatasetInfo> {
    let dataset = registry
        .dataset(&id)
        .ok_or_else(|| ApiError::not_found("dataset_id", format!("unknown dataset `{id}`")))?;
    Ok(Json(DatasetInfo::new(id, &dataset)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrRequest {
    dataset_id: String,
    method: String,
    n_components: Option<usize>,
    variance: Option<f64>,
    #[serde(default)]
    params: DrParams,
    #[serde(default)]
    seed: u64,
    /// Also fit a ridge regressor on the reduced data against the target.
    predictor_alpha: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DrParams {
    gamma: Option<f64>,
    epochs: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct DrResponse {
    model_id: String,
    dataset_id: String,
    method: DrKind,
    n_features: usize,
    n_reduced: usize,
    /// rows × n_reduced
    embedding: DataMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    explained_variance_ratio: Option<Vec<f64>>,
    has_predictor: bool,
}

pub async fn fit_dr(State(registry): State<AppState>, body: Bytes) -> ApiResult<DrResponse> {
    let request: DrRequest = parse_json(&body)?;
    let dataset = registry.dataset(&request.dataset_id).ok_or_else(|| {
        ApiError::not_found(
            "dataset_id",
            format!("unknown dataset `{}`", request.dataset_id),
        )
    })?;
    let kind: DrKind = request
        .method
        .parse()
        .map_err(|e: lxdr_core::Error| ApiError::unprocessable("method", e.to_string()))?;

    let (entry, embedding) = compute(move || {
        let n_components = match (request.n_components, request.variance) {
            (Some(n), None) => n,
            (None, Some(v)) if v > 0.0 && v <= 1.0 => PcaSpectrum::compute(&dataset.features)
                .map_err(|e| ApiError::from_core("variance", e))?
                .components_for_variance(v),
            (None, Some(v)) => {
                return Err(ApiError::unprocessable(
                    "variance",
                    format!("must be in (0, 1], got {v}"),
                ))
            }
            _ => {
                return Err(ApiError::unprocessable(
                    "n_components",
                    "give exactly one of `n_components` and `variance`",
                ))
            }
        };
        if n_components == 0 || n_components > dataset.cols() {
            return Err(ApiError::unprocessable(
                "n_components",
                format!(
                    "must be between 1 and {}, got {n_components}",
                    dataset.cols()
                ),
            ));
        }
        let mut params = FitParams::new(kind, n_components, request.seed);
        params.gamma = request.params.gamma;
        if let Some(epochs) = request.params.epochs {
            params.epochs = epochs;
        }
        let model = FittedDR::fit(&dataset.features, &params)
            .map_err(|e| ApiError::from_core("params", e))?;
        let embedding = model
            .transform_batch(&dataset.features)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let predictor = match request.predictor_alpha {
            None => None,
            Some(alpha) => {
                let target = dataset.target.as_ref().ok_or_else(|| {
                    ApiError::unprocessable("predictor_alpha", "dataset has no target column")
                })?;
                Some(
                    ridge_predictor_fit(&embedding, target, alpha)
                        .map_err(|e| ApiError::from_core("predictor_alpha", e))?,
                )
            }
        };
        let entry = ModelEntry {
            dataset_id: request.dataset_id,
            dataset,
            model,
            predictor,
        };
        Ok((entry, embedding))
    })
    .await?;

    let (model_id, entry) = registry.add_model(entry);
    Ok(Json(DrResponse {
        model_id,
        dataset_id: entry.dataset_id.clone(),
        method: kind,
        n_features: entry.model.input_dims(),
        n_reduced: entry.model.reduced_dims(),
        embedding,
        explained_variance_ratio: entry
            .model
            .as_pca()
            .map(|p| p.explained_variance_ratio.clone()),
        has_predictor: entry.predictor.is_some(),
    }))
}

/// The instance to explain or tweak: a dataset row or an inline vector.
#[derive(Debug, Deserialize)]
struct InstanceRef {
    instance_index: Option<usize>,
    instance: Option<Vec<f64>>,
}

impl InstanceRef {
    fn resolve(&self, entry: &ModelEntry) -> Result<Vec<f64>, ApiError> {
        match (self.instance_index, &self.instance) {
            (Some(i), None) => entry
                .dataset
                .features
                .get_row(i)
                .map(<[f64]>::to_vec)
                .map_err(|e| ApiError::unprocessable("instance_index", e.to_string())),
            (None, Some(x)) if x.len() == entry.model.input_dims() => Ok(x.clone()),
            (None, Some(x)) => Err(ApiError::unprocessable(
                "instance",
                format!(
                    "expected {} values, got {}",
                    entry.model.input_dims(),
                    x.len()
                ),
            )),
            _ => Err(ApiError::unprocessable(
                "instance",
                "give exactly one of `instance_index` and `instance`",
            )),
        }
    }
}

fn lookup_model(registry: &AppState, id: &str) -> Result<Arc<ModelEntry>, ApiError> {
    registry
        .model(id)
        .ok_or_else(|| ApiError::not_found("model_id", format!("unknown model `{id}`")))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplainRequest {
    model_id: String,
    #[serde(flatten)]
    instance: InstanceRef,
    ng: Option<String>,
    k: Option<usize>,
    #[serde(default)]
    auto_alpha: bool,
    alpha: Option<f64>,
    #[serde(default)]
    seed: u64,
    scale: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ExplainResponse {
    model_id: String,
    #[serde(flatten)]
    explanation: Explanation,
    x_reduced: Vec<f64>,
    instance_difference: f64,
    feature_names: Vec<String>,
}

pub async fn explain(State(registry): State<AppState>, body: Bytes) -> ApiResult<ExplainResponse> {
    let request: ExplainRequest = parse_json(&body)?;
    let entry = lookup_model(&registry, &request.model_id)?;
    let x = request.instance.resolve(&entry)?;
    let generator: Generator = match request.ng.as_deref() {
        None => Generator::Knn,
        Some(s) => s
            .parse()
            .map_err(|e: lxdr_core::Error| ApiError::unprocessable("ng", e.to_string()))?,
    };
    let neighborhood = NgConfig {
        generator,
        k: request.k,
        seed: request.seed,
        perturbation_scale: request.scale.unwrap_or(1.0),
    };
    let mut config = LxdrConfig::new(neighborhood, request.auto_alpha);
    if let Some(alpha) = request.alpha {
        config.alpha_default = alpha;
    }
    let model_id = request.model_id;
    compute(move || {
        let explanation = lxdr_explain(&entry.model, &entry.dataset.features, &x, &config)
            .map_err(|e| ApiError::from_core("explain", e))?;
        let x_reduced = entry
            .model
            .transform(&x)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let difference = instance_difference(&entry.model, &explanation, &x)
            .map_err(|e| ApiError::internal(e.to_string()))?
            .value;
        Ok(Json(ExplainResponse {
            model_id,
            explanation,
            x_reduced,
            instance_difference: difference,
            feature_names: entry.dataset.feature_names.clone(),
        }))
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatifRequest {
    model_id: String,
    #[serde(flatten)]
    instance: InstanceRef,
    feature: usize,
    value: Option<f64>,
    #[serde(default)]
    to_mean: bool,
}

pub async fn whatif(State(registry): State<AppState>, body: Bytes) -> ApiResult<WhatIf> {
    let request: WhatifRequest = parse_json(&body)?;
    let entry = lookup_model(&registry, &request.model_id)?;
    let x = request.instance.resolve(&entry)?;
    if request.feature >= x.len() {
        return Err(ApiError::unprocessable(
            "feature",
            format!(
                "feature {} out of range for {} features",
                request.feature,
                x.len()
            ),
        ));
    }
    let value = match (request.value, request.to_mean) {
        (Some(v), false) => v,
        (None, true) => entry.dataset.features.column_means()[request.feature],
        _ => {
            return Err(ApiError::unprocessable(
                "value",
                "give exactly one of `value` and `to_mean`",
            ))
        }
    };
    compute(move || {
        whatif_tweak(
            &entry.model,
            entry.predictor.as_ref(),
            &x,
            request.feature,
            value,
        )
        .map(Json)
        .map_err(|e| ApiError::from_core("value", e))
    })
    .await
}
