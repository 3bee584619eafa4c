use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

async fn send(
    app: &Router,
    method: &str,
    uri: &str,
    content_type: &str,
    body: String,
) -> (StatusCode, Value) {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(header::CONTENT_TYPE, content_type)
        .body(Body::from(body))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    send(app, "POST", uri, "application/json", body.to_string()).await
}

fn assert_error(body: &Value, location: &str) {
    assert!(body["error"].is_string(), "{body}");
    assert_eq!(body["where"], location, "{body}");
}

async fn diabetes_kpca(app: &Router) -> String {
    let (status, ds) = post(app, "/api/datasets", json!({"bundled": "diabetes"})).await;
    assert_eq!(status, StatusCode::OK);
    let (status, m) = post(
        app,
        "/api/dr",
        json!({"dataset_id": ds["dataset_id"], "method": "kpca-rbf", "n_components": 2}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{m}");
    m["model_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn bundled_dataset_shape() {
    let app = lxdr_service::router(None);
    let (status, body) = post(&app, "/api/datasets", json!({"bundled": "diabetes"})).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["rows"], 442);
    assert_eq!(body["cols"], 10);
    assert_eq!(body["feature_names"].as_array().unwrap().len(), 10);
    assert_eq!(body["dataset_id"], "ds-1");

    let (_, again) = post(&app, "/api/datasets", json!({"bundled": "diabetes"})).await;
    assert_eq!(again["dataset_id"], "ds-2");

    let (status, fetched) = send(
        &app,
        "GET",
        "/api/datasets/ds-1",
        "application/json",
        String::new(),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(fetched["rows"], 442);
}

#[tokio::test]
async fn csv_upload_and_parse_errors() {
    let app = lxdr_service::router(None);
    let (status, body) = send(
        &app,
        "POST",
        "/api/datasets?target=last",
        "text/csv",
        "a,b,y\n1,2,3\n4,5,6\n".into(),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["cols"], 2);
    assert_eq!(body["has_target"], true);

    let (status, body) = send(
        &app,
        "POST",
        "/api/datasets",
        "text/csv",
        "a,b\n1,2\n3,oops\n".into(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "csv");
    assert_eq!(
        (body["row"].as_u64(), body["col"].as_u64()),
        (Some(3), Some(2))
    );

    let (status, body) = post(&app, "/api/datasets", json!({"csv": "x,y\n1,2\n1\n"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["row"], 3);

    let (status, body) = send(
        &app,
        "POST",
        "/api/datasets",
        "application/json",
        "{not json".into(),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_error(&body, "body");

    let (status, body) = post(&app, "/api/datasets", json!({"bundled": "mnist"})).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "bundled");
}

#[tokio::test]
async fn dr_fits_return_embeddings() {
    let app = lxdr_service::router(None);
    post(&app, "/api/datasets", json!({"bundled": "diabetes"})).await;
    let (status, body) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-1", "method": "kpca-rbf", "n_components": 2}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let embedding = body["embedding"].as_array().unwrap();
    assert_eq!(embedding.len(), 442);
    assert!(embedding.iter().all(|r| r.as_array().unwrap().len() == 2));

    let (status, body) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-1", "method": "pca", "variance": 0.95}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["n_reduced"], 8);
    assert_eq!(
        body["explained_variance_ratio"].as_array().unwrap().len(),
        8
    );

    let (status, body) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-1", "method": "tsne", "n_components": 2}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "method");

    let (status, body) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-9", "method": "pca", "n_components": 2}),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "dataset_id");

    let (status, body) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-1", "method": "pca", "n_components": 11}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "n_components");
}

#[tokio::test]
async fn explain_outlier_is_deterministic() {
    let app = lxdr_service::router(None);
    let model = diabetes_kpca(&app).await;
    let request =
        json!({"model_id": model, "instance_index": 123, "ng": "knn", "auto_alpha": true});
    let (status, first) = post(&app, "/api/explain", request.clone()).await;
    assert_eq!(status, StatusCode::OK, "{first}");
    let slopes = first["slopes"].as_array().unwrap();
    assert_eq!(slopes.len(), 2);
    let c1: Vec<f64> = slopes[0]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(c1.len(), 10);
    // the same order of magnitude as the published bar chart
    let largest = c1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(largest > 0.01 && largest < 2.0, "{c1:?}");
    assert_eq!(first["orientation"], "components_by_features");
    assert_eq!(first["feature_names"].as_array().unwrap().len(), 10);

    let (_, second) = post(&app, "/api/explain", request).await;
    assert_eq!(first, second);

    let (status, body) = post(
        &app,
        "/api/explain",
        json!({"model_id": model, "instance_index": 0, "k": 1000}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "k");

    let (status, body) = post(
        &app,
        "/api/explain",
        json!({"model_id": "m-77", "instance_index": 0}),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "model_id");

    let (status, body) = post(
        &app,
        "/api/explain",
        json!({"model_id": model, "instance": [1.0, 2.0]}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "instance");

    let (status, body) = post(
        &app,
        "/api/explain",
        json!({"model_id": model, "instance_index": 0, "colour": 1}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "body");
}

#[tokio::test]
async fn whatif_moves_the_outlier_inward() {
    let app = lxdr_service::router(None);
    let model = diabetes_kpca(&app).await;
    let (status, body) = post(
        &app,
        "/api/whatif",
        json!({"model_id": model, "instance_index": 123, "feature": 7, "value": 0.0}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let before = body["before"][0].as_f64().unwrap();
    let after = body["after"][0].as_f64().unwrap();
    assert!(after.abs() < before.abs());
    assert!(body.get("prediction_before").is_none());

    let (_, info) = send(
        &app,
        "GET",
        "/api/datasets/ds-1",
        "application/json",
        String::new(),
    )
    .await;
    let (_, noop) = post(
        &app,
        "/api/whatif",
        json!({"model_id": model, "instance_index": 5, "feature": 2, "value": body_value(&app, 5, 2).await}),
    )
    .await;
    assert_eq!(noop["before"], noop["after"]);
    assert!(info["feature_means"].is_array());

    let (status, body) = post(
        &app,
        "/api/whatif",
        json!({"model_id": model, "instance_index": 0, "feature": 99, "value": 0.0}),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_error(&body, "feature");
}

async fn body_value(app: &Router, row: usize, feature: usize) -> f64 {
    // any tweak echoes the current value
    let (_, body) = post(
        app,
        "/api/whatif",
        json!({"model_id": "m-1", "instance_index": row, "feature": feature, "to_mean": true}),
    )
    .await;
    body["old_value"].as_f64().unwrap()
}

#[tokio::test]
async fn predictor_adds_predictions() {
    let app = lxdr_service::router(None);
    post(
        &app,
        "/api/datasets",
        json!({"bundled": "diabetes", "standardize": true}),
    )
    .await;
    let (status, m) = post(
        &app,
        "/api/dr",
        json!({"dataset_id": "ds-1", "method": "pca", "n_components": 8, "predictor_alpha": 1.0}),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{m}");
    assert_eq!(m["has_predictor"], true);
    let (status, body) = post(
        &app,
        "/api/whatif",
        json!({"model_id": "m-1", "instance_index": 3, "feature": 2, "to_mean": true}),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(body["prediction_before"].is_f64() && body["prediction_after"].is_f64());
}

#[tokio::test]
async fn replay_on_a_fresh_server_is_identical() {
    async fn session() -> Vec<Value> {
        let app = lxdr_service::router(None);
        let mut out = Vec::new();
        out.push(
            post(&app, "/api/datasets", json!({"bundled": "iris"}))
                .await
                .1,
        );
        out.push(post(&app, "/api/dr", json!({"dataset_id": "ds-1", "method": "ae", "n_components": 2, "seed": 3, "params": {"epochs": 20}})).await.1);
        out.push(post(&app, "/api/explain", json!({"model_id": "m-1", "instance_index": 4, "ng": "perturb", "k": 30, "seed": 9})).await.1);
        out
    }
    assert_eq!(session().await, session().await);
}

#[tokio::test]
async fn unknown_routes_use_the_error_shape_and_cors_is_open() {
    let app = lxdr_service::router(None);
    let (status, body) = send(&app, "GET", "/nope", "application/json", String::new()).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_error(&body, "path");

    let request = Request::builder()
        .method("OPTIONS")
        .uri("/api/explain")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let response = app.oneshot(request).await.unwrap();
    assert!(response
        .headers()
        .contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}
