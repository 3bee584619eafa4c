//! HTTP API over `lxdr-core`: upload or pick a dataset, fit a reducer and get
//! its embedding, explain any instance, and try feature tweaks.
//!
//! | route | body |
//! |---|---|
//! | `POST /api/datasets` | `{"bundled": "diabetes"}`, `{"csv": "...", ...}`, or a `text/csv` body |
//! | `GET /api/datasets/{id}` | |
//! | `POST /api/dr` | `{"dataset_id", "method", "n_components" or "variance", "params", "seed"}` |
//! | `POST /api/explain` | `{"model_id", "instance_index" or "instance", "ng", "k", "auto_alpha"}` |
//! | `POST /api/whatif` | `{"model_id", "instance_index" or "instance", "feature", "value" or "to_mean"}` |
//!
//! Every error body is `{"error": message, "where": field}`.

mod error;
mod handlers;
mod registry;

use std::path::PathBuf;
use std::sync::Arc;

use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorBody};
pub use registry::{ModelEntry, Registry};

pub type AppState = Arc<Registry>;

/// The API routes over a fresh registry, with permissive CORS. When
/// `static_dir` is given, everything outside `/api` is served from it.
pub fn router(static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/health", get(handlers::health))
        .route("/api/datasets", post(handlers::create_dataset))
        .route("/api/datasets/{id}", get(handlers::get_dataset))
        .route("/api/dr", post(handlers::fit_dr))
        .route("/api/explain", post(handlers::explain))
        .route("/api/whatif", post(handlers::whatif))
        .with_state(Arc::new(Registry::default()));
    let app = match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(handlers::not_found),
    };
    app.layer(CorsLayer::permissive())
}
