use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use lxdr_core::Error;
use serde::Serialize;

/// Error response: always `{"error": ..., "where": ...}`, plus the position
/// of the offending cell for CSV parse failures.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: String,
    #[serde(rename = "where")]
    pub location: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub col: Option<usize>,
}

impl ApiError {
    pub fn new(status: StatusCode, location: impl Into<String>, error: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                error: error.into(),
                location: location.into(),
                row: None,
                col: None,
            },
        }
    }

    pub fn bad_request(location: impl Into<String>, error: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, location, error)
    }

    pub fn not_found(location: impl Into<String>, error: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, location, error)
    }

    pub fn unprocessable(location: impl Into<String>, error: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, location, error)
    }

    /// Maps a library error raised while handling the field `location`.
    pub fn from_core(location: &str, e: Error) -> Self {
        let message = e.to_string();
        match e {
            Error::Parse { row, col, .. } => {
                let mut err = Self::bad_request(location, message);
                err.body.row = Some(row);
                err.body.col = Some(col);
                err
            }
            Error::Load { .. } => Self::bad_request(location, message),
            Error::TooManyNeighbors { .. } => Self::unprocessable("k", message),
            Error::IndexOutOfRange { what, .. } => Self::unprocessable(what, message),
            Error::InsufficientComponents { .. } => Self::unprocessable("n_components", message),
            _ => Self::unprocessable(location, message),
        }
    }

    pub fn internal(error: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "server", error)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Parses a JSON body: malformed JSON is a 400, well-formed JSON of the
/// wrong shape a 422.
pub fn parse_json<T: serde::de::DeserializeOwned>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        use serde_json::error::Category;
        match e.classify() {
            Category::Syntax | Category::Eof | Category::Io => {
                ApiError::bad_request("body", e.to_string())
            }
            Category::Data => ApiError::unprocessable("body", e.to_string()),
        }
    })
}
