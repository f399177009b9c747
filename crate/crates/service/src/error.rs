use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use probint_core::Error as ModelError;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    BadRequest(String),

    #[error("no session `{0}`")]
    UnknownSession(String),

    #[error("no statement {0} in this session")]
    UnknownStatement(u64),

    #[error("the specification is inconsistent; retract a statement before querying")]
    Inconsistent,

    #[error(transparent)]
    Model(#[from] ModelError),

    /// A statement or query no clique covers, with the cliques to choose from.
    #[error("{error}")]
    Locality {
        error: ModelError,
        cliques: Vec<Vec<String>>,
    },

    #[error("snapshot storage failed: {0}")]
    Storage(#[from] std::io::Error),

    #[error("worker task failed: {0}")]
    Task(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::BadRequest(_) => StatusCode::BAD_REQUEST,
            ApiError::UnknownSession(_) | ApiError::UnknownStatement(_) => StatusCode::NOT_FOUND,
            ApiError::Inconsistent => StatusCode::CONFLICT,
            ApiError::Locality { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            ApiError::Model(e) => match e.root() {
                ModelError::Inconsistent => StatusCode::CONFLICT,
                ModelError::Internal(_) | ModelError::Contract(_) => StatusCode::INTERNAL_SERVER_ERROR,
                _ => StatusCode::UNPROCESSABLE_ENTITY,
            },
            ApiError::Storage(_) | ApiError::Task(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            ApiError::BadRequest(_) => "bad_request",
            ApiError::UnknownSession(_) => "unknown_session",
            ApiError::UnknownStatement(_) => "unknown_statement",
            ApiError::Inconsistent => "inconsistent",
            ApiError::Locality { .. } => "locality",
            ApiError::Model(e) => match e.root() {
                ModelError::Locality { .. } => "locality",
                ModelError::Inconsistent => "inconsistent",
                ModelError::UndefinedConditional => "undefined_conditional",
                ModelError::Internal(_) | ModelError::Contract(_) => "internal",
                _ => "validation",
            },
            ApiError::Storage(_) | ApiError::Task(_) => "internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.kind(), "message": self.to_string() });
        if let ApiError::Locality { error, cliques } = &self {
            if let ModelError::Locality { variables, .. } = error.root() {
                body["variables"] = json!(variables);
            }
            body["cliques"] = json!(cliques);
        }
        (self.status(), Json(body)).into_response()
    }
}
