use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use dialogd_core::{Error, ErrorClass};
use serde::Serialize;

/// Protocol error body: `{"error": code, "message": text, "offset": n?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error: code.to_owned(),
                message: message.into(),
                offset: None,
            },
        }
    }

    /// Malformed query parameter, path segment or body.
    pub fn invalid_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "InvalidRequest", message)
    }
}

pub fn status_of(class: ErrorClass) -> StatusCode {
    match class {
        ErrorClass::Invalid => StatusCode::BAD_REQUEST,
        ErrorClass::NotFound => StatusCode::NOT_FOUND,
        ErrorClass::Conflict => StatusCode::CONFLICT,
        ErrorClass::Internal => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        if e.class() == ErrorClass::Internal {
            log::error!("request failed: {e}");
        }
        ApiError {
            status: status_of(e.class()),
            body: ErrorBody {
                error: e.code().to_owned(),
                message: e.to_string(),
                offset: e.offset(),
            },
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

/// Reasons the server cannot start.
#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error("port {port} on {host} is already in use")]
    PortInUse { host: std::net::IpAddr, port: u16 },
    #[error("cannot bind {host}:{port}: {source}")]
    Bind {
        host: std::net::IpAddr,
        port: u16,
        source: std::io::Error,
    },
    #[error("seed schema {path} is invalid: {reason}")]
    SeedSchemaInvalid { path: String, reason: String },
    #[error(transparent)]
    Storage(#[from] Error),
}

impl StartupError {
    pub fn code(&self) -> &'static str {
        match self {
            StartupError::PortInUse { .. } => "PortInUse",
            StartupError::Bind { .. } => "BindFailed",
            StartupError::SeedSchemaInvalid { .. } => "SeedSchemaInvalid",
            StartupError::Storage(e) => e.code(),
        }
    }
}
