use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use metaforge_core::{InstanceError, TemplateError, TemplateIssue, ValidationIssue};
use metaforge_gateway::GatewayError;
use serde::Serialize;
use serde_json::Value;

/// Uniform body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub issues: Option<Value>,
}

impl ApiError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_owned(),
            message: message.into(),
            path: None,
            issues: None,
        }
    }

    pub fn with_path(mut self, path: impl Into<String>) -> Self {
        self.path = Some(path.into());
        self
    }

    pub fn with_issues<T: Serialize>(mut self, issues: &[T]) -> Self {
        self.issues = Some(serde_json::to_value(issues).expect("issues serialize"));
        self
    }

    pub fn status(&self) -> StatusCode {
        status_for(&self.code)
    }
}

/// HTTP status for an error code.
pub fn status_for(code: &str) -> StatusCode {
    match code {
        "MALFORMED_JSON" | "BAD_MODE" | "QUERY_EMPTY" | "UNKNOWN_SOURCE" | "INVALID_IDENTIFIER" | "UNKNOWN_SOURCE_ACRONYM"
        | "BAD_REQUEST" | "UNKNOWN_PATH" => StatusCode::BAD_REQUEST,
        "UNAUTHORIZED" => StatusCode::UNAUTHORIZED,
        "UNKNOWN_TEMPLATE" | "NOT_FOUND" => StatusCode::NOT_FOUND,
        "METHOD_NOT_ALLOWED" => StatusCode::METHOD_NOT_ALLOWED,
        "ID_CONFLICT" => StatusCode::CONFLICT,
        "SCHEMA_VIOLATION" | "VALIDATION_FAILED" | "CONTEXT_MISMATCH" | "FINGERPRINT_MISMATCH" => StatusCode::UNPROCESSABLE_ENTITY,
        c if c.starts_with("UPSTREAM_") => StatusCode::BAD_GATEWAY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

impl From<InstanceError> for ApiError {
    fn from(e: InstanceError) -> Self {
        let base = ApiError::new(e.code(), e.to_string());
        match e {
            InstanceError::ValidationFailed(issues) => base.with_issues(&issues),
            InstanceError::UnknownPath(p) | InstanceError::ReadOnlyField(p) => base.with_path(p),
            _ => base,
        }
    }
}

impl From<TemplateError> for ApiError {
    fn from(e: TemplateError) -> Self {
        match e {
            TemplateError::MalformedJson(_) => ApiError::new(e.code(), e.to_string()),
            _ => schema_violation(&[e.to_issue()]),
        }
    }
}

impl From<GatewayError> for ApiError {
    fn from(e: GatewayError) -> Self {
        ApiError::new(e.code(), e.to_string())
    }
}

pub fn schema_violation(issues: &[TemplateIssue]) -> ApiError {
    let first = issues.first().map(|i| i.message.clone()).unwrap_or_default();
    ApiError::new("SCHEMA_VIOLATION", format!("template is not valid: {first}")).with_issues(issues)
}

pub fn validation_failed(issues: &[ValidationIssue]) -> ApiError {
    let n = issues.iter().filter(|i| i.is_error()).count();
    ApiError::new("VALIDATION_FAILED", format!("instance has {n} validation error(s)")).with_issues(issues)
}
