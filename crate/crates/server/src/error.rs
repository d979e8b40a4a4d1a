use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use onboard_core::gateway::{GatewayError, TokenError};
use onboard_core::model::SpecError;
use onboard_core::{OrchestratorError, ResolveError};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorCode {
    BadRequest,
    NotFound,
    Conflict,
    UpstreamFailure,
}

impl ErrorCode {
    pub fn status(self) -> StatusCode {
        match self {
            ErrorCode::BadRequest => StatusCode::BAD_REQUEST,
            ErrorCode::NotFound => StatusCode::NOT_FOUND,
            ErrorCode::Conflict => StatusCode::CONFLICT,
            ErrorCode::UpstreamFailure => StatusCode::BAD_GATEWAY,
        }
    }
}

/// Error body returned by every route: `{"code", "message", "detail"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiError {
    pub code: ErrorCode,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

impl ApiError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            detail: None,
        }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(ErrorCode::BadRequest, message)
    }

    fn with_detail(mut self, detail: Value) -> Self {
        self.detail = Some(detail);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.code.status(), Json(self)).into_response()
    }
}

impl From<SpecError> for ApiError {
    fn from(err: SpecError) -> Self {
        let (kind, path) = match &err {
            SpecError::Schema { path, .. } => ("schema", path),
            SpecError::Reference { path, .. } => ("reference", path),
            SpecError::Geometry { path, .. } => ("geometry", path),
        };
        let detail = json!({ "kind": kind, "path": path });
        ApiError::bad_request(err.to_string()).with_detail(detail)
    }
}

impl From<TokenError> for ApiError {
    fn from(err: TokenError) -> Self {
        let code = match err {
            TokenError::Unknown | TokenError::UnknownSession(_) => ErrorCode::NotFound,
            TokenError::Expired | TokenError::Reused => ErrorCode::Conflict,
        };
        ApiError::new(code, err.to_string())
    }
}

impl From<GatewayError> for ApiError {
    fn from(err: GatewayError) -> Self {
        ApiError::new(ErrorCode::UpstreamFailure, err.to_string())
    }
}

impl From<OrchestratorError> for ApiError {
    fn from(err: OrchestratorError) -> Self {
        let message = err.to_string();
        match err {
            OrchestratorError::UnknownDashboard(id) => {
                ApiError::new(ErrorCode::NotFound, message).with_detail(json!({ "dashboardId": id }))
            }
            OrchestratorError::UnknownSession(id) => {
                ApiError::new(ErrorCode::NotFound, message).with_detail(json!({ "sessionId": id }))
            }
            OrchestratorError::UnknownVisual {
                dashboard_id,
                visual_id,
                region,
            } => ApiError::new(ErrorCode::NotFound, message).with_detail(json!({
                "dashboardId": dashboard_id,
                "visualId": visual_id,
                "region": region,
            })),
            OrchestratorError::DashboardConflict(id) => {
                ApiError::new(ErrorCode::Conflict, message).with_detail(json!({ "dashboardId": id }))
            }
            OrchestratorError::EmptyText | OrchestratorError::NotConversational(_) => ApiError::bad_request(message),
            OrchestratorError::Spec(e) => e.into(),
            OrchestratorError::Resolve(ResolveError::NoHit) => ApiError::new(ErrorCode::NotFound, message),
            OrchestratorError::Resolve(_) => ApiError::bad_request(message),
            OrchestratorError::Token(e) => e.into(),
            OrchestratorError::Log { line, .. } => ApiError::bad_request(message).with_detail(json!({ "line": line })),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orchestrator_errors_map_to_codes() {
        let cases = [
            (OrchestratorError::UnknownSession("s".into()), ErrorCode::NotFound),
            (OrchestratorError::DashboardConflict("d".into()), ErrorCode::Conflict),
            (OrchestratorError::EmptyText, ErrorCode::BadRequest),
            (
                OrchestratorError::Resolve(ResolveError::DegenerateGeometry),
                ErrorCode::BadRequest,
            ),
            (OrchestratorError::Token(TokenError::Reused), ErrorCode::Conflict),
            (OrchestratorError::Token(TokenError::Unknown), ErrorCode::NotFound),
        ];
        for (err, code) in cases {
            assert_eq!(ApiError::from(err).code, code);
        }
    }

    #[test]
    fn spec_errors_carry_their_path() {
        let err = ApiError::from(SpecError::Schema {
            path: "visuals[0].bounds".into(),
            message: "missing".into(),
        });
        assert_eq!(err.detail.unwrap()["path"], "visuals[0].bounds");
    }
}
