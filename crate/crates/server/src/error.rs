use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;

use audiolabel_core::annotations::AnnotationError;
use audiolabel_core::audio_io::AudioError;
use audiolabel_core::dsp::DspError;
use audiolabel_core::project::ClassError;
use audiolabel_core::render::RenderError;

/// JSON error body: `{"code", "message", "field"?}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            field: None,
        }
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn invalid(field: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_parameter", message).with_field(field)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

impl From<DspError> for ApiError {
    fn from(e: DspError) -> Self {
        let msg = e.to_string();
        match e {
            DspError::InvalidParams(_) => ApiError::invalid(
                if msg.contains("window size") { "window" } else { "overlap" },
                msg,
            ),
            DspError::TooShort { .. } => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "too_short", msg).with_field("segment")
            }
            DspError::ReconstructionUnsupported(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "reconstruction_unsupported", msg)
                    .with_field("overlap")
            }
            DspError::EmptySelection => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "empty_selection", msg).with_field("box")
            }
            DspError::InvalidSelection(_) => ApiError::invalid("box", msg),
        }
    }
}

impl From<RenderError> for ApiError {
    fn from(e: RenderError) -> Self {
        match e {
            RenderError::InvalidParam { field, message } => ApiError::invalid(field, message),
            RenderError::Dsp(d) => d.into(),
            other => ApiError::internal(other.to_string()),
        }
    }
}

impl From<AudioError> for ApiError {
    fn from(e: AudioError) -> Self {
        match e {
            AudioError::OutOfRange { .. } => {
                ApiError::not_found("segment_not_found", e.to_string()).with_field("segment")
            }
            AudioError::InvalidParameter(m) => ApiError::invalid("gain_db", m),
            AudioError::Format(_) | AudioError::UnsupportedFormat(_) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unreadable_audio", e.to_string())
            }
        }
    }
}

impl From<AnnotationError> for ApiError {
    fn from(e: AnnotationError) -> Self {
        let msg = e.to_string();
        match e {
            AnnotationError::Validation { field, .. } => ApiError::invalid(field, msg),
            AnnotationError::ImmutableField(field) => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "immutable_field", msg).with_field(field)
            }
            AnnotationError::NotFound(_) => ApiError::not_found("label_not_found", msg),
            AnnotationError::InvalidUser(_) => {
                ApiError::new(StatusCode::BAD_REQUEST, "invalid_username", msg).with_field("X-Username")
            }
            AnnotationError::Parse { .. } | AnnotationError::Io(_) => ApiError::internal(msg),
        }
    }
}

impl From<ClassError> for ApiError {
    fn from(e: ClassError) -> Self {
        let msg = e.to_string();
        match e {
            ClassError::AlreadyPresent(_) => {
                ApiError::new(StatusCode::CONFLICT, "already_present", msg).with_field("name")
            }
            ClassError::EmptyName => ApiError::invalid("name", msg),
            ClassError::NotRemovable(_) => {
                ApiError::new(StatusCode::CONFLICT, "not_removable", msg).with_field("name")
            }
            ClassError::NotFound(_) => ApiError::not_found("class_not_found", msg),
            ClassError::UnknownSite(_) => ApiError::not_found("site_not_found", msg).with_field("site"),
        }
    }
}
