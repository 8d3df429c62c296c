//! HTTP API for browsing recordings as spectrograms, auditioning filtered
//! selections and managing bounding-box labels.
//!
//! Identity is the `X-Username` request header (`[A-Za-z0-9_-]{1,64}`); it is
//! a plain name with no authentication. Requests without it act as the
//! shared `tmp` user.

mod api;
pub mod cache;
pub mod error;
mod range;
pub mod session;

use std::collections::HashMap;
use std::io;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::Router;

use audiolabel_core::annotations::LabelStore;
use audiolabel_core::project::{ConfigError, Project};

pub use error::ApiError;
pub use session::{Session, Settings};

pub const USER_HEADER: &str = "x-username";

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub root: PathBuf,
    pub clip_seconds: f64,
    pub cache_bytes: usize,
    pub token_ttl: Duration,
}

impl ServerConfig {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        ServerConfig {
            root: root.into(),
            clip_seconds: 15.0,
            cache_bytes: 64 * 1024 * 1024,
            token_ttl: Duration::from_secs(600),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("label directory: {0}")]
    Labels(#[from] io::Error),
    #[error("clip length must be a positive number of seconds, got {0}")]
    ClipLength(f64),
}

/// Shared server state: the project snapshot, label store, filtered-audio
/// cache and per-user sessions.
#[derive(Debug)]
pub struct AppState {
    pub config: ServerConfig,
    pub project: Project,
    pub store: LabelStore,
    pub(crate) cache: Mutex<cache::AudioCache>,
    pub(crate) sessions: Mutex<HashMap<String, Session>>,
}

impl AppState {
    pub fn new(config: ServerConfig) -> Result<Self, StartupError> {
        if !(config.clip_seconds.is_finite() && config.clip_seconds > 0.0) {
            return Err(StartupError::ClipLength(config.clip_seconds));
        }
        let project = Project::load(&config.root)?;
        let store = LabelStore::open_dir(project.labels_dir())?;
        Ok(AppState {
            cache: Mutex::new(cache::AudioCache::new(config.cache_bytes, config.token_ttl)),
            sessions: Mutex::new(HashMap::new()),
            config,
            project,
            store,
        })
    }
}

/// Builds the API router over a loaded project.
pub fn router(state: Arc<AppState>) -> Router {
    api::routes().with_state(state)
}

/// Loads the project at `config.root` and builds the router.
pub fn app(config: ServerConfig) -> Result<Router, StartupError> {
    Ok(router(Arc::new(AppState::new(config)?)))
}
