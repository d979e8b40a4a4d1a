//! HTTP front end for the onboarding assistant.
//!
//! [`router`] exposes dashboards, sessions, lasso and hover resolution,
//! help menus, conversational turns, voice tokens, a server-sent event
//! stream per session and NDJSON log export. Every failure is an
//! [`ApiError`] body.

pub mod config;
mod error;
mod routes;
mod store;

use std::sync::Arc;

use onboard_core::gateway::{build_provider, GatewayError};
use onboard_core::orchestrator::{Assistant, AssistantConfig};
use onboard_core::sample::SAMPLE_DASHBOARD;
use onboard_core::VoiceTokenStore;

pub use config::{ConfigError, Overrides, ServerConfig};
pub use error::{ApiError, ErrorCode};
pub use routes::router;
pub use store::Store;

#[derive(Clone)]
pub struct AppState {
    pub assistant: Arc<Assistant>,
    pub store: Option<Store>,
}

#[derive(Debug, thiserror::Error)]
pub enum StartupError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Provider(#[from] GatewayError),
    #[error("cannot load dashboard {path}: {message}")]
    Dashboard { path: String, message: String },
    #[error("cannot restore {path}: {message}")]
    Restore { path: String, message: String },
}

impl AppState {
    pub fn new(assistant: Arc<Assistant>) -> Self {
        Self { assistant, store: None }
    }

    /// Builds the provider, loads configured dashboards and restores any
    /// persisted state. Falls back to the bundled sample dashboard when
    /// nothing else is configured.
    pub fn from_config(config: &ServerConfig) -> Result<Self, StartupError> {
        let provider = build_provider(&config.provider)?;
        let assistant_config = AssistantConfig {
            model_name: config.provider.model_name.clone(),
            history_window: config.history_window,
        };
        let assistant = Arc::new(Assistant::new(provider, VoiceTokenStore::default(), assistant_config));
        let store = config.data_dir.clone().map(Store::new);

        for path in &config.dashboards {
            let text = std::fs::read_to_string(path).map_err(|e| StartupError::Dashboard {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            assistant.load_dashboard(&text).map_err(|e| StartupError::Dashboard {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
        }
        if let Some(store) = &store {
            store.restore_dashboards(&assistant)?;
        }
        if assistant.dashboard_ids().is_empty() {
            assistant
                .load_dashboard(SAMPLE_DASHBOARD)
                .expect("bundled sample dashboard is valid");
        }
        if let Some(store) = &store {
            store.restore_sessions(&assistant)?;
        }
        Ok(Self { assistant, store })
    }
}

/// Serves `router` on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    state: AppState,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
