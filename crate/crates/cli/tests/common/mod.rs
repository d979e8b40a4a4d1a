#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use onboard_core::orchestrator::{Assistant, AssistantConfig};
use onboard_core::sample::SAMPLE_DASHBOARD;
use onboard_core::{ChatProvider, MockProvider, VoiceTokenStore};
use onboard_server::{serve, AppState};

pub fn traces_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/traces")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden")
}

pub fn assistant_with(provider: Arc<dyn ChatProvider>) -> Arc<Assistant> {
    let assistant = Assistant::new(provider, VoiceTokenStore::default(), AssistantConfig::default());
    assistant.load_dashboard(SAMPLE_DASHBOARD).unwrap();
    Arc::new(assistant)
}

/// Serves `state` on an ephemeral port and returns its base URL.
pub async fn start(state: AppState) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    tokio::spawn(serve(listener, state, std::future::pending()));
    base
}

pub async fn start_mock() -> String {
    start(AppState::new(assistant_with(Arc::new(MockProvider::new())))).await
}
