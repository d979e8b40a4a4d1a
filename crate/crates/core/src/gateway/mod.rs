//! Provider boundary for language-model calls and voice sessions.
//!
//! Two providers implement [`ChatProvider`]: [`MockProvider`], a pure
//! rule-based responder used by tests and replay, and [`HttpProvider`],
//! which speaks the common chat-completion message-list convention. The
//! [`VoiceTokenStore`] mints short-lived single-use tokens so browsers can
//! open voice sessions without ever seeing the primary key.

mod http;
mod mock;
mod tokens;

use std::fmt;
use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use crate::orchestrator::PromptDigest;

pub use http::HttpProvider;
pub use mock::{MockProvider, POLISH_INSTRUCTIONS};
pub use tokens::{
    Clock, EphemeralVoiceToken, ManualClock, SystemClock, TokenError, VoiceTokenStore, DEFAULT_TOKEN_TTL,
};

pub const DEFAULT_KEY_ENV_VAR: &str = "ONBOARD_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// Request body sent to chat providers: `{"model": ..., "messages": [...]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn system_text(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    pub fn last_user_text(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("provider did not answer within {after_ms} ms")]
    Timeout { after_ms: u64 },
    #[error("provider refused the request with status {status}")]
    Refused { status: u16 },
    #[error("provider transport failure: {0}")]
    Transport(String),
    #[error("provider misconfigured: {0}")]
    Config(String),
}

#[async_trait]
pub trait ChatProvider: Send + Sync {
    async fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProviderMode {
    #[default]
    Mock,
    Http,
}

impl std::str::FromStr for ProviderMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mock" => Ok(ProviderMode::Mock),
            "http" => Ok(ProviderMode::Http),
            other => Err(format!("unknown provider mode {other:?} (expected mock or http)")),
        }
    }
}

/// Provider settings. Holds the *name* of the variable carrying the key,
/// never the key itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct ProviderConfig {
    pub mode: ProviderMode,
    pub endpoint_url: Option<String>,
    pub model_name: String,
    pub api_key_env_var: String,
    pub request_timeout_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            mode: ProviderMode::Mock,
            endpoint_url: None,
            model_name: "mock".into(),
            api_key_env_var: DEFAULT_KEY_ENV_VAR.into(),
            request_timeout_ms: 20_000,
        }
    }
}

/// The primary provider key. Not serializable; `Debug` is redacted.
#[derive(Clone)]
pub struct ApiKey(String);

impl ApiKey {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    pub fn from_env(var: &str) -> Result<Self, GatewayError> {
        match std::env::var(var) {
            Ok(v) if !v.is_empty() => Ok(Self(v)),
            _ => Err(GatewayError::Config(format!("environment variable {var} is not set"))),
        }
    }

    pub(crate) fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for ApiKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ApiKey(***)")
    }
}

/// Builds the provider named by `config`, reading the key from the
/// configured environment variable in HTTP mode.
pub fn build_provider(config: &ProviderConfig) -> Result<Arc<dyn ChatProvider>, GatewayError> {
    match config.mode {
        ProviderMode::Mock => Ok(Arc::new(MockProvider::new())),
        ProviderMode::Http => {
            let endpoint = config
                .endpoint_url
                .clone()
                .filter(|u| !u.is_empty())
                .ok_or_else(|| GatewayError::Config("http mode requires endpointUrl".into()))?;
            if config.api_key_env_var.is_empty() {
                return Err(GatewayError::Config("http mode requires apiKeyEnvVar".into()));
            }
            let key = ApiKey::from_env(&config.api_key_env_var)?;
            Ok(Arc::new(HttpProvider::new(
                endpoint,
                config.model_name.clone(),
                key,
                config.request_timeout_ms,
            )?))
        }
    }
}

/// Sends one chat turn: the digest as system context, the history window,
/// then the user's text.
pub async fn complete_chat(
    provider: &dyn ChatProvider,
    model: &str,
    digest: &PromptDigest,
    user_text: &str,
) -> Result<String, GatewayError> {
    let request = ChatRequest {
        model: model.to_string(),
        messages: digest.to_messages(user_text),
    };
    provider.complete(&request).await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn api_key_debug_is_redacted() {
        let key = ApiKey::new("sk-very-secret");
        assert_eq!(format!("{key:?}"), "ApiKey(***)");
    }

    #[test]
    fn http_mode_requires_endpoint() {
        let config = ProviderConfig {
            mode: ProviderMode::Http,
            ..Default::default()
        };
        assert!(matches!(build_provider(&config), Err(GatewayError::Config(_))));
    }

    #[test]
    fn http_mode_requires_key_var() {
        let config = ProviderConfig {
            mode: ProviderMode::Http,
            endpoint_url: Some("http://127.0.0.1:9/v1/chat".into()),
            api_key_env_var: "ONBOARD_TEST_SURELY_UNSET_VAR".into(),
            ..Default::default()
        };
        assert!(matches!(build_provider(&config), Err(GatewayError::Config(_))));
    }

    #[test]
    fn config_serializes_without_key_value() {
        let json = serde_json::to_string(&ProviderConfig::default()).unwrap();
        assert!(json.contains("\"apiKeyEnvVar\":\"ONBOARD_API_KEY\""));
    }
}
