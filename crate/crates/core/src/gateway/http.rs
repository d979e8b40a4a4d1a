use std::time::Duration;

use async_trait::async_trait;
use serde::Deserialize;

use super::{ApiKey, ChatProvider, ChatRequest, GatewayError};

/// Chat-completion client: one POST per request, bearer-key auth, and a
/// reply read from `choices[0].message.content` (or a top-level `content`).
pub struct HttpProvider {
    client: reqwest::Client,
    endpoint: String,
    model: String,
    key: ApiKey,
    timeout_ms: u64,
}

#[derive(Deserialize)]
struct CompletionReply {
    #[serde(default)]
    choices: Vec<Choice>,
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct Choice {
    message: ReplyMessage,
}

#[derive(Deserialize)]
struct ReplyMessage {
    content: String,
}

impl HttpProvider {
    pub fn new(endpoint: String, model: String, key: ApiKey, timeout_ms: u64) -> Result<Self, GatewayError> {
        let client = reqwest::Client::builder()
            .timeout(Duration::from_millis(timeout_ms))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        Ok(Self {
            client,
            endpoint,
            model,
            key,
            timeout_ms,
        })
    }
}

#[async_trait]
impl ChatProvider for HttpProvider {
    async fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        let mut body = request.clone();
        if body.model.is_empty() {
            body.model = self.model.clone();
        }
        let response = self
            .client
            .post(&self.endpoint)
            .bearer_auth(self.key.expose())
            .json(&body)
            .send()
            .await
            .map_err(|e| self.classify(e))?;
        let status = response.status();
        if !status.is_success() {
            tracing::warn!(status = status.as_u16(), "chat provider refused request");
            return Err(GatewayError::Refused {
                status: status.as_u16(),
            });
        }
        let reply: CompletionReply = response.json().await.map_err(|e| self.classify(e))?;
        reply
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .or(reply.content)
            .ok_or_else(|| GatewayError::Transport("reply carried no message content".into()))
    }
}

impl HttpProvider {
    fn classify(&self, err: reqwest::Error) -> GatewayError {
        if err.is_timeout() {
            GatewayError::Timeout {
                after_ms: self.timeout_ms,
            }
        } else {
            // strip the URL so nothing request-specific leaks into logs
            GatewayError::Transport(err.without_url().to_string())
        }
    }
}
