use std::time::Duration;

use async_trait::async_trait;
use reqwest::StatusCode;
use reviewloop_core::prompt::ReviewRequest;
use serde::Deserialize;
use serde_json::json;

use super::{ProviderError, ReviewProvider};
use crate::config::Secret;

/// Adapter for OpenAI-style `chat/completions` endpoints.
pub struct ChatCompletionsProvider {
    http: reqwest::Client,
    endpoint: String,
    model: String,
    key: Secret,
}

#[derive(Deserialize)]
struct Completion {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

impl ChatCompletionsProvider {
    pub fn new(endpoint: &str, model: &str, key: Secret) -> Result<Self, reqwest::Error> {
        let http = reqwest::Client::builder()
            .connect_timeout(Duration::from_secs(10))
            .build()?;
        Ok(Self {
            http,
            endpoint: endpoint.to_string(),
            model: model.to_string(),
            key,
        })
    }
}

fn snippet(text: &str) -> String {
    text.chars().take(300).collect()
}

#[async_trait]
impl ReviewProvider for ChatCompletionsProvider {
    async fn complete(&self, req: &ReviewRequest) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": req.prompt_text }],
        });
        let resp = self
            .http
            .post(&self.endpoint)
            .bearer_auth(self.key.expose())
            .json(&body)
            .send()
            .await
            .map_err(|e| {
                if e.is_timeout() {
                    ProviderError::Transient("request timed out".into())
                } else {
                    ProviderError::Transient(e.without_url().to_string())
                }
            })?;
        let status = resp.status();
        if status.is_success() {
            let parsed: Completion = resp
                .json()
                .await
                .map_err(|e| ProviderError::MalformedResponse(e.to_string()))?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .filter(|t| !t.trim().is_empty())
                .ok_or_else(|| ProviderError::MalformedResponse("no completion text".into()));
        }
        let text = resp.text().await.unwrap_or_default();
        Err(match status {
            StatusCode::UNAUTHORIZED | StatusCode::FORBIDDEN => ProviderError::Auth {
                status: status.as_u16(),
            },
            StatusCode::REQUEST_TIMEOUT | StatusCode::TOO_MANY_REQUESTS => {
                ProviderError::Transient(format!("{status}"))
            }
            s if s.is_server_error() => ProviderError::Transient(format!("{status}")),
            s => ProviderError::Rejected {
                status: s.as_u16(),
                message: snippet(&text),
            },
        })
    }
}
