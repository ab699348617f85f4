//! LLM provider adapters and the retrying call wrapper.

mod chat;
mod mock;

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use async_trait::async_trait;
use reviewloop_core::prompt::ReviewRequest;
use tracing::warn;

pub use chat::ChatCompletionsProvider;
pub use mock::MockProvider;

use crate::config::{ProviderConfig, ProviderKind, Secret};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    #[error("provider rejected the API key ({status})")]
    Auth { status: u16 },
    #[error("provider call timed out after {0:?}")]
    Timeout(Duration),
    #[error("provider rejected the request ({status}): {message}")]
    Rejected { status: u16, message: String },
    #[error("transient provider error: {0}")]
    Transient(String),
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Timeout(_) | Self::Transient(_))
    }
}

#[async_trait]
pub trait ReviewProvider: Send + Sync {
    /// One completion for one prompt. No retries at this level.
    async fn complete(&self, req: &ReviewRequest) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
}

impl RetryPolicy {
    pub fn from_config(cfg: &ProviderConfig) -> Self {
        Self {
            timeout: Duration::from_secs(cfg.timeout_seconds),
            max_retries: cfg.max_retries,
            backoff: Duration::from_millis(cfg.backoff_ms),
        }
    }

    /// Sleep before retry number `attempt` (1-based).
    pub fn delay(&self, attempt: u32) -> Duration {
        self.backoff * 2u32.saturating_pow(attempt.saturating_sub(1))
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self::from_config(&ProviderConfig::default())
    }
}

/// Calls the provider, bounding each attempt by the timeout and retrying
/// timeouts and transient errors with exponential backoff.
pub async fn call_provider(
    provider: &dyn ReviewProvider,
    req: &ReviewRequest,
    policy: &RetryPolicy,
) -> Result<String, ProviderError> {
    let mut attempt = 0;
    loop {
        let result = match tokio::time::timeout(policy.timeout, provider.complete(req)).await {
            Ok(r) => r,
            Err(_) => Err(ProviderError::Timeout(policy.timeout)),
        };
        match result {
            Err(e) if e.is_retryable() && attempt < policy.max_retries => {
                attempt += 1;
                let wait = policy.delay(attempt);
                warn!(file = %req.file_path, attempt, ?wait, error = %e, "provider call failed, retrying");
                tokio::time::sleep(wait).await;
            }
            other => return other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderSetupError {
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("{0}")]
    Client(String),
}

/// Builds the configured provider. A chat provider without a key is not an
/// error here: the credentials guardrail reports it on every trigger.
pub fn from_config(
    cfg: &ProviderConfig,
) -> Result<(Arc<dyn ReviewProvider>, bool), ProviderSetupError> {
    match cfg.kind {
        ProviderKind::Mock => Ok((Arc::new(MockProvider), true)),
        ProviderKind::Chat => {
            let key = Secret::from_env(&cfg.credential_ref);
            let present = key.is_some();
            let provider = ChatCompletionsProvider::new(
                &cfg.endpoint_url,
                &cfg.model_name,
                key.unwrap_or_else(|| Secret::new("")),
            )
            .map_err(|e| ProviderSetupError::Client(e.to_string()))?;
            Ok((Arc::new(provider), present))
        }
    }
}

/// Replays a fixed list of outcomes, then falls back to the mock. For tests.
#[derive(Debug, Default)]
pub struct ScriptedProvider {
    script: Mutex<VecDeque<Result<String, ProviderError>>>,
    calls: AtomicUsize,
    delay: Option<Duration>,
}

impl ScriptedProvider {
    pub fn new(script: impl IntoIterator<Item = Result<String, ProviderError>>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            calls: AtomicUsize::new(0),
            delay: None,
        }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = Some(delay);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

#[async_trait]
impl ReviewProvider for ScriptedProvider {
    async fn complete(&self, req: &ReviewRequest) -> Result<String, ProviderError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(d) = self.delay {
            tokio::time::sleep(d).await;
        }
        let next = self.script.lock().expect("script lock").pop_front();
        match next {
            Some(r) => r,
            None => MockProvider.complete(req).await,
        }
    }
}
