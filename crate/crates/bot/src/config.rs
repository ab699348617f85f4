//! Service configuration, read from a TOML file with `[provider]`,
//! `[guardrails]`, `[host]` and `[bot]` sections.

use std::fmt;
use std::path::{Path, PathBuf};

use reviewloop_core::guardrails::{GuardrailPolicy, PolicyError};
use reviewloop_core::prompt::{DEFAULT_MAX_PAYLOAD_CHARS, MIN_PAYLOAD_CHARS};
use serde::Deserialize;

use crate::host::DEFAULT_API_URL;

pub const DEFAULT_CREDENTIAL_REF: &str = "LLM_API_KEY";
pub const DEFAULT_HOST_TOKEN_ENV: &str = "HOST_TOKEN";
pub const DEFAULT_BOT_LOGIN: &str = "github-actions[bot]";
/// Leaves room under GitHub's 65536-character comment limit for the part suffix.
pub const DEFAULT_MAX_COMMENT_CHARS: usize = 60_000;

/// A credential value. Never printed, never serialized.
#[derive(Clone, PartialEq, Eq)]
pub struct Secret(String);

impl Secret {
    pub fn new(value: impl Into<String>) -> Self {
        Self(value.into())
    }

    /// Reads the variable; unset and empty are both treated as missing.
    pub fn from_env(name: &str) -> Option<Self> {
        std::env::var(name)
            .ok()
            .filter(|v| !v.trim().is_empty())
            .map(Self)
    }

    pub fn expose(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Secret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Secret([redacted])")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid guardrails: {0}")]
    Policy(#[from] PolicyError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    #[default]
    Chat,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key.
    pub credential_ref: String,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            kind: ProviderKind::Chat,
            endpoint_url: "https://api.openai.com/v1/chat/completions".into(),
            model_name: "gpt-4".into(),
            credential_ref: DEFAULT_CREDENTIAL_REF.into(),
            timeout_seconds: 120,
            max_retries: 2,
            backoff_ms: 500,
        }
    }
}

impl ProviderConfig {
    pub fn mock() -> Self {
        Self {
            kind: ProviderKind::Mock,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostKind {
    #[default]
    Github,
    /// Serves a JSON snapshot from `fixture_path`; nothing leaves the process.
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HostConfig {
    pub kind: HostKind,
    pub api_url: String,
    pub token_env: String,
    pub fixture_path: Option<PathBuf>,
    /// Repositories mined by `ingest` when no `--data` directory is given.
    pub repos: Vec<String>,
}

impl Default for HostConfig {
    fn default() -> Self {
        Self {
            kind: HostKind::Github,
            api_url: DEFAULT_API_URL.into(),
            token_env: DEFAULT_HOST_TOKEN_ENV.into(),
            fixture_path: None,
            repos: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayloadMode {
    /// Post-change content of each changed file.
    #[default]
    FullFile,
    /// The file's diff hunks only.
    Diff,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BotSettings {
    pub login: String,
    pub listen: String,
    pub ledger_path: Option<PathBuf>,
    pub parallelism: usize,
    pub payload_mode: PayloadMode,
    pub max_payload_chars: usize,
    pub max_comment_chars: usize,
    pub chunk_comments: bool,
    pub prompt_template: Option<PathBuf>,
    pub webhook_secret_env: Option<String>,
}

impl Default for BotSettings {
    fn default() -> Self {
        Self {
            login: DEFAULT_BOT_LOGIN.into(),
            listen: "127.0.0.1:8080".into(),
            ledger_path: None,
            parallelism: 2,
            payload_mode: PayloadMode::FullFile,
            max_payload_chars: DEFAULT_MAX_PAYLOAD_CHARS,
            max_comment_chars: DEFAULT_MAX_COMMENT_CHARS,
            chunk_comments: true,
            prompt_template: None,
            webhook_secret_env: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BotConfig {
    pub provider: ProviderConfig,
    pub guardrails: GuardrailPolicy,
    pub host: HostConfig,
    pub bot: BotSettings,
}

impl BotConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validated()
    }

    /// Loads and validates; relative paths are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut Option<PathBuf>| {
            if let Some(rel) = p.as_ref().filter(|p| p.is_relative()) {
                *p = Some(base.join(rel));
            }
        };
        resolve(&mut cfg.host.fixture_path);
        resolve(&mut cfg.bot.ledger_path);
        resolve(&mut cfg.bot.prompt_template);
        Ok(cfg)
    }

    fn validated(mut self) -> Result<Self, ConfigError> {
        self.guardrails = self.guardrails.validated()?;
        let p = &self.provider;
        if p.timeout_seconds == 0 {
            return Err(ConfigError::Invalid(
                "provider.timeout_seconds must be positive".into(),
            ));
        }
        if p.credential_ref.trim().is_empty() {
            return Err(ConfigError::Invalid(
                "provider.credential_ref is empty".into(),
            ));
        }
        if p.kind == ProviderKind::Chat && p.model_name.trim().is_empty() {
            return Err(ConfigError::Invalid("provider.model_name is empty".into()));
        }
        if self.bot.parallelism == 0 {
            return Err(ConfigError::Invalid(
                "bot.parallelism must be at least 1".into(),
            ));
        }
        if self.bot.max_payload_chars < MIN_PAYLOAD_CHARS {
            return Err(ConfigError::Invalid(format!(
                "bot.max_payload_chars must be at least {MIN_PAYLOAD_CHARS}"
            )));
        }
        if self.bot.max_comment_chars < MIN_PAYLOAD_CHARS {
            return Err(ConfigError::Invalid(format!(
                "bot.max_comment_chars must be at least {MIN_PAYLOAD_CHARS}"
            )));
        }
        if self.host.kind == HostKind::Fixture && self.host.fixture_path.is_none() {
            return Err(ConfigError::Invalid(
                "host.kind = \"fixture\" needs host.fixture_path".into(),
            ));
        }
        Ok(self)
    }
}
