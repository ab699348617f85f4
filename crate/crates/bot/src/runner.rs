//! Trigger handling: guardrails, prompt building, provider calls, posting.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use futures::stream::{self, StreamExt};
use reviewloop_core::comment::{review_comment_body, FAILURE_HEADER};
use reviewloop_core::guardrails::{
    check_credentials, check_files, render_rejection_comment, FileChange, GuardrailPolicy, RuleId,
};
use reviewloop_core::prompt::{PromptBuilder, PromptError};
use reviewloop_core::Instant;
use serde::Serialize;
use tracing::{debug, info, warn};

use crate::config::{PayloadMode, DEFAULT_CREDENTIAL_REF, DEFAULT_MAX_COMMENT_CHARS};
use crate::host::{ChangedFile, CodeHost, HostError};
use crate::ledger::{Claim, DeliveryLedger};
use crate::provider::{call_provider, ProviderError, RetryPolicy, ReviewProvider};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TriggerEvent {
    pub repo_id: String,
    pub pr_number: u64,
    pub head_sha: String,
    pub delivery_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ReviewOutcome {
    Posted {
        comment_body: String,
        comment_ids: Vec<u64>,
        posted_at: Instant,
    },
    Failed {
        rule_id: String,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReviewResult {
    pub file_path: String,
    #[serde(flatten)]
    pub outcome: ReviewOutcome,
}

impl ReviewResult {
    pub fn is_posted(&self) -> bool {
        matches!(self.outcome, ReviewOutcome::Posted { .. })
    }

    fn failed(path: &str, rule_id: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            file_path: path.to_string(),
            outcome: ReviewOutcome::Failed {
                rule_id: rule_id.into(),
                message: message.into(),
            },
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error(transparent)]
    Host(#[from] HostError),
    #[error("delivery ledger: {0}")]
    Ledger(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct RunnerSettings {
    pub parallelism: usize,
    pub payload_mode: PayloadMode,
    pub max_comment_chars: usize,
    pub chunk_comments: bool,
    pub credential_ref: String,
    /// Whether the provider key was found at startup.
    pub credentials_present: bool,
}

impl Default for RunnerSettings {
    fn default() -> Self {
        Self {
            parallelism: 2,
            payload_mode: PayloadMode::FullFile,
            max_comment_chars: DEFAULT_MAX_COMMENT_CHARS,
            chunk_comments: true,
            credential_ref: DEFAULT_CREDENTIAL_REF.into(),
            credentials_present: true,
        }
    }
}

type PrKey = (String, u64);

pub struct ReviewService {
    host: Arc<dyn CodeHost>,
    provider: Arc<dyn ReviewProvider>,
    policy: GuardrailPolicy,
    prompts: PromptBuilder,
    retry: RetryPolicy,
    settings: RunnerSettings,
    ledger: Arc<DeliveryLedger>,
    pr_locks: Mutex<HashMap<PrKey, Arc<tokio::sync::Mutex<()>>>>,
}

/// Splits an over-long comment into numbered parts of at most `max_chars`
/// characters of content each.
pub fn split_comment(body: &str, max_chars: usize) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    if chars.len() <= max_chars {
        return vec![body.to_string()];
    }
    let pieces: Vec<String> = chars
        .chunks(max_chars.max(1))
        .map(|c| c.iter().collect())
        .collect();
    let total = pieces.len();
    pieces
        .into_iter()
        .enumerate()
        .map(|(i, p)| format!("{p}\n\n(part {} of {total})", i + 1))
        .collect()
}

fn provider_failure(err: &ProviderError, credential_ref: &str) -> (String, String) {
    match err {
        ProviderError::Auth { .. } => {
            let v = check_credentials(true, false, credential_ref);
            (RuleId::Credentials.to_string(), v.rejections()[0].message.clone())
        }
        ProviderError::Timeout(_) => (
            "provider-timeout".into(),
            format!("{err}. The file may be too large to review in one call; split the change and push again."),
        ),
        ProviderError::Rejected { .. } => (
            "provider-rejected".into(),
            format!("{err}. Reduce the size of this file's change and push again."),
        ),
        ProviderError::Transient(_) | ProviderError::MalformedResponse(_) => (
            "provider-error".into(),
            format!("{err}. Push a new commit to re-run the review."),
        ),
    }
}

fn render_failure_comment(failures: &[ReviewResult]) -> String {
    let mut out = format!(
        "{FAILURE_HEADER}: no review could be produced for {} file(s).\n",
        failures.len()
    );
    for f in failures {
        if let ReviewOutcome::Failed { rule_id, message } = &f.outcome {
            out.push_str(&format!("\n- [{rule_id}] `{}`: {message}", f.file_path));
        }
    }
    out.push('\n');
    out
}

impl ReviewService {
    pub fn new(
        host: Arc<dyn CodeHost>,
        provider: Arc<dyn ReviewProvider>,
        policy: GuardrailPolicy,
    ) -> Self {
        Self {
            host,
            provider,
            policy,
            prompts: PromptBuilder::default(),
            retry: RetryPolicy::default(),
            settings: RunnerSettings::default(),
            ledger: Arc::new(DeliveryLedger::in_memory()),
            pr_locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn with_prompts(mut self, prompts: PromptBuilder) -> Self {
        self.prompts = prompts;
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_settings(mut self, settings: RunnerSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn with_ledger(mut self, ledger: Arc<DeliveryLedger>) -> Self {
        self.ledger = ledger;
        self
    }

    pub fn ledger(&self) -> &DeliveryLedger {
        &self.ledger
    }

    fn pr_lock(&self, repo: &str, pr: u64) -> Arc<tokio::sync::Mutex<()>> {
        self.pr_locks
            .lock()
            .expect("pr lock map")
            .entry((repo.to_string(), pr))
            .or_default()
            .clone()
    }

    /// Webhook path: deduplicates on the delivery id, then reviews the PR.
    /// A replayed delivery returns no results and posts nothing.
    pub async fn handle_trigger(
        &self,
        event: &TriggerEvent,
    ) -> Result<Vec<ReviewResult>, RunnerError> {
        if self.ledger.try_claim(&event.delivery_id) == Claim::Duplicate {
            info!(delivery = %event.delivery_id, "duplicate delivery ignored");
            return Ok(Vec::new());
        }
        let head = (!event.head_sha.is_empty()).then_some(event.head_sha.as_str());
        match self.review_pr(&event.repo_id, event.pr_number, head).await {
            Ok(results) => {
                self.ledger.complete(&event.delivery_id)?;
                Ok(results)
            }
            Err(e) => {
                self.ledger.release(&event.delivery_id);
                Err(e)
            }
        }
    }

    /// Reviews one PR without touching the ledger (CLI mode).
    pub async fn review_pr(
        &self,
        repo: &str,
        pr: u64,
        head_sha: Option<&str>,
    ) -> Result<Vec<ReviewResult>, RunnerError> {
        let lock = self.pr_lock(repo, pr);
        let _guard = lock.lock().await;

        let files = self.host.changed_files(repo, pr, head_sha).await?;
        debug!(repo, pr, files = files.len(), "fetched changed files");

        let mut verdict = if self.policy.require_credentials {
            check_credentials(
                self.settings.credentials_present,
                true,
                &self.settings.credential_ref,
            )
        } else {
            reviewloop_core::guardrails::GuardrailVerdict::pass()
        };
        let changes: Vec<FileChange<'_>> = files
            .iter()
            .map(|f| FileChange {
                path: &f.path,
                added_lines: f.additions,
                removed_lines: f.deletions,
                deleted: f.is_removed(),
                content: f.content.as_deref().map(str::as_bytes),
            })
            .collect();
        verdict = verdict.merge(check_files(&changes, &self.policy));

        if !verdict.is_pass() {
            info!(repo, pr, rules = ?verdict.rules(), "trigger rejected by guardrails");
            self.post(repo, pr, &render_rejection_comment(&verdict))
                .await?;
            let first = &verdict.rejections()[0];
            return Ok(files
                .iter()
                .map(|f| {
                    let r = verdict.reason_for(&f.path).unwrap_or(first);
                    ReviewResult::failed(&f.path, r.rule.as_str(), r.message.clone())
                })
                .collect());
        }

        let reviewable: Vec<(&ChangedFile, &str)> = files
            .iter()
            .filter(|f| !f.is_removed())
            .filter_map(|f| {
                let payload = match self.settings.payload_mode {
                    PayloadMode::FullFile => f.content.as_deref().or(f.patch.as_deref()),
                    PayloadMode::Diff => f.patch.as_deref(),
                };
                match payload.filter(|p| !p.trim().is_empty()) {
                    Some(p) => Some((f, p)),
                    None => {
                        debug!(path = %f.path, "nothing to review");
                        None
                    }
                }
            })
            .collect();

        let calls: Vec<_> = reviewable
            .iter()
            .map(|(f, payload)| self.review_file(f.path.clone(), payload.to_string()))
            .collect();
        let reviews: Vec<Result<String, ProviderError>> = stream::iter(calls)
            .buffered(self.settings.parallelism.max(1))
            .collect()
            .await;

        let mut results = Vec::with_capacity(reviewable.len());
        let mut failures = Vec::new();
        for ((file, _), review) in reviewable.iter().zip(reviews) {
            match review {
                Ok(text) => {
                    let body = review_comment_body(&file.path, &text);
                    let r = self.post_review(repo, pr, &file.path, body).await?;
                    if !r.is_posted() {
                        failures.push(r.clone());
                    }
                    results.push(r);
                }
                Err(e) => {
                    warn!(path = %file.path, error = %e, "provider call failed");
                    let (rule, message) = provider_failure(&e, &self.settings.credential_ref);
                    let failed = ReviewResult::failed(&file.path, rule, message);
                    failures.push(failed.clone());
                    results.push(failed);
                }
            }
        }
        if !failures.is_empty() {
            self.post(repo, pr, &render_failure_comment(&failures))
                .await?;
        }
        Ok(results)
    }

    async fn review_file(&self, path: String, payload: String) -> Result<String, ProviderError> {
        let requests = match self.prompts.requests_for_file(&path, &payload) {
            Ok(r) => r,
            Err(PromptError::EmptyPayload) => return Ok(String::new()),
            Err(e) => return Err(ProviderError::MalformedResponse(e.to_string())),
        };
        let mut texts = Vec::with_capacity(requests.len());
        for req in &requests {
            texts.push(call_provider(self.provider.as_ref(), req, &self.retry).await?);
        }
        Ok(texts
            .iter()
            .map(|t| t.trim_end())
            .collect::<Vec<_>>()
            .join("\n\n"))
    }

    async fn post_review(
        &self,
        repo: &str,
        pr: u64,
        path: &str,
        body: String,
    ) -> Result<ReviewResult, RunnerError> {
        let limit = self.settings.max_comment_chars;
        if !self.settings.chunk_comments && body.chars().count() > limit {
            return Ok(ReviewResult::failed(
                path,
                "comment-too-large",
                format!("The review for this file exceeds {limit} characters and comment splitting is disabled."),
            ));
        }
        let mut ids = Vec::new();
        let mut posted_at = None;
        for part in split_comment(&body, limit) {
            let c = self.host.post_comment(repo, pr, &part).await?;
            posted_at.get_or_insert(c.created_at);
            ids.push(c.id);
        }
        Ok(ReviewResult {
            file_path: path.to_string(),
            outcome: ReviewOutcome::Posted {
                comment_body: body,
                comment_ids: ids,
                posted_at: posted_at.expect("at least one part"),
            },
        })
    }

    async fn post(&self, repo: &str, pr: u64, body: &str) -> Result<(), RunnerError> {
        for part in split_comment(body, self.settings.max_comment_chars) {
            self.host.post_comment(repo, pr, &part).await?;
        }
        Ok(())
    }
}
