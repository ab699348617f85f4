use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::Args;
use reviewloop_bot::config::{BotConfig, HostKind, PayloadMode, Secret};
use reviewloop_bot::host::{CodeHost, GitHubClient, HostSnapshot, InMemoryHost, RecordingHost};
use reviewloop_bot::ledger::DeliveryLedger;
use reviewloop_bot::provider::{self, RetryPolicy};
use reviewloop_bot::runner::RunnerSettings;
use reviewloop_bot::webhook::{self, AppState};
use reviewloop_bot::ReviewService;
use reviewloop_core::prompt::{PromptBuilder, PromptTemplate};
use serde_json::json;

use crate::UsageError;

#[derive(Args)]
pub struct ReviewArgs {
    /// Repository as owner/name.
    #[arg(long)]
    repo: String,
    #[arg(long)]
    pr: u64,
    /// Print the comments instead of posting them.
    #[arg(long)]
    dry_run: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Revision to review (defaults to the PR head).
    #[arg(long)]
    head_sha: Option<String>,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<BotConfig> {
    match path {
        Some(p) => BotConfig::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(BotConfig::default()),
    }
}

pub fn host_from_config(cfg: &BotConfig) -> anyhow::Result<Arc<dyn CodeHost>> {
    Ok(match cfg.host.kind {
        HostKind::Github => {
            let token = Secret::from_env(&cfg.host.token_env);
            if token.is_none() {
                tracing::warn!(
                    "{} is not set; calling the code host anonymously",
                    cfg.host.token_env
                );
            }
            let client = GitHubClient::new(&cfg.host.api_url, token)?
                .with_content(cfg.bot.payload_mode == PayloadMode::FullFile);
            Arc::new(client)
        }
        HostKind::Fixture => {
            let path = cfg.host.fixture_path.as_deref().expect("validated");
            Arc::new(InMemoryHost::new(
                HostSnapshot::load(path)?,
                cfg.bot.login.clone(),
            ))
        }
    })
}

fn service_from_config(cfg: &BotConfig, host: Arc<dyn CodeHost>) -> anyhow::Result<ReviewService> {
    let (provider, credentials_present) = provider::from_config(&cfg.provider)?;
    let template = match &cfg.bot.prompt_template {
        Some(p) => PromptTemplate::load(p)?,
        None => PromptTemplate::canonical(),
    };
    let prompts = PromptBuilder::new(template, cfg.bot.max_payload_chars)?;
    let mut service = ReviewService::new(host, provider, cfg.guardrails.clone())
        .with_prompts(prompts)
        .with_retry(RetryPolicy::from_config(&cfg.provider))
        .with_settings(RunnerSettings {
            parallelism: cfg.bot.parallelism,
            payload_mode: cfg.bot.payload_mode,
            max_comment_chars: cfg.bot.max_comment_chars,
            chunk_comments: cfg.bot.chunk_comments,
            credential_ref: cfg.provider.credential_ref.clone(),
            credentials_present,
        });
    if let Some(path) = &cfg.bot.ledger_path {
        let ledger = DeliveryLedger::open(path)
            .with_context(|| format!("opening ledger {}", path.display()))?;
        service = service.with_ledger(Arc::new(ledger));
    }
    Ok(service)
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?)
}

pub fn review(args: ReviewArgs) -> anyhow::Result<()> {
    if args.repo.split('/').filter(|s| !s.is_empty()).count() != 2 {
        return Err(UsageError(format!("--repo must be owner/name, got {:?}", args.repo)).into());
    }
    if args.pr == 0 {
        return Err(UsageError("--pr must be positive".into()).into());
    }
    let cfg = load_config(args.config.as_deref())?;
    let host = host_from_config(&cfg)?;
    let recorder = args
        .dry_run
        .then(|| Arc::new(RecordingHost::new(host.clone(), cfg.bot.login.clone())));
    let target: Arc<dyn CodeHost> = match &recorder {
        Some(r) => r.clone(),
        None => host,
    };
    let service = service_from_config(&cfg, target)?;
    let results =
        runtime()?.block_on(service.review_pr(&args.repo, args.pr, args.head_sha.as_deref()))?;

    let posted = results.iter().filter(|r| r.is_posted()).count();
    eprintln!(
        "{}#{}: {posted} file(s) reviewed, {} failed",
        args.repo,
        args.pr,
        results.len() - posted
    );
    match recorder {
        Some(r) => {
            for c in r.recorded() {
                println!(
                    "{}",
                    json!({ "repo": c.repo, "pr": c.pr, "author_login": c.author_login, "body": c.body })
                );
            }
        }
        None => {
            for r in &results {
                println!("{}", serde_json::to_string(r)?);
            }
        }
    }
    Ok(())
}

pub fn serve(config: &Path) -> anyhow::Result<()> {
    let cfg = load_config(Some(config))?;
    let host = host_from_config(&cfg)?;
    let service = Arc::new(service_from_config(&cfg, host)?);
    let secret = match &cfg.bot.webhook_secret_env {
        Some(name) => Some(
            Secret::from_env(name)
                .ok_or_else(|| anyhow::anyhow!("webhook secret variable {name} is not set"))?,
        ),
        None => None,
    };
    let state = AppState::new(service, secret);
    runtime()?.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&cfg.bot.listen)
            .await
            .with_context(|| format!("binding {}", cfg.bot.listen))?;
        eprintln!("listening on {}", listener.local_addr()?);
        tokio::select! {
            r = webhook::serve(listener, state.clone()) => r?,
            _ = tokio::signal::ctrl_c() => {
                eprintln!("shutting down; waiting for in-flight reviews");
                tokio::time::timeout(Duration::from_secs(30), state.drain()).await.ok();
            }
        }
        Ok(())
    })
}
