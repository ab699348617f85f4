//! `reviewloop`: run the review bot, mine PR activity and report on it.

mod cohort;
mod demo;
mod review;
mod telemetry_cmds;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tracing_subscriber::EnvFilter;

/// Bad input from the command line: reported with exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

#[derive(Parser)]
#[command(
    name = "reviewloop",
    version,
    about = "LLM checklist review bot and PR engagement telemetry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the webhook service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Review one pull request now (CI mode).
    Review(review::ReviewArgs),
    /// Validate and normalize PR, comment and commit records.
    Ingest(telemetry_cmds::IngestArgs),
    /// Classify PRs and compute weekly engagement metrics for one cohort.
    Analyze(telemetry_cmds::AnalyzeArgs),
    /// Emit the cross-cohort TSV report and digest.
    Report(telemetry_cmds::ReportArgs),
    /// Replay the PR #129 trace through the bot and the telemetry pipeline.
    Demo,
}

/// Options shared by the commands that classify records.
#[derive(Args, Clone, Debug, Default)]
pub struct ClassifyOpts {
    /// Comma-separated bot accounts (default: cr-gpt[bot],github-actions[bot]).
    #[arg(long, value_delimiter = ',')]
    pub bot_logins: Vec<String>,
    /// Text that marks a successful review comment.
    #[arg(long)]
    pub success_header: Option<String>,
    /// Count a team as using the bot only if it got a successful review.
    #[arg(long)]
    pub strict_teams: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let result = match cli.command {
        Command::Serve { config } => review::serve(&config),
        Command::Review(args) => review::review(args),
        Command::Ingest(args) => telemetry_cmds::ingest(args),
        Command::Analyze(args) => telemetry_cmds::analyze(args),
        Command::Report(args) => telemetry_cmds::report(args),
        Command::Demo => demo::run(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// The error chain, skipping causes whose text the previous layer already shows.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<std::io::Error>()
            .map(std::io::Error::kind)
            .or_else(|| {
                c.downcast_ref::<serde_json::Error>()
                    .and_then(serde_json::Error::io_error_kind)
            });
        kind == Some(std::io::ErrorKind::BrokenPipe)
    })
}
