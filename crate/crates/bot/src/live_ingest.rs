//! Mines PR, comment and commit records straight from the GitHub API.

use reviewloop_core::domain::BotLogins;
use reviewloop_core::telemetry::{CommentRow, CommitRow, Dataset, IngestReport, PrRow, RawRecords};
use reviewloop_core::CohortCalendar;
use tracing::info;

use crate::host::{GitHubClient, HostError};

fn login(user: &Option<crate::host::GhUser>) -> String {
    user.as_ref()
        .map(|u| u.login.clone())
        .unwrap_or_else(|| "ghost".into())
}

/// Raw rows for every PR of every repository, in the same shape the
/// JSONL files use.
pub async fn fetch_raw(client: &GitHubClient, repos: &[String]) -> Result<RawRecords, HostError> {
    let mut raw = RawRecords::default();
    for repo in repos {
        let pulls = client.list_pulls(repo).await?;
        info!(repo = %repo, prs = pulls.len(), "mining repository");
        for pull in pulls {
            let number = pull.number as i64;
            raw.prs.push(PrRow {
                repo_id: repo.clone(),
                number,
                created_at: pull.created_at.clone(),
                author: login(&pull.user),
            });
            for c in client.pull_comments(repo, pull.number).await? {
                raw.comments.push(CommentRow {
                    repo_id: repo.clone(),
                    pr_number: number,
                    author_login: login(&c.user),
                    body: c.body.unwrap_or_default(),
                    created_at: c.created_at,
                });
            }
            for c in client.pull_commits(repo, pull.number).await? {
                let at = c
                    .commit
                    .committer
                    .or(c.commit.author)
                    .map(|p| p.date)
                    .unwrap_or_default();
                raw.commits.push(CommitRow {
                    repo_id: repo.clone(),
                    pr_number: number,
                    sha: c.sha,
                    message: c.commit.message,
                    committed_at: at,
                });
            }
        }
    }
    Ok(raw)
}

pub async fn ingest_live(
    client: &GitHubClient,
    repos: &[String],
    calendar: CohortCalendar,
    bots: &BotLogins,
) -> Result<(Dataset, IngestReport), HostError> {
    let raw = fetch_raw(client, repos).await?;
    Ok(Dataset::from_rows(calendar, raw, bots))
}
