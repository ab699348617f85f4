use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::Instant;

pub const DEFAULT_BOT_LOGINS: [&str; 2] = ["cr-gpt[bot]", "github-actions[bot]"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("pull request number must be positive")]
    ZeroPrNumber,
    #[error("commit sha {0:?} is not 7-40 hex characters")]
    BadSha(String),
    #[error("commit {0} appears twice in one pull request")]
    DuplicateSha(String),
}

/// Logins whose comments count as bot output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BotLogins(BTreeSet<String>);

impl BotLogins {
    pub fn new<I, S>(logins: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(logins.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, login: &str) -> bool {
        self.0.contains(login)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl Default for BotLogins {
    fn default() -> Self {
        Self::new(DEFAULT_BOT_LOGINS)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub author_login: String,
    pub body: String,
    pub created_at: Instant,
    pub is_bot: bool,
}

impl CommentRecord {
    pub fn new(
        author_login: impl Into<String>,
        body: impl Into<String>,
        created_at: Instant,
        bots: &BotLogins,
    ) -> Self {
        let author_login = author_login.into();
        let is_bot = bots.contains(&author_login);
        Self {
            author_login,
            body: body.into(),
            created_at,
            is_bot,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub sha: String,
    pub message: String,
    pub committed_at: Instant,
}

impl CommitRecord {
    pub fn new(
        sha: impl Into<String>,
        message: impl Into<String>,
        committed_at: Instant,
    ) -> Result<Self, RecordError> {
        let sha = sha.into();
        if !is_valid_sha(&sha) {
            return Err(RecordError::BadSha(sha));
        }
        Ok(Self {
            sha,
            message: message.into(),
            committed_at,
        })
    }
}

pub(crate) fn is_valid_sha(sha: &str) -> bool {
    (7..=40).contains(&sha.len()) && sha.bytes().all(|b| b.is_ascii_hexdigit())
}

/// One pull request with its conversation and commits.
///
/// Comments and commits are kept sorted by timestamp; ties keep input order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PullRequestRecord {
    pub repo_id: String,
    pub pr_number: u64,
    pub created_at: Instant,
    pub author: String,
    comments: Vec<CommentRecord>,
    commits: Vec<CommitRecord>,
}

impl PullRequestRecord {
    pub fn new(
        repo_id: impl Into<String>,
        pr_number: u64,
        created_at: Instant,
        author: impl Into<String>,
        mut comments: Vec<CommentRecord>,
        mut commits: Vec<CommitRecord>,
    ) -> Result<Self, RecordError> {
        if pr_number == 0 {
            return Err(RecordError::ZeroPrNumber);
        }
        let mut seen = HashSet::with_capacity(commits.len());
        for commit in &commits {
            if !seen.insert(commit.sha.as_str()) {
                return Err(RecordError::DuplicateSha(commit.sha.clone()));
            }
        }
        comments.sort_by_key(|c| c.created_at);
        commits.sort_by_key(|c| c.committed_at);
        Ok(Self {
            repo_id: repo_id.into(),
            pr_number,
            created_at,
            author: author.into(),
            comments,
            commits,
        })
    }

    pub fn comments(&self) -> &[CommentRecord] {
        &self.comments
    }

    pub fn commits(&self) -> &[CommitRecord] {
        &self.commits
    }

    pub fn key(&self) -> (&str, u64) {
        (&self.repo_id, self.pr_number)
    }
}

/// How a pull request engaged with the AI reviewer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngagementStatus {
    SuccessfulAiReview,
    FailedAiAttempt,
    NoAiAttempt,
}

impl EngagementStatus {
    pub const ALL: [Self; 3] = [
        Self::SuccessfulAiReview,
        Self::FailedAiAttempt,
        Self::NoAiAttempt,
    ];

    pub fn is_ai_attempt(self) -> bool {
        !matches!(self, Self::NoAiAttempt)
    }
}

impl fmt::Display for EngagementStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::SuccessfulAiReview => "Successful AI Review",
            Self::FailedAiAttempt => "Failed AI Attempt",
            Self::NoAiAttempt => "No AI Attempt",
        })
    }
}
