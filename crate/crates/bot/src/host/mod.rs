//! Code-host access: listing a PR's changed files and posting comments.

mod github;
mod memory;

use async_trait::async_trait;
use reviewloop_core::Instant;
use serde::{Deserialize, Serialize};

pub use github::{GhComment, GhCommit, GhPull, GhUser, GitHubClient, DEFAULT_API_URL};
pub use memory::{
    Clock, FixtureComment, FixtureCommit, FixturePr, HostSnapshot, InMemoryHost, PostedRecord,
    RecordingHost, SnapshotFile,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileStatus {
    Added,
    Modified,
    Removed,
    Renamed,
    Copied,
    Changed,
    Unchanged,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangedFile {
    pub path: String,
    pub status: FileStatus,
    pub additions: u64,
    pub deletions: u64,
    /// Post-change file content.
    #[serde(default)]
    pub content: Option<String>,
    /// Unified diff hunk(s) for the file.
    #[serde(default)]
    pub patch: Option<String>,
}

impl ChangedFile {
    pub fn is_removed(&self) -> bool {
        self.status == FileStatus::Removed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PostedComment {
    pub id: u64,
    pub created_at: Instant,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HostError {
    #[error("code host unreachable: {0}")]
    Unreachable(String),
    #[error("code host returned {status}: {message}")]
    Api { status: u16, message: String },
    #[error("pull request {repo}#{pr} not found")]
    NotFound { repo: String, pr: u64 },
}

#[async_trait]
pub trait CodeHost: Send + Sync {
    /// Changed files of a PR; `head_sha` pins the revision whose content is read.
    async fn changed_files(
        &self,
        repo: &str,
        pr: u64,
        head_sha: Option<&str>,
    ) -> Result<Vec<ChangedFile>, HostError>;

    async fn post_comment(
        &self,
        repo: &str,
        pr: u64,
        body: &str,
    ) -> Result<PostedComment, HostError>;
}
