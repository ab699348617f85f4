use std::collections::VecDeque;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use async_trait::async_trait;
use reviewloop_core::domain::{BotLogins, CommentRecord, CommitRecord, RecordError};
use reviewloop_core::{Instant, PullRequestRecord};
use serde::{Deserialize, Serialize};

use super::{ChangedFile, CodeHost, HostError, PostedComment};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCommit {
    pub sha: String,
    pub message: String,
    pub committed_at: Instant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureComment {
    pub author_login: String,
    pub body: String,
    pub created_at: Instant,
}

/// One pull request as served by [`InMemoryHost`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixturePr {
    pub repo: String,
    pub number: u64,
    #[serde(default)]
    pub head_sha: Option<String>,
    #[serde(default)]
    pub created_at: Option<Instant>,
    #[serde(default)]
    pub author: Option<String>,
    pub files: Vec<ChangedFile>,
    #[serde(default)]
    pub comments: Vec<FixtureComment>,
    #[serde(default)]
    pub commits: Vec<FixtureCommit>,
}

/// JSON document describing the pull requests a fixture host serves.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HostSnapshot {
    pub pull_requests: Vec<FixturePr>,
}

pub type SnapshotFile = HostSnapshot;

impl HostSnapshot {
    pub fn load(path: &Path) -> Result<Self, HostError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HostError::Unreachable(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| HostError::Unreachable(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PostedRecord {
    pub repo: String,
    pub pr: u64,
    pub id: u64,
    pub author_login: String,
    pub body: String,
    pub created_at: Instant,
}

/// Source of comment timestamps.
#[derive(Debug)]
pub enum Clock {
    System,
    /// Hands out the listed instants in order, then keeps adding one second.
    Scripted(VecDeque<Instant>, Option<Instant>),
}

impl Clock {
    pub fn scripted(instants: impl IntoIterator<Item = Instant>) -> Self {
        Self::Scripted(instants.into_iter().collect(), None)
    }

    fn tick(&mut self) -> Instant {
        match self {
            Self::System => Instant::from_utc(chrono::Utc::now()),
            Self::Scripted(queue, last) => {
                let next = queue
                    .pop_front()
                    .or_else(|| last.map(|l| l.plus_seconds(1)))
                    .unwrap_or_else(|| Instant::from_unix(0).expect("epoch"));
                *last = Some(next);
                next
            }
        }
    }
}

/// A code host held entirely in memory. Used by tests, `demo`, and
/// `review --dry-run` against a snapshot file.
#[derive(Debug)]
pub struct InMemoryHost {
    snapshot: HostSnapshot,
    bot_login: String,
    posted: Mutex<Vec<PostedRecord>>,
    clock: Mutex<Clock>,
    next_id: AtomicU64,
    unreachable: AtomicBool,
}

impl InMemoryHost {
    pub fn new(snapshot: HostSnapshot, bot_login: impl Into<String>) -> Self {
        Self {
            snapshot,
            bot_login: bot_login.into(),
            posted: Mutex::new(Vec::new()),
            clock: Mutex::new(Clock::System),
            next_id: AtomicU64::new(1),
            unreachable: AtomicBool::new(false),
        }
    }

    pub fn with_clock(self, clock: Clock) -> Self {
        *self.clock.lock().expect("clock lock") = clock;
        self
    }

    /// Makes every call fail with [`HostError::Unreachable`] until reset.
    pub fn set_unreachable(&self, down: bool) {
        self.unreachable.store(down, Ordering::SeqCst);
    }

    pub fn posted(&self) -> Vec<PostedRecord> {
        self.posted.lock().expect("posted lock").clone()
    }

    fn find(&self, repo: &str, pr: u64) -> Option<&FixturePr> {
        self.snapshot
            .pull_requests
            .iter()
            .find(|p| p.repo == repo && p.number == pr)
    }

    /// The PR as the telemetry pipeline would mine it, including comments
    /// posted through this host.
    pub fn pull_request_record(
        &self,
        repo: &str,
        pr: u64,
        bots: &BotLogins,
    ) -> Option<Result<PullRequestRecord, RecordError>> {
        let fixture = self.find(repo, pr)?;
        let mut comments: Vec<CommentRecord> = fixture
            .comments
            .iter()
            .map(|c| CommentRecord::new(&c.author_login, &c.body, c.created_at, bots))
            .collect();
        comments.extend(
            self.posted()
                .into_iter()
                .filter(|p| p.repo == repo && p.pr == pr)
                .map(|p| CommentRecord::new(p.author_login, p.body, p.created_at, bots)),
        );
        let commits: Result<Vec<CommitRecord>, RecordError> = fixture
            .commits
            .iter()
            .map(|c| CommitRecord::new(&c.sha, &c.message, c.committed_at))
            .collect();
        let created_at = fixture
            .created_at
            .unwrap_or_else(|| Instant::from_unix(0).expect("epoch"));
        Some(commits.and_then(|commits| {
            PullRequestRecord::new(
                repo,
                pr,
                created_at,
                fixture.author.clone().unwrap_or_default(),
                comments,
                commits,
            )
        }))
    }

    fn check_up(&self) -> Result<(), HostError> {
        if self.unreachable.load(Ordering::SeqCst) {
            Err(HostError::Unreachable("in-memory host marked down".into()))
        } else {
            Ok(())
        }
    }
}

#[async_trait]
impl CodeHost for InMemoryHost {
    async fn changed_files(
        &self,
        repo: &str,
        pr: u64,
        _head_sha: Option<&str>,
    ) -> Result<Vec<ChangedFile>, HostError> {
        self.check_up()?;
        self.find(repo, pr)
            .map(|p| p.files.clone())
            .ok_or_else(|| HostError::NotFound {
                repo: repo.to_string(),
                pr,
            })
    }

    async fn post_comment(
        &self,
        repo: &str,
        pr: u64,
        body: &str,
    ) -> Result<PostedComment, HostError> {
        self.check_up()?;
        if self.find(repo, pr).is_none() {
            return Err(HostError::NotFound {
                repo: repo.to_string(),
                pr,
            });
        }
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        let created_at = self.clock.lock().expect("clock lock").tick();
        self.posted.lock().expect("posted lock").push(PostedRecord {
            repo: repo.to_string(),
            pr,
            id,
            author_login: self.bot_login.clone(),
            body: body.to_string(),
            created_at,
        });
        Ok(PostedComment { id, created_at })
    }
}

/// Reads from an inner host but keeps comments to itself (`--dry-run`).
pub struct RecordingHost {
    inner: Arc<dyn CodeHost>,
    bot_login: String,
    recorded: Mutex<Vec<PostedRecord>>,
    next_id: AtomicU64,
}

impl RecordingHost {
    pub fn new(inner: Arc<dyn CodeHost>, bot_login: impl Into<String>) -> Self {
        Self {
            inner,
            bot_login: bot_login.into(),
            recorded: Mutex::new(Vec::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn recorded(&self) -> Vec<PostedRecord> {
        self.recorded.lock().expect("recorded lock").clone()
    }
}

#[async_trait]
impl CodeHost for RecordingHost {
    async fn changed_files(
        &self,
        repo: &str,
        pr: u64,
        head_sha: Option<&str>,
    ) -> Result<Vec<ChangedFile>, HostError> {
        self.inner.changed_files(repo, pr, head_sha).await
    }

    async fn post_comment(
        &self,
        repo: &str,
        pr: u64,
        body: &str,
    ) -> Result<PostedComment, HostError> {
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        let created_at = Instant::from_utc(chrono::Utc::now());
        self.recorded
            .lock()
            .expect("recorded lock")
            .push(PostedRecord {
                repo: repo.to_string(),
                pr,
                id,
                author_login: self.bot_login.clone(),
                body: body.to_string(),
                created_at,
            });
        Ok(PostedComment { id, created_at })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::host::FileStatus;

    fn snapshot() -> HostSnapshot {
        HostSnapshot {
            pull_requests: vec![FixturePr {
                repo: "o/r".into(),
                number: 9,
                head_sha: None,
                created_at: Some(Instant::parse("2024-05-14T06:00:00Z").unwrap()),
                author: Some("dev".into()),
                files: vec![ChangedFile {
                    path: "a.py".into(),
                    status: FileStatus::Added,
                    additions: 1,
                    deletions: 0,
                    content: Some("x = 1\n".into()),
                    patch: None,
                }],
                comments: vec![],
                commits: vec![FixtureCommit {
                    sha: "abcdef1".into(),
                    message: "m".into(),
                    committed_at: Instant::parse("2024-05-14T07:00:00Z").unwrap(),
                }],
            }],
        }
    }

    #[tokio::test]
    async fn scripted_clock_and_records() {
        let t0 = Instant::parse("2024-05-14T07:08:35Z").unwrap();
        let host =
            InMemoryHost::new(snapshot(), "github-actions[bot]").with_clock(Clock::scripted([t0]));
        let a = host.post_comment("o/r", 9, "one").await.unwrap();
        let b = host.post_comment("o/r", 9, "two").await.unwrap();
        assert_eq!(a.created_at, t0);
        assert_eq!(b.created_at, t0.plus_seconds(1));
        assert_ne!(a.id, b.id);
        let rec = host
            .pull_request_record("o/r", 9, &BotLogins::default())
            .unwrap()
            .unwrap();
        assert_eq!(rec.comments().len(), 2);
        assert!(rec.comments().iter().all(|c| c.is_bot));
        assert_eq!(rec.commits().len(), 1);
    }

    #[tokio::test]
    async fn unknown_pr_and_outage() {
        let host = InMemoryHost::new(snapshot(), "bot");
        assert!(matches!(
            host.changed_files("o/r", 1, None).await,
            Err(HostError::NotFound { .. })
        ));
        host.set_unreachable(true);
        assert!(matches!(
            host.changed_files("o/r", 9, None).await,
            Err(HostError::Unreachable(_))
        ));
    }

    #[tokio::test]
    async fn recording_host_never_posts_upstream() {
        let inner = Arc::new(InMemoryHost::new(snapshot(), "bot"));
        let rec = RecordingHost::new(inner.clone(), "bot");
        assert_eq!(rec.changed_files("o/r", 9, None).await.unwrap().len(), 1);
        rec.post_comment("o/r", 9, "hello").await.unwrap();
        assert_eq!(rec.recorded().len(), 1);
        assert!(inner.posted().is_empty());
    }
}
