use std::time::Duration;

use async_trait::async_trait;
use reqwest::{header, StatusCode, Url};
use reviewloop_core::Instant;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tracing::{debug, warn};

use super::{ChangedFile, CodeHost, FileStatus, HostError, PostedComment};
use crate::config::Secret;

pub const DEFAULT_API_URL: &str = "https://api.github.com";
const PER_PAGE: usize = 100;
const USER_AGENT: &str = concat!("reviewloop/", env!("CARGO_PKG_VERSION"));

/// GitHub REST v3 client (also works against GitHub Enterprise `/api/v3`).
#[derive(Clone)]
pub struct GitHubClient {
    http: reqwest::Client,
    base: Url,
    token: Option<Secret>,
    max_retries: u32,
    backoff: Duration,
    fetch_content: bool,
}

#[derive(Deserialize)]
struct GhFile {
    filename: String,
    status: FileStatus,
    additions: u64,
    deletions: u64,
    #[serde(default)]
    patch: Option<String>,
}

#[derive(Deserialize)]
struct GhHead {
    sha: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhUser {
    pub login: String,
}

#[derive(Deserialize)]
struct GhPullDetail {
    head: GhHead,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhPull {
    pub number: u64,
    pub created_at: String,
    pub user: Option<GhUser>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhComment {
    pub user: Option<GhUser>,
    #[serde(default)]
    pub body: Option<String>,
    pub created_at: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhCommitPerson {
    pub date: String,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhCommitDetail {
    pub message: String,
    pub committer: Option<GhCommitPerson>,
    pub author: Option<GhCommitPerson>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct GhCommit {
    pub sha: String,
    pub commit: GhCommitDetail,
}

#[derive(Deserialize)]
struct GhCreatedComment {
    id: u64,
    created_at: String,
}

impl GitHubClient {
    pub fn new(api_url: &str, token: Option<Secret>) -> Result<Self, HostError> {
        let base = Url::parse(api_url)
            .map_err(|e| HostError::Unreachable(format!("bad API url {api_url:?}: {e}")))?;
        let http = reqwest::Client::builder()
            .user_agent(USER_AGENT)
            .timeout(Duration::from_secs(30))
            .build()
            .map_err(|e| HostError::Unreachable(e.to_string()))?;
        Ok(Self {
            http,
            base,
            token,
            max_retries: 3,
            backoff: Duration::from_millis(500),
            fetch_content: true,
        })
    }

    pub fn with_retries(mut self, max_retries: u32, backoff: Duration) -> Self {
        self.max_retries = max_retries;
        self.backoff = backoff;
        self
    }

    /// When false, changed files carry only their patch (diff review mode).
    pub fn with_content(mut self, fetch_content: bool) -> Self {
        self.fetch_content = fetch_content;
        self
    }

    fn url(&self, segments: &[&str], query: &[(&str, String)]) -> Url {
        let mut url = self.base.clone();
        {
            let mut path = url.path_segments_mut().expect("http base url");
            path.pop_if_empty();
            for s in segments {
                path.extend(s.split('/'));
            }
        }
        if !query.is_empty() {
            url.query_pairs_mut()
                .extend_pairs(query.iter().map(|(k, v)| (*k, v.as_str())));
        }
        url
    }

    fn authorize(&self, req: reqwest::RequestBuilder) -> reqwest::RequestBuilder {
        let req = req.header("X-GitHub-Api-Version", "2022-11-28");
        match &self.token {
            Some(t) => req.bearer_auth(t.expose()),
            None => req,
        }
    }

    /// Sends with retries on transport errors and 5xx; other statuses are
    /// returned to the caller.
    async fn send(
        &self,
        build: impl Fn() -> reqwest::RequestBuilder,
    ) -> Result<reqwest::Response, HostError> {
        let mut attempt = 0;
        loop {
            let outcome = self.authorize(build()).send().await;
            let retryable = match &outcome {
                Ok(resp) => resp.status().is_server_error(),
                Err(e) => !e.is_builder(),
            };
            if !retryable || attempt >= self.max_retries {
                return match outcome {
                    Ok(resp) if resp.status().is_server_error() => Err(HostError::Unreachable(
                        format!("{} after {} attempts", resp.status(), attempt + 1),
                    )),
                    Ok(resp) => Ok(resp),
                    Err(e) => Err(HostError::Unreachable(e.to_string())),
                };
            }
            let wait = self.backoff * 2u32.saturating_pow(attempt);
            warn!(
                attempt = attempt + 1,
                ?wait,
                "code host request failed, retrying"
            );
            tokio::time::sleep(wait).await;
            attempt += 1;
        }
    }

    async fn check(resp: reqwest::Response) -> Result<reqwest::Response, HostError> {
        let status = resp.status();
        if status.is_success() {
            return Ok(resp);
        }
        let message = resp.text().await.unwrap_or_default();
        Err(HostError::Api {
            status: status.as_u16(),
            message: message.chars().take(300).collect(),
        })
    }

    async fn get_json<T: DeserializeOwned>(&self, url: Url) -> Result<T, HostError> {
        debug!(%url, "GET");
        let resp = self
            .send(|| {
                self.http
                    .get(url.clone())
                    .header(header::ACCEPT, "application/vnd.github+json")
            })
            .await?;
        Self::check(resp)
            .await?
            .json()
            .await
            .map_err(|e| HostError::Unreachable(format!("bad response body: {e}")))
    }

    async fn paginate<T: DeserializeOwned>(&self, segments: &[&str]) -> Result<Vec<T>, HostError> {
        let mut out = Vec::new();
        for page in 1.. {
            let url = self.url(
                segments,
                &[
                    ("per_page", PER_PAGE.to_string()),
                    ("page", page.to_string()),
                ],
            );
            let batch: Vec<T> = self.get_json(url).await?;
            let n = batch.len();
            out.extend(batch);
            if n < PER_PAGE {
                break;
            }
        }
        Ok(out)
    }

    async fn raw_content(&self, repo: &str, path: &str, sha: &str) -> Result<String, HostError> {
        let url = self.url(
            &["repos", repo, "contents", path],
            &[("ref", sha.to_string())],
        );
        let resp = self
            .send(|| {
                self.http
                    .get(url.clone())
                    .header(header::ACCEPT, "application/vnd.github.raw")
            })
            .await?;
        let bytes = Self::check(resp)
            .await?
            .bytes()
            .await
            .map_err(|e| HostError::Unreachable(e.to_string()))?;
        Ok(String::from_utf8_lossy(&bytes).into_owned())
    }

    pub async fn head_sha(&self, repo: &str, pr: u64) -> Result<String, HostError> {
        let url = self.url(&["repos", repo, "pulls", &pr.to_string()], &[]);
        match self.get_json::<GhPullDetail>(url).await {
            Ok(d) => Ok(d.head.sha),
            Err(HostError::Api { status: 404, .. }) => Err(HostError::NotFound {
                repo: repo.into(),
                pr,
            }),
            Err(e) => Err(e),
        }
    }

    pub async fn list_pulls(&self, repo: &str) -> Result<Vec<GhPull>, HostError> {
        let url_base = ["repos", repo, "pulls"];
        let mut out = Vec::new();
        for page in 1.. {
            let url = self.url(
                &url_base,
                &[
                    ("state", "all".to_string()),
                    ("per_page", PER_PAGE.to_string()),
                    ("page", page.to_string()),
                ],
            );
            let batch: Vec<GhPull> = self.get_json(url).await?;
            let n = batch.len();
            out.extend(batch);
            if n < PER_PAGE {
                break;
            }
        }
        Ok(out)
    }

    /// Conversation comments followed by inline review comments.
    pub async fn pull_comments(&self, repo: &str, pr: u64) -> Result<Vec<GhComment>, HostError> {
        let n = pr.to_string();
        let mut out: Vec<GhComment> = self
            .paginate(&["repos", repo, "issues", &n, "comments"])
            .await?;
        out.extend(
            self.paginate::<GhComment>(&["repos", repo, "pulls", &n, "comments"])
                .await?,
        );
        Ok(out)
    }

    pub async fn pull_commits(&self, repo: &str, pr: u64) -> Result<Vec<GhCommit>, HostError> {
        self.paginate(&["repos", repo, "pulls", &pr.to_string(), "commits"])
            .await
    }
}

#[async_trait]
impl CodeHost for GitHubClient {
    async fn changed_files(
        &self,
        repo: &str,
        pr: u64,
        head_sha: Option<&str>,
    ) -> Result<Vec<ChangedFile>, HostError> {
        let n = pr.to_string();
        let files: Vec<GhFile> = match self.paginate(&["repos", repo, "pulls", &n, "files"]).await {
            Err(HostError::Api { status: 404, .. }) => {
                return Err(HostError::NotFound {
                    repo: repo.into(),
                    pr,
                })
            }
            other => other?,
        };
        let sha = match (self.fetch_content, head_sha) {
            (false, _) => None,
            (true, Some(s)) => Some(s.to_string()),
            (true, None) => Some(self.head_sha(repo, pr).await?),
        };
        let mut out = Vec::with_capacity(files.len());
        for f in files {
            let content = match &sha {
                Some(sha) if f.status != FileStatus::Removed => {
                    Some(self.raw_content(repo, &f.filename, sha).await?)
                }
                _ => None,
            };
            out.push(ChangedFile {
                path: f.filename,
                status: f.status,
                additions: f.additions,
                deletions: f.deletions,
                content,
                patch: f.patch,
            });
        }
        Ok(out)
    }

    async fn post_comment(
        &self,
        repo: &str,
        pr: u64,
        body: &str,
    ) -> Result<PostedComment, HostError> {
        let url = self.url(&["repos", repo, "issues", &pr.to_string(), "comments"], &[]);
        let payload = serde_json::json!({ "body": body });
        let resp = self
            .send(|| {
                self.http
                    .post(url.clone())
                    .header(header::ACCEPT, "application/vnd.github+json")
                    .json(&payload)
            })
            .await?;
        let resp = match Self::check(resp).await {
            Err(HostError::Api { status, .. }) if status == StatusCode::NOT_FOUND.as_u16() => {
                return Err(HostError::NotFound {
                    repo: repo.into(),
                    pr,
                })
            }
            other => other?,
        };
        let created: GhCreatedComment = resp
            .json()
            .await
            .map_err(|e| HostError::Unreachable(format!("bad response body: {e}")))?;
        let created_at = Instant::parse(&created.created_at)
            .map_err(|e| HostError::Unreachable(e.to_string()))?;
        Ok(PostedComment {
            id: created.id,
            created_at,
        })
    }
}
