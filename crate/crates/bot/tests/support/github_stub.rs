//! A small stand-in for the GitHub REST API, backed by fixed data.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use reviewloop_core::telemetry::RawRecords;
use serde::Deserialize;
use serde_json::{json, Value};

pub const TOKEN: &str = "host-token-for-tests";

#[derive(Clone)]
pub struct StubFile {
    pub path: String,
    pub status: &'static str,
    pub additions: u64,
    pub deletions: u64,
    pub content: String,
}

#[derive(Default)]
pub struct StubData {
    pub raw: RawRecords,
    pub files: HashMap<(String, u64), Vec<StubFile>>,
    /// Requests to answer with 503 before behaving.
    pub fail_first: usize,
}

#[derive(Clone)]
pub struct Stub {
    data: Arc<StubData>,
    pub posted: Arc<Mutex<Vec<(String, u64, String)>>>,
    pub requests: Arc<AtomicUsize>,
}

#[derive(Deserialize)]
struct PageQuery {
    page: Option<usize>,
    per_page: Option<usize>,
}

fn page(items: Vec<Value>, q: &PageQuery) -> Json<Vec<Value>> {
    let per = q.per_page.unwrap_or(30);
    let p = q.page.unwrap_or(1).max(1);
    Json(items.into_iter().skip((p - 1) * per).take(per).collect())
}

impl Stub {
    pub fn new(data: StubData) -> Self {
        Self {
            data: Arc::new(data),
            posted: Arc::default(),
            requests: Arc::default(),
        }
    }

    /// Serves on an ephemeral port and returns the base URL.
    pub async fn spawn(self) -> String {
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, self.router()).await.unwrap() });
        format!("http://{addr}")
    }

    fn gate(&self, headers: &HeaderMap) -> Option<Response> {
        let n = self.requests.fetch_add(1, Ordering::SeqCst);
        if n < self.data.fail_first {
            return Some(StatusCode::SERVICE_UNAVAILABLE.into_response());
        }
        let auth = headers.get("authorization").and_then(|v| v.to_str().ok());
        if auth != Some(&format!("Bearer {TOKEN}")) {
            return Some((StatusCode::UNAUTHORIZED, "bad credentials").into_response());
        }
        None
    }

    fn router(self) -> Router {
        Router::new()
            .route("/repos/{owner}/{name}/pulls", get(list_pulls))
            .route("/repos/{owner}/{name}/pulls/{n}", get(pull))
            .route("/repos/{owner}/{name}/pulls/{n}/files", get(files))
            .route(
                "/repos/{owner}/{name}/pulls/{n}/comments",
                get(review_comments),
            )
            .route("/repos/{owner}/{name}/pulls/{n}/commits", get(commits))
            .route(
                "/repos/{owner}/{name}/issues/{n}/comments",
                get(issue_comments).post(post_comment),
            )
            .route("/repos/{owner}/{name}/contents/{*path}", get(contents))
            .with_state(self)
    }
}

fn user(login: &str) -> Value {
    json!({ "login": login, "id": 1, "type": "User" })
}

async fn list_pulls(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name)): Path<(String, String)>,
    Query(q): Query<PageQuery>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let repo = format!("{owner}/{name}");
    let items = s
        .data
        .raw
        .prs
        .iter()
        .filter(|p| p.repo_id == repo)
        .map(|p| json!({ "number": p.number, "created_at": p.created_at, "user": user(&p.author), "state": "closed" }))
        .collect();
    page(items, &q).into_response()
}

async fn pull(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((_o, _n, n)): Path<(String, String, u64)>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    Json(json!({ "number": n, "head": { "sha": "feedface00" } })).into_response()
}

async fn files(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name, n)): Path<(String, String, u64)>,
    Query(q): Query<PageQuery>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let Some(list) = s.data.files.get(&(format!("{owner}/{name}"), n)) else {
        return (StatusCode::NOT_FOUND, "Not Found").into_response();
    };
    let items = list
        .iter()
        .map(|f| {
            json!({
                "filename": f.path,
                "status": f.status,
                "additions": f.additions,
                "deletions": f.deletions,
                "changes": f.additions + f.deletions,
                "patch": format!("@@ -0,0 +1,{} @@\n+{}", f.additions, f.content.lines().next().unwrap_or("")),
            })
        })
        .collect();
    page(items, &q).into_response()
}

async fn contents(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name, path)): Path<(String, String, String)>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let repo = format!("{owner}/{name}");
    let found = s
        .data
        .files
        .iter()
        .filter(|((r, _), _)| *r == repo)
        .flat_map(|(_, fs)| fs.iter())
        .find(|f| f.path == path);
    match found {
        Some(f) => f.content.clone().into_response(),
        None => (StatusCode::NOT_FOUND, "Not Found").into_response(),
    }
}

async fn review_comments(
    State(s): State<Stub>,
    headers: HeaderMap,
    Query(q): Query<PageQuery>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    page(Vec::new(), &q).into_response()
}

async fn issue_comments(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name, n)): Path<(String, String, i64)>,
    Query(q): Query<PageQuery>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let repo = format!("{owner}/{name}");
    let items = s
        .data
        .raw
        .comments
        .iter()
        .filter(|c| c.repo_id == repo && c.pr_number == n)
        .map(|c| json!({ "user": user(&c.author_login), "body": c.body, "created_at": c.created_at }))
        .collect();
    page(items, &q).into_response()
}

async fn commits(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name, n)): Path<(String, String, i64)>,
    Query(q): Query<PageQuery>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let repo = format!("{owner}/{name}");
    let items = s
        .data
        .raw
        .commits
        .iter()
        .filter(|c| c.repo_id == repo && c.pr_number == n)
        .map(|c| {
            json!({
                "sha": c.sha,
                "commit": {
                    "message": c.message,
                    "author": { "date": "2000-01-01T00:00:00Z" },
                    "committer": { "date": c.committed_at },
                }
            })
        })
        .collect();
    page(items, &q).into_response()
}

async fn post_comment(
    State(s): State<Stub>,
    headers: HeaderMap,
    Path((owner, name, n)): Path<(String, String, u64)>,
    Json(body): Json<BTreeMap<String, String>>,
) -> Response {
    if let Some(r) = s.gate(&headers) {
        return r;
    }
    let mut posted = s.posted.lock().unwrap();
    posted.push((
        format!("{owner}/{name}"),
        n,
        body.get("body").cloned().unwrap_or_default(),
    ));
    let id = posted.len() as u64;
    (
        StatusCode::CREATED,
        Json(json!({ "id": id, "created_at": "2024-05-14T07:08:35Z" })),
    )
        .into_response()
}
