//! HTTP front end: `POST /webhook/pull_request` and `GET /healthz`.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use hmac::{Hmac, Mac};
use serde::Deserialize;
use serde_json::json;
use sha2::Sha256;
use tokio::net::TcpListener;
use tokio::sync::Mutex;
use tokio::task::JoinSet;
use tracing::{error, info};

use crate::config::Secret;
use crate::runner::{ReviewService, TriggerEvent};

const DELIVERY_HEADER: &str = "x-github-delivery";
const SIGNATURE_HEADER: &str = "x-hub-signature-256";
const REVIEW_ACTIONS: [&str; 3] = ["opened", "synchronize", "reopened"];

#[derive(Deserialize)]
struct PullRequestEvent {
    action: String,
    pull_request: PullRequestPayload,
    repository: RepositoryPayload,
}

#[derive(Deserialize)]
struct PullRequestPayload {
    number: u64,
    head: HeadPayload,
}

#[derive(Deserialize)]
struct HeadPayload {
    sha: String,
}

#[derive(Deserialize)]
struct RepositoryPayload {
    full_name: String,
}

#[derive(Clone)]
pub struct AppState {
    service: Arc<ReviewService>,
    secret: Option<Secret>,
    tasks: Arc<Mutex<JoinSet<()>>>,
}

impl AppState {
    pub fn new(service: Arc<ReviewService>, secret: Option<Secret>) -> Self {
        Self {
            service,
            secret,
            tasks: Arc::new(Mutex::new(JoinSet::new())),
        }
    }

    /// Waits for every accepted delivery to finish processing.
    pub async fn drain(&self) {
        let mut tasks = self.tasks.lock().await;
        while tasks.join_next().await.is_some() {}
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/webhook/pull_request", post(pull_request))
        .route("/healthz", get(|| async { "ok" }))
        .with_state(state)
}

pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    info!(addr = %listener.local_addr()?, "listening for pull request webhooks");
    axum::serve(listener, router(state)).await
}

/// `sha256=<hex>` HMAC of the raw body.
pub fn signature(secret: &Secret, body: &[u8]) -> String {
    let mut mac =
        Hmac::<Sha256>::new_from_slice(secret.expose().as_bytes()).expect("any key length");
    mac.update(body);
    format!("sha256={}", hex::encode(mac.finalize().into_bytes()))
}

fn verify(secret: &Secret, body: &[u8], header: &str) -> bool {
    let Some(hex_sig) = header.strip_prefix("sha256=") else {
        return false;
    };
    let Ok(sig) = hex::decode(hex_sig) else {
        return false;
    };
    let mut mac =
        Hmac::<Sha256>::new_from_slice(secret.expose().as_bytes()).expect("any key length");
    mac.update(body);
    mac.verify_slice(&sig).is_ok()
}

fn reply(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "status": message }))).into_response()
}

async fn pull_request(State(state): State<AppState>, headers: HeaderMap, body: Bytes) -> Response {
    let Some(delivery_id) = headers
        .get(DELIVERY_HEADER)
        .and_then(|v| v.to_str().ok())
        .filter(|v| !v.is_empty())
        .map(str::to_string)
    else {
        return reply(StatusCode::BAD_REQUEST, "missing X-GitHub-Delivery header");
    };
    if let Some(secret) = &state.secret {
        let sig = headers
            .get(SIGNATURE_HEADER)
            .and_then(|v| v.to_str().ok())
            .unwrap_or("");
        if !verify(secret, &body, sig) {
            return reply(StatusCode::UNAUTHORIZED, "bad signature");
        }
    }
    let event: PullRequestEvent = match serde_json::from_slice(&body) {
        Ok(e) => e,
        Err(e) => return reply(StatusCode::BAD_REQUEST, &format!("unreadable payload: {e}")),
    };
    if !REVIEW_ACTIONS.contains(&event.action.as_str()) {
        return reply(StatusCode::OK, "ignored");
    }
    let trigger = TriggerEvent {
        repo_id: event.repository.full_name,
        pr_number: event.pull_request.number,
        head_sha: event.pull_request.head.sha,
        delivery_id,
    };
    let service = state.service.clone();
    state.tasks.lock().await.spawn(async move {
        match service.handle_trigger(&trigger).await {
            Ok(results) => info!(
                repo = %trigger.repo_id,
                pr = trigger.pr_number,
                delivery = %trigger.delivery_id,
                posted = results.iter().filter(|r| r.is_posted()).count(),
                failed = results.iter().filter(|r| !r.is_posted()).count(),
                "trigger handled"
            ),
            Err(e) => error!(repo = %trigger.repo_id, pr = trigger.pr_number, error = %e, "trigger failed"),
        }
    });
    reply(StatusCode::ACCEPTED, "accepted")
}
