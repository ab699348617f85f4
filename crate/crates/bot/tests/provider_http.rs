use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::{Json, Router};
use reviewloop_bot::config::Secret;
use reviewloop_bot::provider::{
    call_provider, ChatCompletionsProvider, ProviderError, RetryPolicy,
};
use reviewloop_core::prompt::build_prompt;
use serde_json::{json, Value};

const KEY: &str = "sk-test-0123456789-do-not-leak";

#[derive(Clone)]
struct Script {
    statuses: Arc<Vec<u16>>,
    hits: Arc<AtomicUsize>,
    seen: Arc<Mutex<Vec<Value>>>,
}

async fn complete(
    State(s): State<Script>,
    headers: HeaderMap,
    Json(body): Json<Value>,
) -> Response {
    let n = s.hits.fetch_add(1, Ordering::SeqCst);
    s.seen.lock().unwrap().push(body);
    assert_eq!(
        headers.get("authorization").unwrap().to_str().unwrap(),
        format!("Bearer {KEY}")
    );
    let status = s.statuses.get(n).copied().unwrap_or(200);
    if status != 200 {
        return (StatusCode::from_u16(status).unwrap(), "upstream says no").into_response();
    }
    Json(json!({ "choices": [ { "message": { "role": "assistant", "content": "1. Documentation Defects: fine" } } ] }))
        .into_response()
}

async fn stub(statuses: Vec<u16>) -> (String, Script) {
    let script = Script {
        statuses: Arc::new(statuses),
        hits: Arc::default(),
        seen: Arc::default(),
    };
    let app = Router::new()
        .route("/v1/chat/completions", post(complete))
        .with_state(script.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}/v1/chat/completions"), script)
}

fn policy(max_retries: u32) -> RetryPolicy {
    RetryPolicy {
        timeout: Duration::from_secs(5),
        max_retries,
        backoff: Duration::from_millis(5),
    }
}

#[tokio::test]
async fn two_server_errors_then_success() {
    let (url, script) = stub(vec![503, 503, 200]).await;
    let p = ChatCompletionsProvider::new(&url, "gpt-4", Secret::new(KEY)).unwrap();
    let req = build_prompt("a.py", "x = 1\n").unwrap();
    let text = call_provider(&p, &req, &policy(2)).await.unwrap();
    assert!(text.contains("1. Documentation Defects"));
    assert_eq!(script.hits.load(Ordering::SeqCst), 3);
    let seen = script.seen.lock().unwrap();
    assert_eq!(seen[2]["model"], "gpt-4");
    assert_eq!(seen[2]["messages"][0]["role"], "user");
    assert_eq!(seen[2]["messages"][0]["content"], req.prompt_text.as_str());
}

#[tokio::test]
async fn unauthorized_is_auth_error_without_retry() {
    let (url, script) = stub(vec![401, 200]).await;
    let p = ChatCompletionsProvider::new(&url, "gpt-4", Secret::new(KEY)).unwrap();
    let req = build_prompt("a.py", "x = 1\n").unwrap();
    assert_eq!(
        call_provider(&p, &req, &policy(3)).await,
        Err(ProviderError::Auth { status: 401 })
    );
    assert_eq!(script.hits.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn client_errors_are_rejections() {
    let (url, _) = stub(vec![400]).await;
    let p = ChatCompletionsProvider::new(&url, "gpt-4", Secret::new(KEY)).unwrap();
    let req = build_prompt("a.py", "x = 1\n").unwrap();
    match call_provider(&p, &req, &policy(3)).await {
        Err(ProviderError::Rejected {
            status: 400,
            message,
        }) => assert!(message.contains("upstream")),
        other => panic!("unexpected {other:?}"),
    }
}

#[derive(Clone, Default)]
struct Captured(Arc<Mutex<Vec<u8>>>);

impl Write for Captured {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.lock().unwrap().extend_from_slice(buf);
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

#[tokio::test]
async fn key_never_reaches_logs_or_errors() {
    let captured = Captured::default();
    let sink = captured.clone();
    let subscriber = tracing_subscriber::fmt()
        .with_max_level(tracing::Level::TRACE)
        .with_writer(move || sink.clone())
        .finish();
    let _guard = tracing::subscriber::set_default(subscriber);

    let (url, _) = stub(vec![503, 401]).await;
    let secret = Secret::new(KEY);
    let p = ChatCompletionsProvider::new(&url, "gpt-4", secret.clone()).unwrap();
    let req = build_prompt("a.py", "x = 1\n").unwrap();
    let err = call_provider(&p, &req, &policy(2)).await.unwrap_err();
    tracing::info!(?secret, error = %err, "finished");

    let logs = String::from_utf8(captured.0.lock().unwrap().clone()).unwrap();
    assert!(logs.contains("retrying"), "expected retry log, got: {logs}");
    assert!(!logs.contains(KEY));
    assert!(!format!("{err} {err:?}").contains(KEY));
}
