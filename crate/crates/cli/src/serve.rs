//! Online recommendation service. The knowledge base is loaded once and
//! shared read-only; every response is a pure function of (KB, request,
//! match-beta).

use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use entrec_core::kb::{KnowledgeBase, OnlineRecommendation};
use entrec_core::Error;

pub struct AppState {
    pub kb: KnowledgeBase,
    pub match_beta: f64,
}

#[derive(Debug, Deserialize)]
pub struct RecommendRequest {
    pub visited: Vec<String>,
    #[serde(default = "default_n")]
    pub n: usize,
}

fn default_n() -> usize {
    10
}

#[derive(Debug, Serialize, PartialEq)]
pub struct RecommendResponse {
    pub recommendations: Vec<RecommendedPage>,
    pub matched_users: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct RecommendedPage {
    pub url: String,
    pub doi: f64,
}

impl RecommendResponse {
    /// Wire form of an online recommendation result. DOI values are rounded
    /// to six decimals so response bodies are stable golden-test targets.
    pub fn from_outcome(outcome: &OnlineRecommendation) -> Self {
        RecommendResponse {
            recommendations: outcome
                .recommendations
                .iter()
                .map(|r| RecommendedPage {
                    url: r.url.clone(),
                    doi: (r.doi * 1e6).round() / 1e6,
                })
                .collect(),
            matched_users: outcome.matched_users,
            warnings: outcome
                .dropped
                .iter()
                .map(|u| format!("unknown url dropped: {u}"))
                .collect(),
        }
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/recommend", post(recommend))
        .route("/health", get(health))
        .with_state(state)
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(json!({
        "status": "ok",
        "kb_users": state.kb.entries.len(),
        "kb_pages": state.kb.pages.len(),
    }))
}

async fn recommend(
    State(state): State<Arc<AppState>>,
    payload: Result<Json<RecommendRequest>, JsonRejection>,
) -> Response {
    let Json(request) = match payload {
        Ok(p) => p,
        Err(rejection) => return error_response(StatusCode::BAD_REQUEST, &rejection.body_text()),
    };
    if request.visited.is_empty() {
        return error_response(StatusCode::BAD_REQUEST, "visited must be non-empty");
    }
    if request.n == 0 {
        return error_response(StatusCode::BAD_REQUEST, "n must be >= 1");
    }
    match state.kb.top_n(&request.visited, request.n, state.match_beta) {
        Ok(outcome) => Json(RecommendResponse::from_outcome(&outcome)).into_response(),
        Err(Error::NoRecognizablePages) => {
            error_response(StatusCode::UNPROCESSABLE_ENTITY, "no recognizable pages")
        }
        Err(e) => error_response(StatusCode::BAD_REQUEST, &e.to_string()),
    }
}

fn error_response(status: StatusCode, message: &str) -> Response {
    (status, Json(json!({ "error": message }))).into_response()
}

/// Bind and serve until SIGINT/SIGTERM.
pub async fn run(state: Arc<AppState>, bind: &str, port: u16) -> anyhow::Result<()> {
    let addr: SocketAddr = format!("{bind}:{port}").parse()?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!(
        "serving {} users / {} pages on http://{}",
        state.kb.entries.len(),
        state.kb.pages.len(),
        listener.local_addr()?
    );
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown_signal())
        .await?;
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        tokio::signal::ctrl_c().await.expect("install ctrl-c handler");
    };
    #[cfg(unix)]
    let terminate = async {
        tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate())
            .expect("install SIGTERM handler")
            .recv()
            .await;
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
