//! HTTP JSON API: `GET /search` and `GET /health`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;
use fdl_core::pipeline::{Engine, SearchRequest};
use serde_json::json;

/// The loaded snapshot. Replacing it swaps one `Arc`, so each request sees
/// exactly one engine.
#[derive(Default)]
pub struct AppState {
    engine: RwLock<Option<Arc<Engine>>>,
}

impl AppState {
    pub fn new(engine: Option<Engine>) -> Self {
        AppState {
            engine: RwLock::new(engine.map(Arc::new)),
        }
    }

    pub fn replace(&self, engine: Engine) {
        *self.engine.write().expect("engine lock") = Some(Arc::new(engine));
    }

    fn current(&self) -> Option<Arc<Engine>> {
        self.engine.read().expect("engine lock").clone()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/search", get(search))
        .with_state(state)
}

fn json_body(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn error(status: StatusCode, message: impl std::fmt::Display) -> Response {
    json_body(status, json!({ "error": message.to_string() }).to_string())
}

async fn health() -> Response {
    json_body(StatusCode::OK, json!({ "status": "ok" }).to_string())
}

fn parse_param<T: std::str::FromStr>(params: &HashMap<String, String>, name: &str) -> Result<Option<T>, String> {
    match params.get(name).map(|s| s.trim()).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| format!("{name} is not a valid value: {raw:?}")),
    }
}

/// Builds a request from query-string parameters.
pub fn request_from_params(params: &HashMap<String, String>) -> Result<SearchRequest, String> {
    let k: Option<i64> = parse_param(params, "k")?;
    let k = match k {
        Some(k) if k < 1 => return Err("k must be at least 1".to_string()),
        Some(k) => Some(k as usize),
        None => None,
    };
    Ok(SearchRequest {
        q: params.get("q").cloned().unwrap_or_default(),
        lat: parse_param(params, "lat")?,
        lon: parse_param(params, "lon")?,
        city: params.get("city").filter(|c| !c.trim().is_empty()).cloned(),
        k,
    })
}

async fn search(State(state): State<Arc<AppState>>, Query(params): Query<HashMap<String, String>>) -> Response {
    let req = match request_from_params(&params) {
        Ok(r) => r,
        Err(msg) => return error(StatusCode::BAD_REQUEST, msg),
    };
    if let Err(e) = req.validate() {
        return error(StatusCode::BAD_REQUEST, e);
    }
    let Some(engine) = state.current() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no snapshot loaded; run ingest first");
    };
    match engine.search(&req) {
        Ok(resp) => json_body(StatusCode::OK, resp.to_json()),
        Err(e) => error(StatusCode::BAD_REQUEST, e),
    }
}
