//! Read-only HTTP API over a loaded design corpus.
//!
//! | route | result |
//! |---|---|
//! | `GET /api/designs?<filter>&offset=&limit=` | card summaries, `X-Total-Count` header |
//! | `POST /api/query` (pattern body) | matching ids |
//! | `GET /api/designs/{id}` | record detail with canonical spec text |
//! | `GET /api/stats/overview` | overview statistics |
//! | `GET /api/stats/frequency/{property}` | histogram (`field_word` for words) |
//! | `GET /api/stats/cooccurrence?row=&col=` | co-occurrence matrix |
//! | `GET /api/vocab` | active vocabulary |
//! | `GET /assets/{path}` | image files referenced by records |
//!
//! All bodies are JSON with sorted keys, including errors (`{code, message}`).

mod error;

use std::collections::HashSet;
use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::{Path, RawQuery, State};
use axum::http::header::{CONTENT_TYPE, HeaderName};
use axum::http::{HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::{ServeDir, ServeFile};
use vakb_core::analytics::{self, Property};
use vakb_core::corpus::{Corpus, DesignMetadata};
use vakb_core::grammar::{serialize_spec, SpecMetrics};
use vakb_core::output::{canonical_json, overview_value, CardSummary};
use vakb_core::query::{filter_query, structural_query, FilterQuery, QueryPattern};

pub use error::{ApiError, ERROR_CODES};

pub const DEFAULT_PORT: u16 = 8080;
pub const DEFAULT_PAGE_LIMIT: usize = 50;
pub const TOTAL_COUNT_HEADER: &str = "x-total-count";

/// Which browser origins may call the API.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub enum CorsPolicy {
    #[default]
    AnyOrigin,
    Origins(Vec<String>),
    Disabled,
}

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    pub cors: CorsPolicy,
    /// Built web UI served at `/` when present.
    pub ui_dir: Option<PathBuf>,
}

struct AppState {
    corpus: Arc<Corpus>,
    assets: HashSet<String>,
}

type Shared = Arc<AppState>;

fn json_response<T: Serialize + ?Sized>(value: &T) -> Response {
    ([(CONTENT_TYPE, "application/json")], canonical_json(value)).into_response()
}

fn query_pairs(raw: Option<String>) -> Vec<(String, String)> {
    raw.map(|q| form_urlencoded::parse(q.as_bytes()).into_owned().collect())
        .unwrap_or_default()
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ApiError> {
    value
        .parse()
        .map_err(|_| ApiError::bad_request("invalid_parameter", format!("'{key}' must be a non-negative integer, found '{value}'")))
}

async fn list_designs(State(state): State<Shared>, RawQuery(raw): RawQuery) -> Result<Response, ApiError> {
    let mut offset = 0;
    let mut limit = DEFAULT_PAGE_LIMIT;
    let mut filter_pairs = Vec::new();
    for (key, value) in query_pairs(raw) {
        match key.as_str() {
            "offset" => offset = parse_usize(&key, &value)?,
            "limit" => limit = parse_usize(&key, &value)?,
            _ => filter_pairs.push((key, value)),
        }
    }
    let q = FilterQuery::from_pairs(filter_pairs)?;
    let ids = filter_query(&state.corpus, &q)?;
    let total = ids.len();
    let page: Vec<CardSummary> = ids
        .iter()
        .skip(offset)
        .take(limit)
        .map(|id| CardSummary::of(state.corpus.get(id).expect("query returns corpus ids")))
        .collect();
    let mut response = json_response(&page);
    response
        .headers_mut()
        .insert(HeaderName::from_static(TOTAL_COUNT_HEADER), HeaderValue::from(total));
    Ok(response)
}

async fn run_pattern(State(state): State<Shared>, body: String) -> Result<Response, ApiError> {
    let pattern = QueryPattern::parse(&body)?;
    let ids = structural_query(&state.corpus, &pattern);
    let mut response = json_response(&ids);
    response
        .headers_mut()
        .insert(HeaderName::from_static(TOTAL_COUNT_HEADER), HeaderValue::from(ids.len()));
    Ok(response)
}

#[derive(Serialize)]
struct DesignDetail<'a> {
    id: &'a str,
    meta: &'a DesignMetadata,
    metrics: &'a SpecMetrics,
    spec: serde_json::Value,
    spec_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    thumbnail_url: Option<String>,
}

async fn design_detail(State(state): State<Shared>, Path(id): Path<String>) -> Result<Response, ApiError> {
    let record = state.corpus.get(&id)?;
    let spec_text = serialize_spec(&record.spec);
    let detail = DesignDetail {
        id: &record.id,
        meta: &record.meta,
        metrics: &record.metrics,
        spec: serde_json::from_str(&spec_text).expect("canonical text is JSON"),
        spec_text,
        thumbnail_url: CardSummary::of(record).thumbnail_url,
    };
    Ok(json_response(&detail))
}

async fn stats_overview(State(state): State<Shared>) -> Result<Response, ApiError> {
    Ok(json_response(&overview_value(&analytics::overview(&state.corpus)?)))
}

async fn stats_frequency(State(state): State<Shared>, Path(property): Path<String>) -> Result<Response, ApiError> {
    let property: Property = property.parse()?;
    let histogram = match property {
        Property::FieldWord => analytics::field_word_frequency(&state.corpus),
        other => analytics::frequency(&state.corpus, other)?,
    };
    Ok(json_response(&histogram))
}

async fn stats_cooccurrence(State(state): State<Shared>, RawQuery(raw): RawQuery) -> Result<Response, ApiError> {
    let mut row = None;
    let mut col = None;
    for (key, value) in query_pairs(raw) {
        match key.as_str() {
            "row" => row = Some(value),
            "col" => col = Some(value),
            _ => return Err(ApiError::bad_request("unknown_parameter", format!("unknown parameter '{key}'"))),
        }
    }
    let (Some(row), Some(col)) = (row, col) else {
        return Err(ApiError::bad_request("invalid_parameter", "both 'row' and 'col' are required"));
    };
    Ok(json_response(&analytics::cooccurrence(&state.corpus, &row, &col)?))
}

async fn vocab(State(state): State<Shared>) -> Response {
    json_response(&state.corpus.vocab().to_json())
}

fn content_type_for(path: &str) -> &'static str {
    let ext = path.rsplit('.').next().unwrap_or_default().to_ascii_lowercase();
    match ext.as_str() {
        "png" => "image/png",
        "jpg" | "jpeg" => "image/jpeg",
        "gif" => "image/gif",
        "svg" => "image/svg+xml",
        "webp" => "image/webp",
        _ => "application/octet-stream",
    }
}

/// Serves only paths that some record references as its image.
async fn asset(State(state): State<Shared>, Path(path): Path<String>) -> Result<Response, ApiError> {
    let missing = || ApiError::not_found(format!("no asset '{path}'"));
    if !state.assets.contains(&path) {
        return Err(missing());
    }
    let root = state.corpus.root().ok_or_else(missing)?;
    let bytes = tokio::fs::read(root.join(&path)).await.map_err(|_| missing())?;
    Ok(([(CONTENT_TYPE, content_type_for(&path))], bytes).into_response())
}

async fn api_not_found() -> ApiError {
    ApiError::not_found("no such endpoint")
}

async fn method_not_allowed() -> ApiError {
    ApiError::new(StatusCode::METHOD_NOT_ALLOWED, "method_not_allowed", "method not allowed for this endpoint")
}

fn cors_layer(policy: &CorsPolicy) -> Option<CorsLayer> {
    let base = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([CONTENT_TYPE])
        .expose_headers([HeaderName::from_static(TOTAL_COUNT_HEADER)]);
    match policy {
        CorsPolicy::Disabled => None,
        CorsPolicy::AnyOrigin => Some(base.allow_origin(Any)),
        CorsPolicy::Origins(origins) => {
            let values: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
            Some(base.allow_origin(AllowOrigin::list(values)))
        }
    }
}

/// Builds the router over an immutable corpus.
pub fn router(corpus: Arc<Corpus>, config: &ServiceConfig) -> Router {
    let assets = corpus
        .records()
        .iter()
        .filter_map(|r| r.meta.image_path.clone())
        .collect();
    let state = Arc::new(AppState { corpus, assets });
    let api = Router::new()
        .route("/designs", get(list_designs))
        .route("/designs/{id}", get(design_detail))
        .route("/query", post(run_pattern))
        .route("/stats/overview", get(stats_overview))
        .route("/stats/frequency/{property}", get(stats_frequency))
        .route("/stats/cooccurrence", get(stats_cooccurrence))
        .route("/vocab", get(vocab))
        .fallback(api_not_found)
        .method_not_allowed_fallback(method_not_allowed);
    let mut app = Router::new()
        .nest("/api", api)
        .route("/assets/{*path}", get(asset))
        .with_state(state);
    app = match &config.ui_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(dir.join("index.html")))),
        None => app.fallback(api_not_found),
    };
    match cors_layer(&config.cors) {
        Some(layer) => app.layer(layer),
        None => app,
    }
}

/// Serves until `shutdown` resolves, letting in-flight requests finish.
pub async fn serve<F>(listener: TcpListener, app: Router, shutdown: F) -> std::io::Result<()>
where
    F: Future<Output = ()> + Send + 'static,
{
    if let Ok(addr) = listener.local_addr() {
        tracing::info!(%addr, "serving design knowledge base");
    }
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let terminate = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let terminate = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = terminate => {},
    }
}
