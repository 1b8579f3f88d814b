//! HTTP API over an atomically replaceable index snapshot.
//!
//! | route                   | body                       | reply                         |
//! |-------------------------|----------------------------|-------------------------------|
//! | `POST /v1/verify`       | `{candidates: [text]}`     | `[MatchResult]`               |
//! | `POST /v1/extract`      | `{formal_code: text}`      | candidates and dependencies   |
//! | `POST /v1/retrieve`     | `{informal, id?}`          | `VerifiedDependencies`        |
//! | `GET /v1/index/info`    |                            | `IndexInfo`                   |
//! | `POST /v1/index/reload` | `{path?}`                  | `IndexInfo` of the new index  |
//! | `GET /v1/healthz`       |                            | `ok`                          |
//!
//! Requests hold the snapshot they started with, so a reload never changes
//! an answer mid-request.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use arc_swap::ArcSwap;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use ddr_core::format::{load_index_file, FormatError};
use ddr_core::{DependencyIndex, Extractor, IndexInfo, MatchResult};
use serde::Deserialize;
use serde_json::json;
use tokio::sync::Semaphore;

use crate::generator::{GenerationRequest, Generator, GeneratorConfig, GeneratorError};
use crate::pipeline::retrieve_dependencies;

pub struct AppState {
    snapshot: ArcSwap<DependencyIndex>,
    extractor: Extractor,
    generator: Option<Generator>,
    generator_permits: Semaphore,
    index_path: Option<PathBuf>,
    token: Option<String>,
}

impl AppState {
    pub fn new(index: DependencyIndex) -> Self {
        AppState {
            snapshot: ArcSwap::from_pointee(index),
            extractor: Extractor::default(),
            generator: None,
            generator_permits: Semaphore::new(16),
            index_path: None,
            token: None,
        }
    }

    pub fn with_extractor(mut self, extractor: Extractor) -> Self {
        self.extractor = extractor;
        self
    }

    /// Installs a generator; at most `max_in_flight` calls run at once.
    pub fn with_generator(mut self, generator: Generator, max_in_flight: usize) -> Self {
        self.generator = Some(generator);
        self.generator_permits = Semaphore::new(max_in_flight.max(1));
        self
    }

    pub fn with_index_path(mut self, path: impl Into<PathBuf>) -> Self {
        self.index_path = Some(path.into());
        self
    }

    /// Bearer token required by the reload endpoint.
    pub fn with_token(mut self, token: impl Into<String>) -> Self {
        self.token = Some(token.into());
        self
    }

    pub fn current(&self) -> Arc<DependencyIndex> {
        self.snapshot.load_full()
    }

    pub fn replace(&self, index: DependencyIndex) {
        self.snapshot.store(Arc::new(index));
    }

    /// Loads `path` (or the configured index path) and swaps it in. On error
    /// the current snapshot stays.
    pub fn reload(&self, path: Option<PathBuf>) -> Result<IndexInfo, FormatError> {
        let path = path.or_else(|| self.index_path.clone()).ok_or_else(|| {
            FormatError::Io(std::io::Error::new(std::io::ErrorKind::NotFound, "no index path configured"))
        })?;
        let index = load_index_file(&path)?;
        let info = index.info();
        self.replace(index);
        log::info!("reloaded index from {} ({} items)", path.display(), info.item_count);
        Ok(info)
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

#[allow(clippy::result_large_err)]
fn parse<T: for<'de> Deserialize<'de>>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| error(StatusCode::BAD_REQUEST, format!("malformed body: {e}")))
}

#[derive(Deserialize)]
struct VerifyRequest {
    candidates: Vec<String>,
}

async fn verify(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: VerifyRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let index = state.current();
    let results = index.verify_batch_with(&req.candidates, ddr_core::Execution::Sequential);
    let mut out: Vec<MatchResult> = Vec::with_capacity(results.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(m) => out.push(m),
            Err(e) => {
                return (
                    StatusCode::UNPROCESSABLE_ENTITY,
                    Json(json!({ "error": "invalid candidate", "index": i, "query": e.query, "reason": e.reason })),
                )
                    .into_response()
            }
        }
    }
    Json(out).into_response()
}

#[derive(Deserialize)]
struct ExtractRequest {
    formal_code: String,
}

async fn extract(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: ExtractRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let index = state.current();
    let cs = state.extractor.extract_candidates(&req.formal_code);
    let deps = ddr_core::extract::resolve_dependencies(&index, &cs);
    Json(json!({
        "candidates": cs.candidates,
        "dependencies": deps.dependencies,
        "dropped": deps.dropped,
    }))
    .into_response()
}

async fn retrieve(State(state): State<Arc<AppState>>, body: Bytes) -> Response {
    let req: GenerationRequest = match parse(&body) {
        Ok(r) => r,
        Err(resp) => return resp,
    };
    let Some(generator) = state.generator.as_ref() else {
        return error(StatusCode::SERVICE_UNAVAILABLE, "no generator configured");
    };
    let _permit = match state.generator_permits.acquire().await {
        Ok(p) => p,
        Err(_) => return error(StatusCode::SERVICE_UNAVAILABLE, "generator unavailable"),
    };
    let index = state.current();
    match retrieve_dependencies(&index, generator, &req).await {
        Ok(v) => Json(v).into_response(),
        Err(e @ GeneratorError::Timeout) => error(StatusCode::GATEWAY_TIMEOUT, e.to_string()),
        Err(e) => error(StatusCode::BAD_GATEWAY, e.to_string()),
    }
}

async fn info(State(state): State<Arc<AppState>>) -> Json<IndexInfo> {
    Json(state.current().info())
}

#[derive(Deserialize, Default)]
struct ReloadRequest {
    path: Option<PathBuf>,
}

async fn reload(State(state): State<Arc<AppState>>, headers: HeaderMap, body: Bytes) -> Response {
    if let Some(token) = &state.token {
        let presented = headers
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "));
        if presented != Some(token.as_str()) {
            return error(StatusCode::UNAUTHORIZED, "missing or wrong bearer token");
        }
    }
    let req: ReloadRequest = if body.is_empty() {
        ReloadRequest::default()
    } else {
        match parse(&body) {
            Ok(r) => r,
            Err(resp) => return resp,
        }
    };
    let state = state.clone();
    match tokio::task::spawn_blocking(move || state.reload(req.path)).await {
        Ok(Ok(info)) => Json(info).into_response(),
        Ok(Err(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

async fn healthz() -> &'static str {
    "ok"
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/v1/verify", post(verify))
        .route("/v1/extract", post(extract))
        .route("/v1/retrieve", post(retrieve))
        .route("/v1/index/info", get(info))
        .route("/v1/index/reload", post(reload))
        .route("/v1/healthz", get(healthz))
        .with_state(state)
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub index_path: PathBuf,
    pub bind: SocketAddr,
    pub generator: Option<GeneratorConfig>,
    pub keywords_path: Option<PathBuf>,
    pub generator_concurrency: usize,
    pub token: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("loading index {path}: {source}")]
    IndexLoad { path: PathBuf, source: FormatError },
    #[error("binding {addr}: {source}")]
    Bind { addr: SocketAddr, source: std::io::Error },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("reading keyword list: {0}")]
    Keywords(std::io::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ServiceConfig {
    pub fn build_state(&self) -> Result<AppState, ServeError> {
        let index = load_index_file(&self.index_path).map_err(|source| ServeError::IndexLoad {
            path: self.index_path.clone(),
            source,
        })?;
        let mut state = AppState::new(index).with_index_path(&self.index_path);
        if let Some(path) = &self.keywords_path {
            state = state.with_extractor(Extractor::from_keyword_file(path).map_err(ServeError::Keywords)?);
        }
        if let Some(cfg) = &self.generator {
            state = state.with_generator(Generator::from_config(cfg)?, self.generator_concurrency);
        }
        if let Some(token) = &self.token {
            state = state.with_token(token);
        }
        Ok(state)
    }
}

pub async fn serve_on(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let state = Arc::new(config.build_state()?);
    let listener = tokio::net::TcpListener::bind(config.bind)
        .await
        .map_err(|source| ServeError::Bind { addr: config.bind, source })?;
    log::info!("serving {} items on {}", state.current().len(), config.bind);
    serve_on(listener, state).await?;
    Ok(())
}
