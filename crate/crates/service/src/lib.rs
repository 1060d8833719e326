//! HTTP front end for the oracle.
//!
//! `POST /query` takes a request document and answers with the canonical
//! response body from [`geo_oracle_core::oracle::response_json`]. `GET
//! /health` reports 503 until the store has been loaded and indexed, then
//! 200. The store is loaded on a blocking thread after the listener is
//! bound; a load failure shuts the server down and is returned as an error.

use std::future::Future;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock};

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use geo_oracle_core::oracle::{error_json, Oracle, OracleConfig};
use geo_oracle_core::snapshot::load_store;
use geo_oracle_core::spatial_index::build_index;
use geo_oracle_core::Error as CoreError;
use tokio::net::TcpListener;
use tokio::sync::oneshot;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("cannot bind {addr}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("store failed to load")]
    Load(#[from] CoreError),
    #[error("server error")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: String,
    pub store: PathBuf,
    pub oracle: OracleConfig,
}

/// Shared, write-once handle to the loaded oracle.
#[derive(Debug, Clone, Default)]
pub struct AppState {
    oracle: Arc<OnceLock<Oracle>>,
}

impl AppState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ready(oracle: Oracle) -> Self {
        let s = Self::new();
        s.install(oracle);
        s
    }

    /// Publishes the oracle. Later calls are ignored.
    pub fn install(&self, oracle: Oracle) {
        let _ = self.oracle.set(oracle);
    }

    pub fn oracle(&self) -> Option<&Oracle> {
        self.oracle.get()
    }
}

/// HTTP status for a domain error.
pub fn status_for(e: &CoreError) -> StatusCode {
    match e {
        CoreError::BadRequest { .. }
        | CoreError::UnknownFunction(_)
        | CoreError::InvalidLimit(_)
        | CoreError::InvalidBoundingBox(_)
        | CoreError::InvalidCoordinate(_) => StatusCode::BAD_REQUEST,
        CoreError::AreaNotFound(_) | CoreError::ObjectNotFound { .. } | CoreError::NoMatch(_) | CoreError::NoObjects => {
            StatusCode::NOT_FOUND
        }
        CoreError::AmbiguousArea { .. } => StatusCode::CONFLICT,
        CoreError::IdOverflow(_) | CoreError::EmptyDescription => StatusCode::UNPROCESSABLE_ENTITY,
        _ => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

const NOT_READY: &str = r#"{"error":{"code":"NotReady","message":"store is still loading"}}"#;

async fn health(State(state): State<AppState>) -> Response {
    match state.oracle() {
        Some(_) => json(StatusCode::OK, r#"{"status":"ready"}"#.into()),
        None => json(StatusCode::SERVICE_UNAVAILABLE, r#"{"status":"loading"}"#.into()),
    }
}

async fn query(State(state): State<AppState>, body: Bytes) -> Response {
    let Some(oracle) = state.oracle() else {
        return json(StatusCode::SERVICE_UNAVAILABLE, NOT_READY.into());
    };
    match oracle.handle(&body) {
        Ok(resp) => json(StatusCode::OK, resp.to_json()),
        Err(e) => json(status_for(&e), error_json(&e)),
    }
}

pub fn router(state: AppState) -> Router {
    Router::new().route("/query", post(query)).route("/health", get(health)).with_state(state)
}

/// Serves on `listener`, loading the oracle with `loader` in the
/// background. Returns when `shutdown` resolves, or with an error if
/// loading fails.
pub async fn run<L, S>(listener: TcpListener, loader: L, shutdown: S) -> Result<(), ServiceError>
where
    L: FnOnce() -> Result<Oracle, CoreError> + Send + 'static,
    S: Future<Output = ()> + Send + 'static,
{
    let state = AppState::new();
    let (fail_tx, fail_rx) = oneshot::channel::<CoreError>();
    let loading = state.clone();
    let load_task = tokio::task::spawn_blocking(move || match loader() {
        Ok(oracle) => {
            loading.install(oracle);
            tracing::info!("store loaded, serving queries");
        }
        Err(e) => {
            tracing::error!(error = %e, "store failed to load");
            let _ = fail_tx.send(e);
        }
    });
    let (stop_tx, stop_rx) = oneshot::channel::<Option<CoreError>>();
    tokio::spawn(async move {
        let failed = async {
            match fail_rx.await {
                Ok(e) => e,
                // Sender dropped after a successful load: never fires.
                Err(_) => std::future::pending().await,
            }
        };
        let reason = tokio::select! {
            e = failed => Some(e),
            _ = shutdown => None,
        };
        let _ = stop_tx.send(reason);
    });
    let (done_tx, done_rx) = oneshot::channel::<Option<CoreError>>();
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async move {
            let reason = stop_rx.await.unwrap_or(None);
            let _ = done_tx.send(reason);
        })
        .await?;
    let _ = load_task.await;
    match done_rx.await {
        Ok(Some(e)) => Err(ServiceError::Load(e)),
        _ => Ok(()),
    }
}

/// Loads, validates and indexes the store at `config.store`.
pub fn load_oracle(config: &ServiceConfig) -> Result<Oracle, CoreError> {
    let store = load_store(&config.store)?;
    Ok(Oracle::new(build_index(store)?, config.oracle))
}

/// Binds `config.bind` and serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServiceError> {
    let listener = TcpListener::bind(&config.bind)
        .await
        .map_err(|source| ServiceError::Bind { addr: config.bind.clone(), source })?;
    let addr: SocketAddr = listener.local_addr()?;
    tracing::info!(%addr, store = %config.store.display(), "listening");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    run(listener, move || load_oracle(&config), shutdown).await
}
