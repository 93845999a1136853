//! HTTP API over the template registry, instance engine, quality reports
//! and the authority gateway. Every route lives under `/v1/`.

mod error;
mod registry;
mod routes;
mod store;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, Method};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use metaforge_gateway::{Gateway, GatewayConfig, GatewayError, HttpTransport};
use thiserror::Error;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

pub use error::{status_for, ApiError};
pub use registry::{Registered, Registry, RegistryEntry, StoreError};
pub use store::{new_instance_id, InstanceStore, StoredMeta};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub data_dir: PathBuf,
    pub gateway: GatewayConfig,
    /// When set, every route except `/v1/healthz` needs `Authorization: Bearer <token>`.
    pub bearer_token: Option<String>,
    /// Allowed CORS origins; empty means any origin.
    pub cors_origins: Vec<String>,
}

impl ServiceConfig {
    pub fn new(data_dir: impl Into<PathBuf>, gateway: GatewayConfig) -> Self {
        Self {
            data_dir: data_dir.into(),
            gateway,
            bearer_token: None,
            cors_origins: Vec::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("gateway setup failed: {0}")]
    Gateway(#[from] GatewayError),
    #[error("bad CORS origin `{0}`")]
    BadOrigin(String),
    #[error("server i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub struct AppState {
    pub registry: Registry,
    pub store: InstanceStore,
    pub gateway: Gateway,
    token: Option<String>,
}

impl AppState {
    pub fn open(config: &ServiceConfig, transport: Arc<dyn HttpTransport>) -> Result<Self, ServiceError> {
        Ok(Self {
            registry: Registry::open(&config.data_dir)?,
            store: InstanceStore::open(&config.data_dir)?,
            gateway: Gateway::new(&config.gateway, transport)?,
            token: config.bearer_token.clone(),
        })
    }
}

/// The `/v1` router. Unknown routes and methods answer with an [`ApiError`].
pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Result<Router, ServiceError> {
    let api = Router::new()
        .route("/v1/templates", get(routes::list_templates).post(routes::register_template))
        .route("/v1/templates/{id}", get(routes::get_template))
        .route("/v1/templates/{id}/render-plan", post(routes::render_plan))
        .route("/v1/templates/{id}/validate", post(routes::validate))
        .route("/v1/templates/{id}/quality-report", post(routes::quality_report))
        .route("/v1/templates/{id}/serialize", post(routes::serialize))
        .route("/v1/templates/{id}/instances", post(routes::store_instance))
        .route("/v1/instances/{instance_id}", get(routes::get_instance))
        .route("/v1/search/authority", get(routes::search_authority))
        .route("/v1/search/ontology", get(routes::search_ontology))
        .route("/v1/resolve/authority", get(routes::resolve_authority))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    Ok(Router::new()
        .route("/v1/healthz", get(routes::healthz))
        .merge(api)
        .fallback(routes::not_found)
        .method_not_allowed_fallback(routes::method_not_allowed)
        .with_state(state)
        .layer(cors(cors_origins)?)
        .layer(middleware::from_fn(log_request)))
}

fn cors(origins: &[String]) -> Result<CorsLayer, ServiceError> {
    let layer = CorsLayer::new()
        .allow_methods([Method::GET, Method::POST, Method::OPTIONS])
        .allow_headers([header::CONTENT_TYPE, header::AUTHORIZATION]);
    if origins.is_empty() {
        return Ok(layer.allow_origin(Any));
    }
    let parsed = origins
        .iter()
        .map(|o| HeaderValue::from_str(o).map_err(|_| ServiceError::BadOrigin(o.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(layer.allow_origin(AllowOrigin::list(parsed)))
}

async fn require_token(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|t| t == token);
        if !ok {
            return ApiError::new("UNAUTHORIZED", "missing or wrong bearer token").into_response();
        }
    }
    next.run(req).await
}

async fn log_request(req: Request, next: Next) -> Response {
    let method = req.method().clone();
    let uri = req.uri().clone();
    let start = Instant::now();
    let resp = next.run(req).await;
    tracing::info!(
        "{method} {} {} {}ms",
        uri.path(),
        resp.status().as_u16(),
        start.elapsed().as_millis()
    );
    resp
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    config: &ServiceConfig,
    transport: Arc<dyn HttpTransport>,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> Result<(), ServiceError> {
    let state = Arc::new(AppState::open(config, transport)?);
    let app = router(state, &config.cors_origins)?;
    axum::serve(listener, app).with_graceful_shutdown(shutdown).await?;
    Ok(())
}
