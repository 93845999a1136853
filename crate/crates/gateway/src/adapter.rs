use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use metaforge_core::identifier::AuthoritySource;
use serde_json::{json, Value};
use url::Url;

use crate::transport::{HttpTransport, TransportError};
use crate::{fixture_slug, GatewayConfig, GatewayError};

/// Fetches raw upstream payloads for one authority. Adapters keep no
/// per-query state; caching happens in the gateway.
#[async_trait]
pub trait AuthorityAdapter: Send + Sync {
    fn source(&self) -> AuthoritySource;
    async fn search(&self, query: &str, limit: usize) -> Result<Value, GatewayError>;
    /// `iri` is already canonical.
    async fn resolve(&self, iri: &str) -> Result<Value, GatewayError>;
}

const ORCID_SEARCH: &str = "https://pub.orcid.org/v3.0/expanded-search/";
const ROR_ORGS: &str = "https://api.ror.org/v2/organizations";
const COMPTOX_BASE: &str = "https://api-ccte.epa.gov/chemical/";

pub struct LiveAdapter {
    source: AuthoritySource,
    transport: Arc<dyn HttpTransport>,
    api_key: Option<String>,
    timeout: Duration,
    retries: u32,
}

impl LiveAdapter {
    pub fn new(source: AuthoritySource, transport: Arc<dyn HttpTransport>, config: &GatewayConfig) -> Self {
        Self {
            source,
            transport,
            api_key: config.comptox_api_key.clone(),
            timeout: config.timeout,
            retries: config.retries,
        }
    }

    fn search_url(&self, query: &str, limit: usize) -> Url {
        match self.source {
            AuthoritySource::Orcid => {
                Url::parse_with_params(ORCID_SEARCH, [("q", query), ("rows", &limit.to_string())]).expect("static base url")
            }
            AuthoritySource::Ror => Url::parse_with_params(ROR_ORGS, [("query", query)]).expect("static base url"),
            AuthoritySource::Comptox => with_segments(COMPTOX_BASE, &["search", "contain", query]),
        }
    }

    fn resolve_url(&self, iri: &str) -> Url {
        let local = self.source.local_id(iri);
        match self.source {
            AuthoritySource::Orcid => {
                Url::parse_with_params(ORCID_SEARCH, [("q", format!("orcid:{local}"))]).expect("static base url")
            }
            AuthoritySource::Ror => with_segments(&format!("{ROR_ORGS}/"), &[local]),
            AuthoritySource::Comptox => with_segments(COMPTOX_BASE, &["detail", "search", "by-dtxsid", local]),
        }
    }

    async fn fetch(&self, url: Url) -> Result<Value, GatewayError> {
        let mut headers = vec![("accept", "application/json")];
        if self.source == AuthoritySource::Comptox {
            match self.api_key.as_deref() {
                Some(k) => headers.push(("x-api-key", k)),
                None => {
                    return Err(GatewayError::UpstreamError {
                        status: None,
                        message: "COMPTOX_API_KEY is not set".into(),
                    })
                }
            }
        }
        let mut attempt = 0;
        let resp = loop {
            attempt += 1;
            tracing::debug!(source = %self.source, %url, attempt, "upstream request");
            match tokio::time::timeout(self.timeout, self.transport.get(url.as_str(), &headers)).await {
                Ok(Ok(r)) => break r,
                Ok(Err(TransportError::Other(m))) => return Err(GatewayError::UpstreamError { status: None, message: m }),
                Ok(Err(TransportError::Timeout)) | Err(_) if attempt <= self.retries => continue,
                Ok(Err(TransportError::Timeout)) | Err(_) => return Err(GatewayError::UpstreamTimeout),
            }
        };
        if resp.status == 404 {
            return Err(GatewayError::NotFound(url.to_string()));
        }
        if !(200..300).contains(&resp.status) {
            return Err(GatewayError::UpstreamError {
                status: Some(resp.status),
                message: String::from_utf8_lossy(&resp.body).chars().take(200).collect(),
            });
        }
        serde_json::from_slice(&resp.body).map_err(|e| GatewayError::UpstreamShape(format!("body is not JSON: {e}")))
    }
}

fn with_segments(base: &str, segments: &[&str]) -> Url {
    let mut url = Url::parse(base).expect("static base url");
    url.path_segments_mut().expect("http url has a path").pop_if_empty().extend(segments);
    url
}

#[async_trait]
impl AuthorityAdapter for LiveAdapter {
    fn source(&self) -> AuthoritySource {
        self.source
    }

    async fn search(&self, query: &str, limit: usize) -> Result<Value, GatewayError> {
        self.fetch(self.search_url(query, limit)).await
    }

    async fn resolve(&self, iri: &str) -> Result<Value, GatewayError> {
        self.fetch(self.resolve_url(iri)).await
    }
}

/// Serves recorded payloads from `<dir>/<source>/{search,resolve}/<slug>.json`.
/// A query with no recording yields an empty result list; an identifier with
/// no recording is NOT_FOUND.
pub struct FixtureAdapter {
    source: AuthoritySource,
    dir: PathBuf,
}

impl FixtureAdapter {
    pub fn new(source: AuthoritySource, dir: PathBuf) -> Self {
        Self { source, dir }
    }

    fn read(&self, kind: &str, key: &str) -> Result<Option<Value>, GatewayError> {
        let path = self.dir.join(self.source.as_str()).join(kind).join(format!("{}.json", fixture_slug(key)));
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => {
                return Err(GatewayError::UpstreamError {
                    status: None,
                    message: format!("{}: {e}", path.display()),
                })
            }
        };
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| GatewayError::UpstreamShape(format!("{}: {e}", path.display())))
    }

    fn empty_payload(&self) -> Value {
        match self.source {
            AuthoritySource::Orcid => json!({"expanded-result": null, "num-found": 0}),
            AuthoritySource::Ror => json!({"number_of_results": 0, "items": []}),
            AuthoritySource::Comptox => json!([]),
        }
    }
}

#[async_trait]
impl AuthorityAdapter for FixtureAdapter {
    fn source(&self) -> AuthoritySource {
        self.source
    }

    async fn search(&self, query: &str, _limit: usize) -> Result<Value, GatewayError> {
        Ok(self.read("search", query)?.unwrap_or_else(|| self.empty_payload()))
    }

    async fn resolve(&self, iri: &str) -> Result<Value, GatewayError> {
        self.read("resolve", self.source.local_id(iri))?
            .ok_or_else(|| GatewayError::NotFound(iri.to_owned()))
    }
}
