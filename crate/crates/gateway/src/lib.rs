//! One normalized API over external authority registries (ORCID, ROR,
//! CompTox) and ontology term sources.
//!
//! Every source has a live adapter and a recorded-fixture adapter; offline
//! mode uses fixtures only and never touches the network.

mod adapter;
mod cache;
mod normalize;
mod ontology;
mod transport;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use metaforge_core::identifier::{AuthoritySource, IdentifierError};
use metaforge_core::template::TermSourceSpec;
use serde::Serialize;
use thiserror::Error;
use tokio::sync::Semaphore;

pub use adapter::{AuthorityAdapter, FixtureAdapter, LiveAdapter};
pub use cache::TtlCache;
pub use normalize::{normalize_record, normalize_response};
pub use ontology::{search_terms, Vocabulary, VocabularyTerm};
pub use transport::{FailOnContact, HttpResponse, HttpTransport, ReqwestTransport, TransportError};

pub const DEFAULT_LIMIT: usize = 10;
pub const MAX_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuthoritySuggestion {
    pub source: AuthoritySource,
    pub id: String,
    pub label: String,
    pub detail: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TermSuggestion {
    pub iri: String,
    pub label: String,
    pub synonyms: Vec<String>,
    pub source_acronym: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error("unknown authority source `{0}`")]
    UnknownSource(String),
    #[error("unknown ontology acronym `{0}`")]
    UnknownSourceAcronym(String),
    #[error("query is empty")]
    QueryEmpty,
    #[error("no term sources given")]
    NoSources,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("`{0}` was not found")]
    NotFound(String),
    #[error("upstream did not answer in time")]
    UpstreamTimeout,
    #[error("upstream error{}: {message}", .status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    UpstreamError { status: Option<u16>, message: String },
    #[error("unexpected upstream payload: {0}")]
    UpstreamShape(String),
}

impl GatewayError {
    pub fn code(&self) -> &'static str {
        match self {
            Self::UnknownSource(_) => "UNKNOWN_SOURCE",
            Self::UnknownSourceAcronym(_) => "UNKNOWN_SOURCE_ACRONYM",
            Self::QueryEmpty => "QUERY_EMPTY",
            Self::NoSources => "QUERY_EMPTY",
            Self::InvalidIdentifier(_) => "INVALID_IDENTIFIER",
            Self::NotFound(_) => "NOT_FOUND",
            Self::UpstreamTimeout => "UPSTREAM_TIMEOUT",
            Self::UpstreamError { .. } => "UPSTREAM_ERROR",
            Self::UpstreamShape(_) => "UPSTREAM_SHAPE_ERROR",
        }
    }
}

impl From<IdentifierError> for GatewayError {
    fn from(e: IdentifierError) -> Self {
        match e {
            IdentifierError::Malformed(s) | IdentifierError::Checksum(s) => Self::InvalidIdentifier(s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub offline: bool,
    pub fixture_dir: PathBuf,
    pub comptox_api_key: Option<String>,
    pub timeout: Duration,
    pub retries: u32,
    pub cache_ttl: Duration,
    pub cache_capacity: usize,
    pub max_in_flight: usize,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            offline: false,
            fixture_dir: PathBuf::from("fixtures/gateway"),
            comptox_api_key: None,
            timeout: Duration::from_secs(2),
            retries: 1,
            cache_ttl: Duration::from_secs(15 * 60),
            cache_capacity: 10_000,
            max_in_flight: 8,
        }
    }
}

impl GatewayConfig {
    /// Reads `GATEWAY_OFFLINE` and `COMPTOX_API_KEY`.
    pub fn from_env() -> Self {
        Self {
            offline: std::env::var("GATEWAY_OFFLINE").is_ok_and(|v| v == "1"),
            comptox_api_key: std::env::var("COMPTOX_API_KEY").ok().filter(|k| !k.is_empty()),
            ..Self::default()
        }
    }
}

type SearchKey = (AuthoritySource, String, usize);

pub struct Gateway {
    adapters: BTreeMap<AuthoritySource, Arc<dyn AuthorityAdapter>>,
    vocabulary: Arc<Vocabulary>,
    search_cache: TtlCache<SearchKey, Vec<AuthoritySuggestion>>,
    resolve_cache: TtlCache<(AuthoritySource, String), AuthoritySuggestion>,
    permits: Semaphore,
}

impl Gateway {
    /// Fixture adapters when `config.offline`, otherwise live adapters over
    /// `transport`. The vocabulary is read from the fixture directory when
    /// present.
    pub fn new(config: &GatewayConfig, transport: Arc<dyn HttpTransport>) -> Result<Self, GatewayError> {
        let adapters = AuthoritySource::ALL
            .into_iter()
            .map(|source| {
                let a: Arc<dyn AuthorityAdapter> = if config.offline {
                    Arc::new(FixtureAdapter::new(source, config.fixture_dir.clone()))
                } else {
                    Arc::new(LiveAdapter::new(source, transport.clone(), config))
                };
                (source, a)
            })
            .collect();
        let vocab_path = config.fixture_dir.join("vocabulary.json");
        let vocabulary = if vocab_path.exists() {
            Vocabulary::load(&vocab_path)?
        } else {
            Vocabulary::default()
        };
        Ok(Self::with_adapters(adapters, vocabulary, config))
    }

    pub fn with_adapters(
        adapters: BTreeMap<AuthoritySource, Arc<dyn AuthorityAdapter>>,
        vocabulary: Vocabulary,
        config: &GatewayConfig,
    ) -> Self {
        Self {
            adapters,
            vocabulary: Arc::new(vocabulary),
            search_cache: TtlCache::new(config.cache_capacity, config.cache_ttl),
            resolve_cache: TtlCache::new(config.cache_capacity, config.cache_ttl),
            permits: Semaphore::new(config.max_in_flight.max(1)),
        }
    }

    fn adapter(&self, source: &str) -> Result<(AuthoritySource, Arc<dyn AuthorityAdapter>), GatewayError> {
        let s: AuthoritySource = source.parse().map_err(|_| GatewayError::UnknownSource(source.to_owned()))?;
        let a = self.adapters.get(&s).ok_or_else(|| GatewayError::UnknownSource(source.to_owned()))?;
        Ok((s, a.clone()))
    }

    /// Searches one authority. Upstream order is preserved; items that do
    /// not carry a canonical identifier are dropped.
    pub async fn search_authority(&self, source: &str, query: &str, limit: Option<usize>) -> Result<Vec<AuthoritySuggestion>, GatewayError> {
        let (s, adapter) = self.adapter(source)?;
        let q = normalize_query(query);
        if q.is_empty() {
            return Err(GatewayError::QueryEmpty);
        }
        let limit = clamp_limit(limit);
        let key = (s, q.clone(), limit);
        if let Some(hit) = self.search_cache.get(&key) {
            return Ok(hit);
        }
        let raw = {
            let _permit = self.permits.acquire().await.expect("semaphore never closes");
            adapter.search(&q, limit).await?
        };
        let mut out = normalize_response(s, &raw)?;
        out.truncate(limit);
        self.search_cache.insert(key, out.clone());
        Ok(out)
    }

    /// Canonicalizes `id` (checking the ORCID checksum) and looks up its
    /// label.
    pub async fn resolve_identifier(&self, source: &str, id: &str) -> Result<AuthoritySuggestion, GatewayError> {
        let (s, adapter) = self.adapter(source)?;
        let iri = s.canonicalize(id)?;
        let key = (s, iri.clone());
        if let Some(hit) = self.resolve_cache.get(&key) {
            return Ok(hit);
        }
        let raw = {
            let _permit = self.permits.acquire().await.expect("semaphore never closes");
            adapter.resolve(&iri).await?
        };
        let found = normalize_record(s, &raw)?
            .into_iter()
            .find(|x| x.id == iri)
            .ok_or_else(|| GatewayError::NotFound(iri.clone()))?;
        self.resolve_cache.insert(key, found.clone());
        Ok(found)
    }

    /// Term search over the local vocabulary index.
    pub fn search_ontology(&self, sources: &[TermSourceSpec], query: &str, limit: Option<usize>) -> Result<Vec<TermSuggestion>, GatewayError> {
        search_terms(&self.vocabulary, sources, query, clamp_limit(limit))
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }
}

/// Trimmed, lowercased, inner whitespace collapsed.
pub fn normalize_query(q: &str) -> String {
    q.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Missing limits default to 10; anything else is clamped into 1..=50.
pub fn clamp_limit(limit: Option<usize>) -> usize {
    limit.unwrap_or(DEFAULT_LIMIT).clamp(1, MAX_LIMIT)
}

/// File-name form of a query or identifier used by fixture adapters.
pub fn fixture_slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.trim().to_lowercase().chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_owned()
}
