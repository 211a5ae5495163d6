//! File formats, persistence and the citation-provider contract.
//!
//! Canonical serialization is JSON with stable key ordering (struct fields
//! in declaration order, maps sorted by key), so re-exports diff cleanly.
//! Every file carries an integer schema version and loaders accept equal
//! versions only. A CSV edge list (`citing,cited` header) is accepted as an
//! alternative edge input.

use std::cell::{Cell, RefCell};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::corpus::{normalize_title, Article, ArticleId, CitationGraph, CorpusError};
use crate::provenance::{ProvenanceError, SearchTrace, TRACE_SCHEMA_VERSION};
use crate::screening::{Decider, ReviewerPanel, Score, ScoreEntry, Verdict};

pub const CORPUS_SCHEMA_VERSION: u32 = 1;
pub const DECISIONS_SCHEMA_VERSION: u32 = 1;
pub const GOLD_SCHEMA_VERSION: u32 = 1;

/// Environment variable overriding the provider cache directory.
pub const CACHE_DIR_ENV: &str = "SNOWBALL_CACHE_DIR";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot access `{path}`: {message}")]
    Io { path: PathBuf, message: String },
    #[error("parse error in `{path}`: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("`{path}` has schema version {found}, expected {expected}")]
    SchemaVersionMismatch {
        path: PathBuf,
        found: u32,
        expected: u32,
    },
    #[error("unknown field `{field}` in {location} of `{path}`")]
    UnknownField {
        path: PathBuf,
        location: String,
        field: String,
    },
    #[error("corpus invariant violated: {0}")]
    InvariantViolation(#[from] CorpusError),
    #[error("trace invariant violated: {0}")]
    TraceInvariant(#[from] ProvenanceError),
    #[error("decision file problem: {0}")]
    DecisionsShape(String),
    #[error("article `{article}` has score {value} outside {{0, 1, 2}}")]
    InvalidScoreValue { article: ArticleId, value: u8 },
    #[error("article `{article}` lists {found} scores for {expected} reviewers")]
    ScoreArityMismatch {
        article: ArticleId,
        expected: usize,
        found: usize,
    },
}

fn io_err(path: &Path, err: std::io::Error) -> IngestError {
    IngestError::Io {
        path: path.to_owned(),
        message: err.to_string(),
    }
}

fn parse_err(path: &Path, err: impl std::fmt::Display) -> IngestError {
    IngestError::Parse {
        path: path.to_owned(),
        message: err.to_string(),
    }
}

/// On-disk corpus: article records plus `(citing, cited)` id pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusFile {
    pub schema_version: u32,
    pub articles: Vec<Article>,
    pub edges: Vec<(ArticleId, ArticleId)>,
}

const CORPUS_FIELDS: &[&str] = &["schema_version", "articles", "edges"];
const ARTICLE_FIELDS: &[&str] = &[
    "id",
    "title",
    "abstract",
    "keywords",
    "year",
    "pub_type",
    "venue",
    "supersedes",
];

fn check_fields(
    path: &Path,
    value: &Value,
    allowed: &[&str],
    location: &str,
    strict: bool,
) -> Result<(), IngestError> {
    let Some(object) = value.as_object() else {
        return Ok(());
    };
    for key in object.keys() {
        if !allowed.contains(&key.as_str()) {
            if strict {
                return Err(IngestError::UnknownField {
                    path: path.to_owned(),
                    location: location.to_owned(),
                    field: key.clone(),
                });
            }
            log::warn!("ignoring unknown field `{key}` in {location} of `{}`", path.display());
        }
    }
    Ok(())
}

fn check_schema_version(path: &Path, value: &Value, expected: u32) -> Result<(), IngestError> {
    let found = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| parse_err(path, "missing integer `schema_version`"))? as u32;
    if found != expected {
        return Err(IngestError::SchemaVersionMismatch {
            path: path.to_owned(),
            found,
            expected,
        });
    }
    Ok(())
}

/// Loads and validates a corpus file. In strict mode unknown fields are
/// errors; otherwise they are warned about and ignored.
pub fn load_corpus(path: &Path, strict: bool) -> Result<CitationGraph, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    check_schema_version(path, &value, CORPUS_SCHEMA_VERSION)?;
    check_fields(path, &value, CORPUS_FIELDS, "corpus file", strict)?;
    if let Some(articles) = value.get("articles").and_then(Value::as_array) {
        for (index, article) in articles.iter().enumerate() {
            check_fields(path, article, ARTICLE_FIELDS, &format!("article {index}"), strict)?;
        }
    }
    let file: CorpusFile = serde_json::from_value(value).map_err(|e| parse_err(path, e))?;
    let graph = CitationGraph::build(file.articles, file.edges)?;

    let mut by_key: BTreeMap<String, Vec<&ArticleId>> = BTreeMap::new();
    for article in graph.articles() {
        by_key
            .entry(normalize_title(&article.title))
            .or_default()
            .push(&article.id);
    }
    for (key, ids) in by_key {
        if ids.len() > 1 {
            let ids: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
            log::warn!("articles {} share the normalized title `{key}`", ids.join(", "));
        }
    }
    Ok(graph)
}

pub fn save_corpus(graph: &CitationGraph, path: &Path) -> Result<(), IngestError> {
    let file = CorpusFile {
        schema_version: CORPUS_SCHEMA_VERSION,
        articles: graph.articles().cloned().collect(),
        edges: graph
            .edges()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect(),
    };
    write_json(path, &file)
}

/// Loads a `citing,cited` CSV edge list.
pub fn load_edges_csv(path: &Path) -> Result<Vec<(ArticleId, ArticleId)>, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(path, e))?;
    {
        let headers = reader.headers().map_err(|e| parse_err(path, e))?;
        if headers.iter().collect::<Vec<_>>() != ["citing", "cited"] {
            return Err(parse_err(path, "expected header `citing,cited`"));
        }
    }
    let mut edges = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_err(path, e))?;
        if record.len() != 2 {
            return Err(parse_err(path, format!("expected 2 columns, got {}", record.len())));
        }
        edges.push((ArticleId::from(&record[0]), ArticleId::from(&record[1])));
    }
    Ok(edges)
}

/// On-disk screening decisions: either direct verdicts or full score sheets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecisionFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewers: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdicts: Option<BTreeMap<ArticleId, Verdict>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<BTreeMap<ArticleId, ScoreFileEntry>>,
}

/// Raw score lists as they appear in the file, validated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreFileEntry {
    pub title: Vec<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fulltext: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wildcard_by: Option<String>,
}

/// Loads a decision file and validates score arity and values against the
/// panel. A file listing its own reviewers must agree with the panel.
pub fn load_decisions(path: &Path, panel: &ReviewerPanel) -> Result<Decider, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    check_schema_version(path, &value, DECISIONS_SCHEMA_VERSION)?;
    let file: DecisionFile = serde_json::from_value(value).map_err(|e| parse_err(path, e))?;
    decisions_to_decider(file, panel)
}

fn decisions_to_decider(file: DecisionFile, panel: &ReviewerPanel) -> Result<Decider, IngestError> {
    if let Some(reviewers) = &file.reviewers {
        if reviewers != panel.reviewers() {
            return Err(IngestError::DecisionsShape(format!(
                "file reviewers {reviewers:?} do not match the configured panel {:?}",
                panel.reviewers()
            )));
        }
    }
    match (file.verdicts, file.scores) {
        (Some(verdicts), None) => Ok(Decider::Verdicts(verdicts)),
        (None, Some(scores)) => {
            let mut entries = BTreeMap::new();
            for (article, entry) in scores {
                entries.insert(article.clone(), convert_scores(article, entry, panel)?);
            }
            Ok(Decider::Scores(entries))
        }
        (None, None) => Err(IngestError::DecisionsShape(
            "file must contain `verdicts` or `scores`".into(),
        )),
        (Some(_), Some(_)) => Err(IngestError::DecisionsShape(
            "file must contain exactly one of `verdicts` and `scores`".into(),
        )),
    }
}

fn convert_scores(
    article: ArticleId,
    entry: ScoreFileEntry,
    panel: &ReviewerPanel,
) -> Result<ScoreEntry, IngestError> {
    let convert = |values: &[u8]| -> Result<Vec<Score>, IngestError> {
        if values.len() != panel.len() {
            return Err(IngestError::ScoreArityMismatch {
                article: article.clone(),
                expected: panel.len(),
                found: values.len(),
            });
        }
        values
            .iter()
            .map(|&v| {
                Score::new(v).map_err(|_| IngestError::InvalidScoreValue {
                    article: article.clone(),
                    value: v,
                })
            })
            .collect()
    };
    Ok(ScoreEntry {
        title: convert(&entry.title)?,
        fulltext: entry.fulltext.as_deref().map(convert).transpose()?,
        wildcard_by: entry.wildcard_by,
    })
}

pub fn save_decisions(decider: &Decider, panel: &ReviewerPanel, path: &Path) -> Result<(), IngestError> {
    let file = match decider {
        Decider::Verdicts(verdicts) => DecisionFile {
            schema_version: DECISIONS_SCHEMA_VERSION,
            reviewers: None,
            verdicts: Some(verdicts.clone()),
            scores: None,
        },
        Decider::Scores(scores) => DecisionFile {
            schema_version: DECISIONS_SCHEMA_VERSION,
            reviewers: Some(panel.reviewers().to_vec()),
            verdicts: None,
            scores: Some(
                scores
                    .iter()
                    .map(|(id, entry)| {
                        (
                            id.clone(),
                            ScoreFileEntry {
                                title: entry.title.iter().map(|s| s.value()).collect(),
                                fulltext: entry
                                    .fulltext
                                    .as_ref()
                                    .map(|v| v.iter().map(|s| s.value()).collect()),
                                wildcard_by: entry.wildcard_by.clone(),
                            },
                        )
                    })
                    .collect(),
            ),
        },
    };
    write_json(path, &file)
}

/// Gold-standard article list for recall/precision reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoldFile {
    pub schema_version: u32,
    pub articles: Vec<ArticleId>,
}

pub fn load_gold(path: &Path) -> Result<BTreeSet<ArticleId>, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    check_schema_version(path, &value, GOLD_SCHEMA_VERSION)?;
    let file: GoldFile = serde_json::from_value(value).map_err(|e| parse_err(path, e))?;
    Ok(file.articles.into_iter().collect())
}

pub fn save_gold(articles: &BTreeSet<ArticleId>, path: &Path) -> Result<(), IngestError> {
    write_json(
        path,
        &GoldFile {
            schema_version: GOLD_SCHEMA_VERSION,
            articles: articles.iter().cloned().collect(),
        },
    )
}

pub fn export_trace(trace: &SearchTrace, path: &Path) -> Result<(), IngestError> {
    write_json(path, trace)
}

pub fn load_trace(path: &Path) -> Result<SearchTrace, IngestError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    check_schema_version(path, &value, TRACE_SCHEMA_VERSION)?;
    let trace: SearchTrace = serde_json::from_value(value).map_err(|e| parse_err(path, e))?;
    trace.validate()?;
    Ok(trace)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IngestError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| io_err(path, e))?;
        }
    }
    let mut text = serde_json::to_string_pretty(value).map_err(|e| parse_err(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_err(path, e))
}

// ---------------------------------------------------------------------------
// Citation providers

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error("unknown article `{0}`")]
    UnknownArticle(ArticleId),
    #[error("remote unavailable after {attempts} attempt(s): {message}")]
    RemoteUnavailable { attempts: u32, message: String },
    #[error("malformed provider response: {0}")]
    MalformedResponse(String),
    #[error("cache error: {0}")]
    Cache(String),
}

/// Retrieval contract generalizing reference/citation lookads against an
/// external index: deterministic for a fixed corpus snapshot, cacheable.
pub trait CitationProvider {
    fn provider_id(&self) -> &str;
    fn get_references(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError>;
    fn get_citations(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError>;
}

/// Provider answering directly from an in-memory citation graph.
pub struct FileProvider<'a> {
    graph: &'a CitationGraph,
}

pub fn file_provider(graph: &CitationGraph) -> FileProvider<'_> {
    FileProvider { graph }
}

impl FileProvider<'_> {
    fn lookup(
        &self,
        id: &ArticleId,
        direction: for<'g> fn(
            &'g CitationGraph,
            &ArticleId,
        ) -> Result<&'g BTreeSet<ArticleId>, CorpusError>,
    ) -> Result<Vec<Article>, ProviderError> {
        let neighbors = direction(self.graph, id)
            .map_err(|_| ProviderError::UnknownArticle(id.clone()))?;
        Ok(neighbors
            .iter()
            .map(|n| self.graph.article(n).expect("graph edges are closed").clone())
            .collect())
    }
}

impl CitationProvider for FileProvider<'_> {
    fn provider_id(&self) -> &str {
        "file"
    }

    fn get_references(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError> {
        self.lookup(id, |g, i| g.references(i))
    }

    fn get_citations(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError> {
        self.lookup(id, |g, i| g.citations(i))
    }
}

/// Transport outcome classification drives the retry policy.
#[derive(Debug, Error)]
pub enum TransportError {
    #[error("transient: {0}")]
    Transient(String),
    #[error("permanent: {0}")]
    Permanent(String),
}

/// Minimal HTTP-shaped transport, mockable in tests.
pub trait Transport {
    fn get(&self, url: &str) -> Result<String, TransportError>;
}

/// Real HTTP transport.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<HttpTransport, ProviderError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ProviderError::RemoteUnavailable {
                attempts: 0,
                message: e.to_string(),
            })?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<String, TransportError> {
        let response = self
            .client
            .get(url)
            .send()
            .map_err(|e| TransportError::Transient(e.to_string()))?;
        let status = response.status();
        if status.is_server_error() {
            return Err(TransportError::Transient(format!("status {status}")));
        }
        if !status.is_success() {
            return Err(TransportError::Permanent(format!("status {status}")));
        }
        response
            .text()
            .map_err(|e| TransportError::Transient(e.to_string()))
    }
}

/// Remote provider settings.
#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub provider_id: String,
    /// Endpoint answering `GET {base}/references/{id}` and
    /// `GET {base}/citations/{id}` with a JSON list of article records.
    pub base_url: String,
    /// Minimum spacing between remote requests.
    pub min_request_interval: Duration,
    /// Retries after the first attempt on transient failures.
    pub max_retries: u32,
    /// Base backoff, doubled per retry.
    pub backoff: Duration,
    pub cache_dir: PathBuf,
}

/// Rate-limited, retrying provider with a write-once response cache keyed by
/// (provider, operation, id). Cache hits never touch the remote.
pub struct RemoteProvider {
    config: RemoteConfig,
    transport: Box<dyn Transport>,
    last_request: RefCell<Option<Instant>>,
    remote_requests: Cell<u64>,
}

pub fn remote_provider(config: RemoteConfig) -> Result<RemoteProvider, ProviderError> {
    let transport = HttpTransport::new(Duration::from_secs(30))?;
    Ok(remote_provider_with_transport(config, Box::new(transport)))
}

pub fn remote_provider_with_transport(
    config: RemoteConfig,
    transport: Box<dyn Transport>,
) -> RemoteProvider {
    RemoteProvider {
        config,
        transport,
        last_request: RefCell::new(None),
        remote_requests: Cell::new(0),
    }
}

/// Explicit directory, else the `SNOWBALL_CACHE_DIR` environment variable.
pub fn resolve_cache_dir(explicit: Option<PathBuf>) -> Option<PathBuf> {
    explicit.or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from))
}

impl RemoteProvider {
    /// Remote fetches performed so far (cache hits do not count).
    pub fn remote_requests(&self) -> u64 {
        self.remote_requests.get()
    }

    fn cache_path(&self, operation: &str, id: &ArticleId) -> PathBuf {
        self.config
            .cache_dir
            .join(&self.config.provider_id)
            .join(operation)
            .join(format!("{}.json", cache_file_stem(id.as_str())))
    }

    fn fetch(&self, operation: &str, id: &ArticleId) -> Result<Vec<Article>, ProviderError> {
        let path = self.cache_path(operation, id);
        if let Ok(text) = fs::read_to_string(&path) {
            return parse_article_list(&text)
                .map_err(|e| ProviderError::Cache(format!("{}: {e}", path.display())));
        }

        self.respect_rate_limit();
        let url = format!("{}/{operation}/{id}", self.config.base_url.trim_end_matches('/'));
        let body = self.fetch_with_retries(&url)?;
        let articles = parse_article_list(&body).map_err(ProviderError::MalformedResponse)?;
        // Only well-formed responses are cached, and only once.
        write_once(&path, &body).map_err(|e| ProviderError::Cache(e.to_string()))?;
        Ok(articles)
    }

    fn fetch_with_retries(&self, url: &str) -> Result<String, ProviderError> {
        let mut attempts = 0;
        let mut backoff = self.config.backoff;
        loop {
            attempts += 1;
            self.remote_requests.set(self.remote_requests.get() + 1);
            match self.transport.get(url) {
                Ok(body) => return Ok(body),
                Err(TransportError::Permanent(message)) => {
                    return Err(ProviderError::RemoteUnavailable { attempts, message });
                }
                Err(TransportError::Transient(message)) => {
                    if attempts > self.config.max_retries {
                        return Err(ProviderError::RemoteUnavailable { attempts, message });
                    }
                    std::thread::sleep(backoff);
                    backoff *= 2;
                }
            }
        }
    }

    fn respect_rate_limit(&self) {
        let mut last = self.last_request.borrow_mut();
        if let Some(previous) = *last {
            let elapsed = previous.elapsed();
            if elapsed < self.config.min_request_interval {
                std::thread::sleep(self.config.min_request_interval - elapsed);
            }
        }
        *last = Some(Instant::now());
    }
}

impl CitationProvider for RemoteProvider {
    fn provider_id(&self) -> &str {
        &self.config.provider_id
    }

    fn get_references(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError> {
        self.fetch("references", id)
    }

    fn get_citations(&self, id: &ArticleId) -> Result<Vec<Article>, ProviderError> {
        self.fetch("citations", id)
    }
}

fn parse_article_list(text: &str) -> Result<Vec<Article>, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// File-safe cache name: the id itself when it is already safe, otherwise a
/// hex encoding.
fn cache_file_stem(id: &str) -> String {
    let safe = !id.is_empty()
        && id.len() <= 100
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'));
    if safe {
        id.to_owned()
    } else {
        let mut hex = String::with_capacity(2 + id.len() * 2);
        hex.push('x');
        for byte in id.bytes() {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Atomic create-once: concurrent writers race on a hard link and exactly
/// one body survives; the file is never observed half-written.
fn write_once(path: &Path, body: &str) -> Result<(), std::io::Error> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, body)?;
    let result = match fs::hard_link(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == ErrorKind::AlreadyExists => Ok(()),
        Err(e) => Err(e),
    };
    let _ = fs::remove_file(&tmp);
    result
}
