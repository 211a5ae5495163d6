//! Start-set construction, snowballing steps and the strategy runners.
//!
//! All strategies share one runner core that is generic over where
//! neighbors come from (the citation graph, or a recorded trace during
//! projection) and where screening decisions come from (a decider with a
//! run-wide cache, or the records of a previous run). Candidate processing
//! order is ascending canonical id everywhere, which makes every run
//! deterministic for fixed inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Article, ArticleId, CitationGraph, CorpusError, PubType};
use crate::metrics::ComparisonReport;
use crate::provenance::{DiscoveryEvent, EventDirection, SearchTrace, TraceConfig, TRACE_SCHEMA_VERSION};
use crate::screening::{
    self, Decider, Decision, ScreeningError, ScreeningRecord, ScreeningRules, Thresholds,
};
use crate::screening::ReviewerPanel;

/// Snowballing direction: backward follows references (out-edges), forward
/// follows citations (in-edges).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Backward,
    Forward,
}

impl Direction {
    pub fn opposite(self) -> Direction {
        match self {
            Direction::Backward => Direction::Forward,
            Direction::Forward => Direction::Backward,
        }
    }
}

/// How query terms are matched against article text.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermMatch {
    /// Term matches if it occurs as a substring of any token.
    #[default]
    Substring,
    /// Term matches only a whole token.
    WholeToken,
}

/// Conjunctive database query over title, abstract and keywords.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Query {
    pub terms: Vec<String>,
    /// Inclusive `[from, to]` publication-year window.
    pub year_range: (i32, i32),
    pub pub_types: BTreeSet<PubType>,
}

impl Query {
    pub fn new(
        terms: Vec<String>,
        year_range: (i32, i32),
        pub_types: BTreeSet<PubType>,
    ) -> Result<Query, EngineError> {
        let query = Query {
            terms: terms.into_iter().map(|t| t.to_lowercase()).collect(),
            year_range,
            pub_types,
        };
        query.validate()?;
        Ok(query)
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.terms.is_empty() {
            return Err(EngineError::EmptyTermList);
        }
        if self.year_range.0 > self.year_range.1 {
            return Err(EngineError::InvalidYearRange {
                from: self.year_range.0,
                to: self.year_range.1,
            });
        }
        Ok(())
    }
}

/// Run-wide search parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Global publication cutoff: snowballed candidates published after this
    /// year are filtered out (the start set is exempt).
    pub cutoff_year: i32,
    /// Publication types admitted during snowballing. Typically wider than
    /// the database search (book chapters and workshop articles enter here).
    pub snowball_pub_types: BTreeSet<PubType>,
    /// Minimum start-set size before the search window stops widening.
    pub start_min: usize,
    /// Preferred start-set size; a smaller one only triggers a warning.
    pub start_preferred: usize,
    pub panel: ReviewerPanel,
    /// Explicit score thresholds; required for panels other than three.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub term_match: TermMatch,
}

impl SearchConfig {
    pub fn new(cutoff_year: i32) -> SearchConfig {
        SearchConfig {
            cutoff_year,
            snowball_pub_types: PubType::all().into_iter().collect(),
            start_min: 5,
            start_preferred: 10,
            panel: ReviewerPanel::default_three(),
            thresholds: None,
            term_match: TermMatch::Substring,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.start_min < 1 {
            return Err(EngineError::InvalidConfig(
                "start_min must be at least 1".into(),
            ));
        }
        if self.start_preferred < self.start_min {
            return Err(EngineError::InvalidConfig(
                "start_preferred must be >= start_min".into(),
            ));
        }
        self.screening_rules().map(|_| ())
    }

    pub fn screening_rules(&self) -> Result<ScreeningRules, EngineError> {
        Ok(ScreeningRules::new(self.panel.clone(), self.thresholds)?)
    }

    fn passes_snowball_filters(&self, article: &Article) -> bool {
        if !self.snowball_pub_types.contains(&article.pub_type) {
            return false;
        }
        match article.year {
            Some(year) => year <= self.cutoff_year,
            None => {
                log::warn!(
                    "article `{}` has no year; excluded by cutoff filter",
                    article.id
                );
                false
            }
        }
    }
}

/// The six pre-planned strategies plus the adaptive one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    /// Both directions applied to every newly included article, iterated to
    /// a fixpoint. The full-fledged strategy; its trace is complete enough
    /// to replay every other strategy.
    #[serde(rename = "S1_BS_FS_FULL")]
    S1BsFsFull,
    /// Backward-only and forward-only closures run as two separate
    /// processes from the same start set; results are united.
    #[serde(rename = "S2_BS_PAR_FS")]
    S2BsParFs,
    /// Backward closure first, then a forward closure seeded with the start
    /// set plus everything backward found.
    #[serde(rename = "S3_BS_THEN_FS")]
    S3BsThenFs,
    /// Mirror of S3, forward first.
    #[serde(rename = "S4_FS_THEN_BS")]
    S4FsThenBs,
    /// Rounds alternate direction starting backward; each round examines
    /// every included article not yet examined in that direction.
    #[serde(rename = "ALT_BS_FIRST")]
    AltBsFirst,
    #[serde(rename = "ALT_FS_FIRST")]
    AltFsFirst,
    /// Alternating scheme whose per-round direction follows
    /// [`adaptive_choose_direction`].
    #[serde(rename = "ADAPTIVE")]
    Adaptive,
}

impl StrategyId {
    pub fn all() -> [StrategyId; 7] {
        [
            StrategyId::S1BsFsFull,
            StrategyId::S2BsParFs,
            StrategyId::S3BsThenFs,
            StrategyId::S4FsThenBs,
            StrategyId::AltBsFirst,
            StrategyId::AltFsFirst,
            StrategyId::Adaptive,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyId::S1BsFsFull => "S1_BS_FS_FULL",
            StrategyId::S2BsParFs => "S2_BS_PAR_FS",
            StrategyId::S3BsThenFs => "S3_BS_THEN_FS",
            StrategyId::S4FsThenBs => "S4_FS_THEN_BS",
            StrategyId::AltBsFirst => "ALT_BS_FIRST",
            StrategyId::AltFsFirst => "ALT_FS_FIRST",
            StrategyId::Adaptive => "ADAPTIVE",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyId {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::all()
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| EngineError::UnknownStrategy(s.to_owned()))
    }
}

/// Assessment-count proxy for search effort.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effort {
    /// Title-stage screenings performed. S2 counts an article once per
    /// process that met it.
    pub candidates_assessed: usize,
    /// Full-text readings performed, double counted across S2 processes the
    /// same way.
    pub full_texts_read: usize,
}

/// One snowballing round: which direction(s) ran and what it newly included.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub directions: Vec<EventDirection>,
    pub included: Vec<ArticleId>,
}

/// Outcome of one strategy run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyResult {
    pub strategy: StrategyId,
    pub included: BTreeSet<ArticleId>,
    pub borderline: BTreeSet<ArticleId>,
    /// Iteration 0 is the screened start set; snowball rounds follow.
    pub iterations: Vec<IterationRecord>,
    pub effort: Effort,
}

/// Screened start set for snowballing, with everything needed to replay the
/// database-search phase into a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartSet {
    /// Articles the start-set screening included; the snowballing seeds.
    pub included: BTreeSet<ArticleId>,
    /// Screening records for every search candidate, included or not.
    pub records: BTreeMap<ArticleId, ScreeningRecord>,
    /// Every search candidate in discovery order (first window ascending,
    /// then each widening's new finds ascending).
    pub candidates: Vec<ArticleId>,
    /// Query that produced the set, when one did.
    pub query: Option<Query>,
    /// Final (possibly widened) search window.
    pub window: Option<(i32, i32)>,
    /// The corpus ran out of years to widen into before reaching start_min.
    pub exhausted: bool,
    /// Fewer articles than start_preferred were included.
    pub below_preferred: bool,
}

impl StartSet {
    /// Start set given directly as ids; the runner screens them and insists
    /// they all come out included.
    pub fn from_ids(ids: impl IntoIterator<Item = ArticleId>) -> StartSet {
        let included: BTreeSet<ArticleId> = ids.into_iter().collect();
        StartSet {
            candidates: included.iter().cloned().collect(),
            included,
            records: BTreeMap::new(),
            query: None,
            window: None,
            exhausted: false,
            below_preferred: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("query term list must not be empty")]
    EmptyTermList,
    #[error("invalid year range [{from}, {to}]")]
    InvalidYearRange { from: i32, to: i32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
    #[error("start-set article `{0}` did not screen as included")]
    StartSetNotIncluded(ArticleId),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Screening(#[from] ScreeningError),
}

/// All articles matching every query term (conjunctively, over title,
/// abstract and keywords), inside the year window, of an allowed type.
/// Ascending id order.
pub fn database_search(
    graph: &CitationGraph,
    query: &Query,
    mode: TermMatch,
) -> Result<Vec<ArticleId>, EngineError> {
    query.validate()?;
    let terms: Vec<String> = query.terms.iter().map(|t| t.to_lowercase()).collect();
    let mut hits = Vec::new();
    for article in graph.articles() {
        if !query.pub_types.contains(&article.pub_type) {
            continue;
        }
        if !matches_terms(article, &terms, mode) {
            continue;
        }
        match article.year {
            Some(year) if (query.year_range.0..=query.year_range.1).contains(&year) => {
                hits.push(article.id.clone());
            }
            Some(_) => {}
            None => {
                log::warn!(
                    "article `{}` matches the query but has no year; excluded from the window",
                    article.id
                );
            }
        }
    }
    Ok(hits)
}

fn matches_terms(article: &Article, terms: &[String], mode: TermMatch) -> bool {
    let mut text = article.title.clone();
    if let Some(abstract_text) = &article.abstract_text {
        text.push(' ');
        text.push_str(abstract_text);
    }
    for keyword in &article.keywords {
        text.push(' ');
        text.push_str(keyword);
    }
    let text = text.to_lowercase();
    let tokens: Vec<&str> = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .collect();
    terms.iter().all(|term| match mode {
        TermMatch::Substring => tokens.iter().any(|tok| tok.contains(term.as_str())),
        TermMatch::WholeToken => tokens.iter().any(|tok| *tok == term.as_str()),
    })
}

/// Runs the database search and screens every candidate; while fewer than
/// `start_min` articles are included, the window's lower bound moves one
/// year further back (down to the oldest year in the corpus), re-screening
/// only newly exposed candidates.
pub fn build_start_set(
    graph: &CitationGraph,
    query: &Query,
    decider: &Decider,
    config: &SearchConfig,
) -> Result<StartSet, EngineError> {
    query.validate()?;
    config.validate()?;
    let rules = config.screening_rules()?;
    let corpus_min = graph.min_year();
    let (mut from, to) = query.year_range;

    let mut candidates = Vec::new();
    let mut candidate_set = BTreeSet::new();
    let mut records = BTreeMap::new();
    let mut included = BTreeSet::new();
    let exhausted = loop {
        let window_query = Query {
            terms: query.terms.clone(),
            year_range: (from, to),
            pub_types: query.pub_types.clone(),
        };
        for id in database_search(graph, &window_query, config.term_match)? {
            if !candidate_set.insert(id.clone()) {
                continue;
            }
            let record = screening::screen(&id, decider, &rules)?;
            if record.decision == Decision::Included {
                included.insert(id.clone());
            }
            records.insert(id.clone(), record);
            candidates.push(id);
        }
        if included.len() >= config.start_min {
            break false;
        }
        match corpus_min {
            Some(min) if from > min => from -= 1,
            _ => break true,
        }
    };

    if exhausted {
        log::warn!(
            "start set exhausted the corpus at {} included article(s) (minimum {})",
            included.len(),
            config.start_min
        );
    }
    let below_preferred = included.len() < config.start_preferred;
    if below_preferred {
        log::warn!(
            "start set has {} included article(s), below the preferred {}",
            included.len(),
            config.start_preferred
        );
    }
    Ok(StartSet {
        included,
        records,
        candidates,
        query: Some(query.clone()),
        window: Some((from, to)),
        exhausted,
        below_preferred,
    })
}

/// One snowballing step: the union of references (backward) or citations
/// (forward) of the frontier, minus `seen`, filtered by cutoff year and
/// allowed publication types. Ascending id order.
pub fn snowball_step(
    graph: &CitationGraph,
    frontier: &BTreeSet<ArticleId>,
    direction: Direction,
    seen: &BTreeSet<ArticleId>,
    config: &SearchConfig,
) -> Result<Vec<ArticleId>, EngineError> {
    let source = GraphSource { graph, config };
    let mut out = BTreeSet::new();
    for id in frontier {
        for discovery in source.neighbors(id, direction)? {
            if !discovery.filtered && !seen.contains(&discovery.target) {
                out.insert(discovery.target);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Direction the adaptive strategy should snowball next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveChoice {
    Backward,
    Forward,
    Done,
}

/// Compares the cutoff-filtered candidate volume on each unexamined side:
/// backward wins ties, and when both sides offer nothing the search is done.
pub fn adaptive_choose_direction(
    graph: &CitationGraph,
    included: &BTreeSet<ArticleId>,
    examined_backward: &BTreeSet<ArticleId>,
    examined_forward: &BTreeSet<ArticleId>,
    config: &SearchConfig,
) -> Result<AdaptiveChoice, EngineError> {
    let source = GraphSource { graph, config };
    adaptive_choice(&source, included, examined_backward, examined_forward)
}

fn adaptive_choice<N: NeighborSource>(
    source: &N,
    included: &BTreeSet<ArticleId>,
    examined_backward: &BTreeSet<ArticleId>,
    examined_forward: &BTreeSet<ArticleId>,
) -> Result<AdaptiveChoice, EngineError> {
    let volume = |examined: &BTreeSet<ArticleId>, direction: Direction| {
        let mut count = 0usize;
        for id in included {
            if examined.contains(id) {
                continue;
            }
            count += source
                .neighbors(id, direction)?
                .iter()
                .filter(|d| !d.filtered)
                .count();
        }
        Ok::<usize, EngineError>(count)
    };
    let backward = volume(examined_backward, Direction::Backward)?;
    let forward = volume(examined_forward, Direction::Forward)?;
    Ok(if backward == 0 && forward == 0 {
        AdaptiveChoice::Done
    } else if forward > backward {
        AdaptiveChoice::Forward
    } else {
        AdaptiveChoice::Backward
    })
}

/// Runs one strategy from a screened start set, producing the full discovery
/// trace and the result summary.
pub fn run_strategy(
    graph: &CitationGraph,
    start: &StartSet,
    strategy: StrategyId,
    decider: &Decider,
    config: &SearchConfig,
) -> Result<(SearchTrace, StrategyResult), EngineError> {
    config.validate()?;
    for id in &start.candidates {
        if !graph.contains(id) {
            return Err(EngineError::Corpus(CorpusError::UnknownArticle(id.clone())));
        }
    }
    let rules = config.screening_rules()?;
    let source = GraphSource { graph, config };
    let screener = DeciderScreener {
        decider,
        rules,
        cache: start.records.clone(),
    };
    let output = run_with(&source, screener, start, strategy)?;
    let trace = SearchTrace {
        schema_version: TRACE_SCHEMA_VERSION,
        strategy,
        config: TraceConfig {
            query: start.query.clone(),
            search: config.clone(),
            start_ids: start.included.iter().cloned().collect(),
            window: start.window,
        },
        events: output.events,
        records: output.records,
    };
    Ok((trace, output.result))
}

/// Runs each strategy independently over the same start set and assembles
/// the comparison report.
pub fn run_all(
    graph: &CitationGraph,
    start: &StartSet,
    decider: &Decider,
    config: &SearchConfig,
    strategies: &[StrategyId],
) -> Result<ComparisonOutcome, EngineError> {
    let mut runs = Vec::new();
    for &strategy in strategies {
        runs.push(run_strategy(graph, start, strategy, decider, config)?);
    }
    let report = ComparisonReport::from_results(runs.iter().map(|(_, r)| r));
    Ok(ComparisonOutcome { runs, report })
}

/// Per-strategy runs plus the assembled report.
#[derive(Debug, Clone)]
pub struct ComparisonOutcome {
    pub runs: Vec<(SearchTrace, StrategyResult)>,
    pub report: ComparisonReport,
}

// ---------------------------------------------------------------------------
// Runner core, shared by direct runs and trace projection.

/// A discovered neighbor; `filtered` marks candidates dropped by the cutoff
/// or publication-type filter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Discovery {
    pub target: ArticleId,
    pub filtered: bool,
}

/// Where neighbor discoveries come from. Implementations must return
/// targets in ascending id order.
pub(crate) trait NeighborSource {
    fn neighbors(&self, id: &ArticleId, direction: Direction)
        -> Result<Vec<Discovery>, EngineError>;
}

pub(crate) struct GraphSource<'a> {
    pub graph: &'a CitationGraph,
    pub config: &'a SearchConfig,
}

impl NeighborSource for GraphSource<'_> {
    fn neighbors(
        &self,
        id: &ArticleId,
        direction: Direction,
    ) -> Result<Vec<Discovery>, EngineError> {
        let targets = match direction {
            Direction::Backward => self.graph.references(id)?,
            Direction::Forward => self.graph.citations(id)?,
        };
        targets
            .iter()
            .map(|target| {
                let article = self.graph.article(target)?;
                Ok(Discovery {
                    target: target.clone(),
                    filtered: !self.config.passes_snowball_filters(article),
                })
            })
            .collect()
    }
}

/// Where screening decisions come from. Implementations cache so that an
/// article is decided at most once per run.
pub(crate) trait Screener {
    fn screen(&mut self, id: &ArticleId) -> Result<ScreeningRecord, EngineError>;
    fn into_records(self) -> BTreeMap<ArticleId, ScreeningRecord>;
}

pub(crate) struct DeciderScreener<'a> {
    pub decider: &'a Decider,
    pub rules: ScreeningRules,
    pub cache: BTreeMap<ArticleId, ScreeningRecord>,
}

impl Screener for DeciderScreener<'_> {
    fn screen(&mut self, id: &ArticleId) -> Result<ScreeningRecord, EngineError> {
        if let Some(record) = self.cache.get(id) {
            return Ok(record.clone());
        }
        let record = screening::screen(id, self.decider, &self.rules)?;
        self.cache.insert(id.clone(), record.clone());
        Ok(record)
    }

    fn into_records(self) -> BTreeMap<ArticleId, ScreeningRecord> {
        self.cache
    }
}

/// Replays decisions recorded by an earlier run.
pub(crate) struct RecordScreener<'a> {
    pub records: &'a BTreeMap<ArticleId, ScreeningRecord>,
}

impl Screener for RecordScreener<'_> {
    fn screen(&mut self, id: &ArticleId) -> Result<ScreeningRecord, EngineError> {
        self.records
            .get(id)
            .cloned()
            .ok_or_else(|| EngineError::Screening(ScreeningError::MissingDecision(id.clone())))
    }

    fn into_records(self) -> BTreeMap<ArticleId, ScreeningRecord> {
        self.records.clone()
    }
}

pub(crate) struct RunOutput {
    pub events: Vec<DiscoveryEvent>,
    pub records: BTreeMap<ArticleId, ScreeningRecord>,
    pub result: StrategyResult,
}

/// Per-process bookkeeping: which articles this process has already met.
/// S2 runs two of these; every other strategy runs one.
struct ProcessState {
    seen: BTreeSet<ArticleId>,
}

struct Runner<'a, N: NeighborSource, S: Screener> {
    source: &'a N,
    screener: S,
    events: Vec<DiscoveryEvent>,
    iteration: u32,
    effort: Effort,
    included: BTreeSet<ArticleId>,
    borderline: BTreeSet<ArticleId>,
    iterations: Vec<IterationRecord>,
}

pub(crate) fn run_with<N: NeighborSource, S: Screener>(
    source: &N,
    screener: S,
    start: &StartSet,
    strategy: StrategyId,
) -> Result<RunOutput, EngineError> {
    let mut runner = Runner {
        source,
        screener,
        events: Vec::new(),
        iteration: 0,
        effort: Effort::default(),
        included: BTreeSet::new(),
        borderline: BTreeSet::new(),
        iterations: Vec::new(),
    };
    let search_seen = runner.search_phase(start)?;

    match strategy {
        StrategyId::S1BsFsFull => {
            let mut process = ProcessState {
                seen: search_seen,
            };
            let mut frontier: Vec<ArticleId> = start.included.iter().cloned().collect();
            while !frontier.is_empty() {
                runner.iteration += 1;
                let backward =
                    runner.gather(&frontier, Direction::Backward, &mut process)?;
                let (newly_b, additions_b) = runner.screen_candidates(&backward)?;
                let forward = runner.gather(&frontier, Direction::Forward, &mut process)?;
                let (newly_f, additions_f) = runner.screen_candidates(&forward)?;
                let newly = merge_sorted(newly_b, newly_f);
                runner.iterations.push(IterationRecord {
                    directions: vec![EventDirection::Backward, EventDirection::Forward],
                    included: newly,
                });
                frontier = merge_sorted(additions_b, additions_f);
            }
        }
        StrategyId::S2BsParFs => {
            runner.closure_process(start, Direction::Backward, search_seen.clone())?;
            runner.closure_process(start, Direction::Forward, search_seen)?;
        }
        StrategyId::S3BsThenFs => {
            runner.sequential(start, Direction::Backward, search_seen)?;
        }
        StrategyId::S4FsThenBs => {
            runner.sequential(start, Direction::Forward, search_seen)?;
        }
        StrategyId::AltBsFirst => {
            runner.alternating(search_seen, AlternationPolicy::Fixed(Direction::Backward))?;
        }
        StrategyId::AltFsFirst => {
            runner.alternating(search_seen, AlternationPolicy::Fixed(Direction::Forward))?;
        }
        StrategyId::Adaptive => {
            runner.alternating(search_seen, AlternationPolicy::Adaptive)?;
        }
    }

    let result = StrategyResult {
        strategy,
        included: runner.included,
        borderline: runner.borderline,
        iterations: runner.iterations,
        effort: runner.effort,
    };
    Ok(RunOutput {
        events: runner.events,
        records: runner.screener.into_records(),
        result,
    })
}

enum AlternationPolicy {
    Fixed(Direction),
    Adaptive,
}

impl<'a, N: NeighborSource, S: Screener> Runner<'a, N, S> {
    /// Replays the database-search phase: one iteration-0 event per
    /// candidate plus its screening, then checks that every start id really
    /// screened as included.
    fn search_phase(&mut self, start: &StartSet) -> Result<BTreeSet<ArticleId>, EngineError> {
        let mut start_included = Vec::new();
        for id in &start.candidates {
            self.push_event(id.clone(), None, EventDirection::Search, false);
            let record = self.screen_one(id)?;
            match record.decision {
                Decision::Included => {
                    if self.included.insert(id.clone()) {
                        start_included.push(id.clone());
                    }
                }
                Decision::Borderline => {
                    self.borderline.insert(id.clone());
                }
                _ => {}
            }
        }
        for id in &start.included {
            if !self.included.contains(id) {
                return Err(EngineError::StartSetNotIncluded(id.clone()));
            }
        }
        start_included.sort();
        self.iterations.push(IterationRecord {
            directions: vec![EventDirection::Search],
            included: start_included,
        });
        Ok(start.candidates.iter().cloned().collect())
    }

    /// Logs every raw discovery from `frontier` in `direction` and returns
    /// the unfiltered, process-new candidates in ascending order.
    fn gather(
        &mut self,
        frontier: &[ArticleId],
        direction: Direction,
        process: &mut ProcessState,
    ) -> Result<Vec<ArticleId>, EngineError> {
        let mut candidates = BTreeSet::new();
        for id in frontier {
            for discovery in self.source.neighbors(id, direction)? {
                self.push_event(
                    discovery.target.clone(),
                    Some(id.clone()),
                    direction.into(),
                    discovery.filtered,
                );
                if !discovery.filtered && !process.seen.contains(&discovery.target) {
                    candidates.insert(discovery.target);
                }
            }
        }
        for candidate in &candidates {
            process.seen.insert(candidate.clone());
        }
        Ok(candidates.into_iter().collect())
    }

    /// Screens candidates in order. Returns `(newly_included, frontier)`:
    /// the two differ only when another process already included an article,
    /// which still has to be traversed by this one.
    fn screen_candidates(
        &mut self,
        candidates: &[ArticleId],
    ) -> Result<(Vec<ArticleId>, Vec<ArticleId>), EngineError> {
        let mut newly = Vec::new();
        let mut frontier = Vec::new();
        for id in candidates {
            let record = self.screen_one(id)?;
            match record.decision {
                Decision::Included => {
                    frontier.push(id.clone());
                    if self.included.insert(id.clone()) {
                        newly.push(id.clone());
                    }
                }
                Decision::Borderline => {
                    self.borderline.insert(id.clone());
                }
                _ => {}
            }
        }
        Ok((newly, frontier))
    }

    fn screen_one(&mut self, id: &ArticleId) -> Result<ScreeningRecord, EngineError> {
        self.effort.candidates_assessed += 1;
        let record = self.screener.screen(id)?;
        if record.full_text_scores.is_some() {
            self.effort.full_texts_read += 1;
        }
        Ok(record)
    }

    fn push_event(
        &mut self,
        target: ArticleId,
        source: Option<ArticleId>,
        direction: EventDirection,
        filtered: bool,
    ) {
        let ordinal = self.events.len() as u64;
        self.events.push(DiscoveryEvent {
            ordinal,
            target,
            source,
            direction,
            iteration: self.iteration,
            filtered,
        });
    }

    /// Single-direction closure from the start set, used by both S2
    /// processes.
    fn closure_process(
        &mut self,
        start: &StartSet,
        direction: Direction,
        seen: BTreeSet<ArticleId>,
    ) -> Result<(), EngineError> {
        let mut process = ProcessState { seen };
        let frontier: Vec<ArticleId> = start.included.iter().cloned().collect();
        self.run_direction_to_fixpoint(frontier, direction, &mut process)
    }

    /// S3/S4: one direction to fixpoint, then the other direction to
    /// fixpoint seeded with everything included so far. Articles found in
    /// the second phase only ever receive second-phase steps.
    fn sequential(
        &mut self,
        start: &StartSet,
        first: Direction,
        seen: BTreeSet<ArticleId>,
    ) -> Result<(), EngineError> {
        let mut process = ProcessState { seen };
        let frontier: Vec<ArticleId> = start.included.iter().cloned().collect();
        self.run_direction_to_fixpoint(frontier, first, &mut process)?;
        let seed: Vec<ArticleId> = self.included.iter().cloned().collect();
        self.run_direction_to_fixpoint(seed, first.opposite(), &mut process)
    }

    fn run_direction_to_fixpoint(
        &mut self,
        mut frontier: Vec<ArticleId>,
        direction: Direction,
        process: &mut ProcessState,
    ) -> Result<(), EngineError> {
        while !frontier.is_empty() {
            self.iteration += 1;
            let candidates = self.gather(&frontier, direction, process)?;
            let (newly, additions) = self.screen_candidates(&candidates)?;
            self.iterations.push(IterationRecord {
                directions: vec![direction.into()],
                included: newly,
            });
            frontier = additions;
        }
        Ok(())
    }

    /// Alternating rounds: each round applies its direction to every
    /// included article not yet examined that way. Terminates once two
    /// consecutive rounds include nothing new and nothing remains
    /// unexamined in either direction.
    fn alternating(
        &mut self,
        seen: BTreeSet<ArticleId>,
        policy: AlternationPolicy,
    ) -> Result<(), EngineError> {
        let mut process = ProcessState { seen };
        let mut examined_backward: BTreeSet<ArticleId> = BTreeSet::new();
        let mut examined_forward: BTreeSet<ArticleId> = BTreeSet::new();
        let mut next_fixed = match policy {
            AlternationPolicy::Fixed(direction) => Some(direction),
            AlternationPolicy::Adaptive => None,
        };
        let mut empty_streak = 0;
        loop {
            let direction = match &policy {
                AlternationPolicy::Fixed(_) => {
                    let d = next_fixed.expect("fixed policy always has a direction");
                    next_fixed = Some(d.opposite());
                    d
                }
                AlternationPolicy::Adaptive => match adaptive_choice(
                    self.source,
                    &self.included,
                    &examined_backward,
                    &examined_forward,
                )? {
                    AdaptiveChoice::Backward => Direction::Backward,
                    AdaptiveChoice::Forward => Direction::Forward,
                    AdaptiveChoice::Done => return Ok(()),
                },
            };
            let examined = match direction {
                Direction::Backward => &examined_backward,
                Direction::Forward => &examined_forward,
            };
            let round: Vec<ArticleId> = self
                .included
                .iter()
                .filter(|id| !examined.contains(*id))
                .cloned()
                .collect();
            self.iteration += 1;
            let candidates = self.gather(&round, direction, &mut process)?;
            match direction {
                Direction::Backward => examined_backward.extend(round),
                Direction::Forward => examined_forward.extend(round),
            }
            let (newly, _) = self.screen_candidates(&candidates)?;
            empty_streak = if newly.is_empty() { empty_streak + 1 } else { 0 };
            self.iterations.push(IterationRecord {
                directions: vec![direction.into()],
                included: newly,
            });
            if matches!(policy, AlternationPolicy::Fixed(_)) {
                let unexamined = self
                    .included
                    .iter()
                    .any(|id| !examined_backward.contains(id) || !examined_forward.contains(id));
                if empty_streak >= 2 && !unexamined {
                    return Ok(());
                }
            }
        }
    }
}

impl From<Direction> for EventDirection {
    fn from(direction: Direction) -> EventDirection {
        match direction {
            Direction::Backward => EventDirection::Backward,
            Direction::Forward => EventDirection::Forward,
        }
    }
}

fn merge_sorted(a: Vec<ArticleId>, b: Vec<ArticleId>) -> Vec<ArticleId> {
    let mut merged: BTreeSet<ArticleId> = a.into_iter().collect();
    merged.extend(b);
    merged.into_iter().collect()
}
