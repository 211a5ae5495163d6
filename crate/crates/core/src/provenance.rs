//! Append-only discovery traces and strategy projection.
//!
//! A trace logs every instance an article is found, including rediscoveries
//! of already-seen articles and candidates dropped by the cutoff or type
//! filter (those carry a `filtered` flag). A full bidirectional run examines
//! every included article in both directions, so its trace alone is enough
//! to replay any other strategy without touching the citation graph again;
//! that is what [`project`] does.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ArticleId;
use crate::engine::{
    self, Direction, EngineError, Query, SearchConfig, StartSet, StrategyId, StrategyResult,
};
use crate::screening::ScreeningRecord;

pub const TRACE_SCHEMA_VERSION: u32 = 1;

/// Direction attached to a discovery event. `Search` marks database-search
/// hits (iteration 0); snowballing produces `Backward`/`Forward`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventDirection {
    Search,
    Backward,
    Forward,
}

/// One instance of an article being found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryEvent {
    /// Strictly increasing within a trace.
    pub ordinal: u64,
    pub target: ArticleId,
    /// The article whose reference list or citation list produced the
    /// discovery; `None` means the database search did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ArticleId>,
    pub direction: EventDirection,
    /// 0 for the search phase, then the snowball round counter.
    pub iteration: u32,
    /// The candidate was found but dropped by the cutoff or type filter.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub filtered: bool,
}

/// Snapshot of everything a run was configured with, enough to replay it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query: Option<Query>,
    pub search: SearchConfig,
    /// The included start set, ascending.
    pub start_ids: Vec<ArticleId>,
    /// Final (possibly widened) search window, when a query produced the
    /// start set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(i32, i32)>,
}

/// Ordered discovery events plus the screening records behind them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub schema_version: u32,
    pub strategy: StrategyId,
    pub config: TraceConfig,
    pub events: Vec<DiscoveryEvent>,
    pub records: BTreeMap<ArticleId, ScreeningRecord>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProvenanceError {
    #[error("article `{0}` does not appear in the trace")]
    NotInTrace(ArticleId),
    #[error("projection needs a full bidirectional trace; got a {0} trace")]
    TraceNotFull(StrategyId),
    #[error("trace invariant violated: {0}")]
    InvariantViolation(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl SearchTrace {
    /// Checks the structural invariants every well-formed trace satisfies.
    pub fn validate(&self) -> Result<(), ProvenanceError> {
        let fail = |msg: String| Err(ProvenanceError::InvariantViolation(msg));
        let mut last_ordinal: Option<u64> = None;
        for event in &self.events {
            if let Some(last) = last_ordinal {
                if event.ordinal <= last {
                    return fail(format!(
                        "ordinal {} does not increase after {}",
                        event.ordinal, last
                    ));
                }
            }
            last_ordinal = Some(event.ordinal);
            let is_search = event.direction == EventDirection::Search;
            if is_search != event.source.is_none() {
                return fail(format!(
                    "event {}: search direction and database-search source must coincide",
                    event.ordinal
                ));
            }
            if is_search != (event.iteration == 0) {
                return fail(format!(
                    "event {}: iteration 0 is reserved for the search phase",
                    event.ordinal
                ));
            }
            if !event.filtered && !self.records.contains_key(&event.target) {
                return fail(format!(
                    "event {}: unfiltered target `{}` has no screening record",
                    event.ordinal, event.target
                ));
            }
        }
        for (id, record) in &self.records {
            if record.article != *id {
                return fail(format!(
                    "record keyed `{id}` describes article `{}`",
                    record.article
                ));
            }
            if !self.events.iter().any(|e| e.target == *id) {
                return fail(format!("screened article `{id}` has no discovery event"));
            }
        }
        Ok(())
    }

    /// The minimal-ordinal event targeting `id`.
    pub fn first_discovery(&self, id: &ArticleId) -> Result<&DiscoveryEvent, ProvenanceError> {
        self.events
            .iter()
            .find(|e| e.target == *id)
            .ok_or_else(|| ProvenanceError::NotInTrace(id.clone()))
    }
}

/// Recomputes `strategy`'s result from a full bidirectional trace, using
/// only the logged (source, direction, target) triples and the screening
/// records. No graph access.
pub fn project(trace: &SearchTrace, strategy: StrategyId) -> Result<StrategyResult, ProvenanceError> {
    if trace.strategy != StrategyId::S1BsFsFull {
        return Err(ProvenanceError::TraceNotFull(trace.strategy));
    }
    let source = TraceSource::from_events(&trace.events);
    let screener = engine::RecordScreener {
        records: &trace.records,
    };
    let start = StartSet {
        included: trace.config.start_ids.iter().cloned().collect(),
        records: BTreeMap::new(),
        candidates: trace
            .events
            .iter()
            .filter(|e| e.direction == EventDirection::Search)
            .map(|e| e.target.clone())
            .collect(),
        query: trace.config.query.clone(),
        window: trace.config.window,
        exhausted: false,
        below_preferred: false,
    };
    let output = engine::run_with(&source, screener, &start, strategy)?;
    Ok(output.result)
}

/// Neighbor lookups reconstructed from trace events.
struct TraceSource {
    backward: BTreeMap<ArticleId, BTreeMap<ArticleId, bool>>,
    forward: BTreeMap<ArticleId, BTreeMap<ArticleId, bool>>,
}

impl TraceSource {
    fn from_events(events: &[DiscoveryEvent]) -> TraceSource {
        let mut backward: BTreeMap<ArticleId, BTreeMap<ArticleId, bool>> = BTreeMap::new();
        let mut forward: BTreeMap<ArticleId, BTreeMap<ArticleId, bool>> = BTreeMap::new();
        for event in events {
            let Some(source) = &event.source else {
                continue;
            };
            let map = match event.direction {
                EventDirection::Backward => &mut backward,
                EventDirection::Forward => &mut forward,
                EventDirection::Search => continue,
            };
            map.entry(source.clone())
                .or_default()
                .entry(event.target.clone())
                .or_insert(event.filtered);
        }
        TraceSource { backward, forward }
    }
}

impl engine::NeighborSource for TraceSource {
    fn neighbors(
        &self,
        id: &ArticleId,
        direction: Direction,
    ) -> Result<Vec<engine::Discovery>, EngineError> {
        let map = match direction {
            Direction::Backward => &self.backward,
            Direction::Forward => &self.forward,
        };
        Ok(map
            .get(id)
            .map(|targets| {
                targets
                    .iter()
                    .map(|(target, filtered)| engine::Discovery {
                        target: target.clone(),
                        filtered: *filtered,
                    })
                    .collect()
            })
            .unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_strategy, SearchConfig, StartSet};
    use crate::screening::{Decider, Verdict};
    use crate::testutil::g1;

    fn id(s: &str) -> ArticleId {
        ArticleId::from(s)
    }

    fn g1_s1_trace() -> SearchTrace {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([id("s")]);
        run_strategy(&g, &start, StrategyId::S1BsFsFull, &decider, &config)
            .unwrap()
            .0
    }

    #[test]
    fn first_discovery_of_snowballed_article() {
        let trace = g1_s1_trace();
        let event = trace.first_discovery(&id("p1")).unwrap();
        assert_eq!(event.source, Some(id("s")));
        assert_eq!(event.direction, EventDirection::Backward);
        assert_eq!(event.iteration, 1);
    }

    #[test]
    fn first_discovery_of_start_member() {
        let trace = g1_s1_trace();
        let event = trace.first_discovery(&id("s")).unwrap();
        assert_eq!(event.source, None);
        assert_eq!(event.direction, EventDirection::Search);
        assert_eq!(event.iteration, 0);
    }

    #[test]
    fn first_discovery_unknown_id() {
        let trace = g1_s1_trace();
        assert_eq!(
            trace.first_discovery(&id("zz")).unwrap_err(),
            ProvenanceError::NotInTrace(id("zz"))
        );
    }

    #[test]
    fn trace_satisfies_invariants() {
        g1_s1_trace().validate().unwrap();
    }

    #[test]
    fn projection_matches_direct_runs_on_g1() {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([id("s")]);
        let trace = g1_s1_trace();
        for strategy in StrategyId::all() {
            let projected = project(&trace, strategy).unwrap();
            let (_, direct) = run_strategy(&g, &start, strategy, &decider, &config).unwrap();
            assert_eq!(projected.included, direct.included, "{strategy}");
            assert_eq!(projected.effort, direct.effort, "{strategy}");
        }
        assert_eq!(project(&trace, StrategyId::S2BsParFs).unwrap().included.len(), 5);
        assert_eq!(project(&trace, StrategyId::S3BsThenFs).unwrap().included.len(), 6);
        assert_eq!(project(&trace, StrategyId::S4FsThenBs).unwrap().included.len(), 6);
    }

    #[test]
    fn projection_of_s1_is_identity() {
        let trace = g1_s1_trace();
        let projected = project(&trace, StrategyId::S1BsFsFull).unwrap();
        let original: std::collections::BTreeSet<_> = trace.records.keys().cloned().collect();
        assert_eq!(projected.included, original);
    }

    #[test]
    fn projection_requires_full_trace() {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([id("s")]);
        let (trace, _) =
            run_strategy(&g, &start, StrategyId::S2BsParFs, &decider, &config).unwrap();
        assert_eq!(
            project(&trace, StrategyId::S1BsFsFull).unwrap_err(),
            ProvenanceError::TraceNotFull(StrategyId::S2BsParFs)
        );
    }

    #[test]
    fn event_completeness_for_included_articles() {
        // Every edge incident to an included article must appear as an
        // event, filtered or not.
        let g = g1();
        let trace = g1_s1_trace();
        for id in trace.records.keys() {
            for reference in g.references(id).unwrap() {
                assert!(trace.events.iter().any(|e| {
                    e.source.as_ref() == Some(id)
                        && e.direction == EventDirection::Backward
                        && e.target == *reference
                }));
            }
            for citer in g.citations(id).unwrap() {
                assert!(trace.events.iter().any(|e| {
                    e.source.as_ref() == Some(id)
                        && e.direction == EventDirection::Forward
                        && e.target == *citer
                }));
            }
        }
    }
}
