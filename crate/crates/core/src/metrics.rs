//! Strategy comparison: overlap, percentage deltas, recall/precision and
//! effort recomputation from traces.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ArticleId;
use crate::engine::{Effort, StrategyId, StrategyResult};
use crate::provenance::{EventDirection, SearchTrace};

/// Recall at or above this is conventionally considered acceptable.
pub const QUASI_SENSITIVITY_THRESHOLD: f64 = 0.8;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("percentage delta is undefined for a zero baseline")]
    ZeroBaseline,
    #[error("recall is undefined against an empty gold set")]
    EmptyGold,
}

/// Integer percentage change from `a` to `b`, rounded to nearest.
pub fn pct_delta(a: usize, b: usize) -> Result<i64, MetricsError> {
    if a == 0 {
        return Err(MetricsError::ZeroBaseline);
    }
    let delta = (b as i64 - a as i64) as f64 * 100.0 / a as f64;
    Ok(delta.round() as i64)
}

/// Cardinalities of the intersection and the two set differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub both: usize,
    pub only_a: usize,
    pub only_b: usize,
}

pub fn overlap(a: &BTreeSet<ArticleId>, b: &BTreeSet<ArticleId>) -> Overlap {
    let both = a.intersection(b).count();
    Overlap {
        both,
        only_a: a.len() - both,
        only_b: b.len() - both,
    }
}

/// Fraction of the gold set the result retrieved.
pub fn recall(result: &BTreeSet<ArticleId>, gold: &BTreeSet<ArticleId>) -> Result<f64, MetricsError> {
    if gold.is_empty() {
        return Err(MetricsError::EmptyGold);
    }
    Ok(result.intersection(gold).count() as f64 / gold.len() as f64)
}

/// Fraction of assessed articles that were gold hits. Zero when nothing was
/// assessed.
pub fn precision(result: &BTreeSet<ArticleId>, gold: &BTreeSet<ArticleId>, assessed: usize) -> f64 {
    if assessed == 0 {
        return 0.0;
    }
    result.intersection(gold).count() as f64 / assessed as f64
}

pub fn meets_quasi_sensitivity(recall: f64) -> bool {
    recall >= QUASI_SENSITIVITY_THRESHOLD
}

/// Recomputes effort counters from a trace.
///
/// For single-process strategies this is the number of distinct screened
/// articles (and of those, the ones read in full text). The parallel
/// strategy counts an article once per process that assessed it: once for
/// the search phase, once per snowball direction that reached it.
pub fn effort(trace: &SearchTrace) -> Effort {
    let searched: BTreeSet<&ArticleId> = trace
        .events
        .iter()
        .filter(|e| e.direction == EventDirection::Search)
        .map(|e| &e.target)
        .collect();
    let full_texts_of = |ids: &BTreeSet<&ArticleId>| {
        ids.iter()
            .filter(|id| {
                trace
                    .records
                    .get(**id)
                    .is_some_and(|r| r.full_text_scores.is_some())
            })
            .count()
    };
    match trace.strategy {
        StrategyId::S2BsParFs => {
            let process = |direction: EventDirection| -> BTreeSet<&ArticleId> {
                trace
                    .events
                    .iter()
                    .filter(|e| e.direction == direction && !e.filtered)
                    .map(|e| &e.target)
                    .filter(|t| !searched.contains(*t))
                    .collect()
            };
            let backward = process(EventDirection::Backward);
            let forward = process(EventDirection::Forward);
            Effort {
                candidates_assessed: searched.len() + backward.len() + forward.len(),
                full_texts_read: full_texts_of(&searched)
                    + full_texts_of(&backward)
                    + full_texts_of(&forward),
            }
        }
        _ => Effort {
            candidates_assessed: trace.records.len(),
            full_texts_read: trace
                .records
                .values()
                .filter(|r| r.full_text_scores.is_some())
                .count(),
        },
    }
}

/// One line of the per-strategy table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyRow {
    pub strategy: StrategyId,
    pub included: usize,
    pub borderline: usize,
    pub assessed: usize,
    pub full_texts: usize,
}

/// One pairwise comparison between two strategies' included sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OverlapRow {
    pub a: StrategyId,
    pub b: StrategyId,
    pub both: usize,
    pub only_a: usize,
    pub only_b: usize,
    /// Percentage change from |a| to |b|; absent when |a| = 0.
    pub delta_pct: Option<i64>,
}

/// Comparison table over any number of strategy results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<StrategyRow>,
    pub overlaps: Vec<OverlapRow>,
}

impl ComparisonReport {
    /// Builds the report, ordering strategies canonically (the four numbered
    /// strategies first, then the alternating and adaptive ones).
    pub fn from_results<'a>(results: impl IntoIterator<Item = &'a StrategyResult>) -> Self {
        let mut results: Vec<&StrategyResult> = results.into_iter().collect();
        results.sort_by_key(|r| r.strategy);
        let rows = results
            .iter()
            .map(|r| StrategyRow {
                strategy: r.strategy,
                included: r.included.len(),
                borderline: r.borderline.len(),
                assessed: r.effort.candidates_assessed,
                full_texts: r.effort.full_texts_read,
            })
            .collect();
        let mut overlaps = Vec::new();
        for (i, a) in results.iter().enumerate() {
            for b in results.iter().skip(i + 1) {
                let o = overlap(&a.included, &b.included);
                overlaps.push(OverlapRow {
                    a: a.strategy,
                    b: b.strategy,
                    both: o.both,
                    only_a: o.only_a,
                    only_b: o.only_b,
                    delta_pct: pct_delta(a.included.len(), b.included.len()).ok(),
                });
            }
        }
        ComparisonReport { rows, overlaps }
    }

    /// Aligned human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(
            out,
            "{:<14} {:>8} {:>10} {:>8} {:>9}",
            "strategy", "included", "borderline", "assessed", "fulltext"
        )
        .unwrap();
        for row in &self.rows {
            writeln!(
                out,
                "{:<14} {:>8} {:>10} {:>8} {:>9}",
                row.strategy, row.included, row.borderline, row.assessed, row.full_texts
            )
            .unwrap();
        }
        if !self.overlaps.is_empty() {
            writeln!(out).unwrap();
            writeln!(
                out,
                "{:<14} {:<14} {:>5} {:>7} {:>7} {:>9}",
                "a", "b", "both", "only_a", "only_b", "delta_pct"
            )
            .unwrap();
            for o in &self.overlaps {
                let delta = o
                    .delta_pct
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "-".into());
                writeln!(
                    out,
                    "{:<14} {:<14} {:>5} {:>7} {:>7} {:>9}",
                    o.a, o.b, o.both, o.only_a, o.only_b, delta
                )
                .unwrap();
            }
        }
        out
    }

    /// CSV with header `strategy,included,borderline,assessed,fulltext`.
    pub fn strategies_csv(&self) -> String {
        let mut out = String::from("strategy,included,borderline,assessed,fulltext\n");
        for row in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                row.strategy, row.included, row.borderline, row.assessed, row.full_texts
            )
            .unwrap();
        }
        out
    }

    /// CSV with header `a,b,both,only_a,only_b,delta_pct`.
    pub fn overlaps_csv(&self) -> String {
        let mut out = String::from("a,b,both,only_a,only_b,delta_pct\n");
        for o in &self.overlaps {
            let delta = o.delta_pct.map(|d| d.to_string()).unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{},{},{}",
                o.a, o.b, o.both, o.only_a, o.only_b, delta
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::engine::{run_strategy, SearchConfig, StartSet};
    use crate::screening::{Decider, Verdict};
    use crate::testutil::{g1, ids};

    #[test]
    fn pct_delta_reproduces_reference_values() {
        assert_eq!(pct_delta(33, 43).unwrap(), 30);
        assert_eq!(pct_delta(29, 43).unwrap(), 48);
        assert_eq!(pct_delta(24, 43).unwrap(), 79);
        assert_eq!(pct_delta(22, 43).unwrap(), 95);
        assert_eq!(pct_delta(19, 36).unwrap(), 89);
        assert_eq!(pct_delta(43, 43).unwrap(), 0);
    }

    #[test]
    fn pct_delta_zero_baseline() {
        assert_eq!(pct_delta(0, 5).unwrap_err(), MetricsError::ZeroBaseline);
    }

    #[test]
    fn pct_delta_negative_direction() {
        assert_eq!(pct_delta(43, 33).unwrap(), -23);
    }

    #[test]
    fn overlap_counts() {
        // 33 and 43 element sets sharing 20 members.
        let a: BTreeSet<ArticleId> = (0..33).map(|i| ArticleId::from(format!("a{i:03}"))).collect();
        let b: BTreeSet<ArticleId> = (13..56).map(|i| ArticleId::from(format!("a{i:03}"))).collect();
        assert_eq!(
            overlap(&a, &b),
            Overlap {
                both: 20,
                only_a: 13,
                only_b: 23
            }
        );
    }

    #[test]
    fn overlap_disjoint_and_equal() {
        let a = ids(&["x", "y"]);
        let b = ids(&["z"]);
        assert_eq!(
            overlap(&a, &b),
            Overlap {
                both: 0,
                only_a: 2,
                only_b: 1
            }
        );
        assert_eq!(
            overlap(&a, &a),
            Overlap {
                both: 2,
                only_a: 0,
                only_b: 0
            }
        );
    }

    #[test]
    fn recall_and_precision() {
        let gold = ids(&["a", "b", "c", "d"]);
        assert_eq!(recall(&gold, &gold).unwrap(), 1.0);
        assert_eq!(recall(&BTreeSet::new(), &gold).unwrap(), 0.0);
        assert_eq!(
            recall(&ids(&["a"]), &BTreeSet::new()).unwrap_err(),
            MetricsError::EmptyGold
        );
        assert_eq!(precision(&ids(&["a", "x"]), &gold, 4), 0.25);
        assert_eq!(precision(&BTreeSet::new(), &gold, 0), 0.0);
    }

    #[test]
    fn g1_s2_recall_below_quasi_threshold() {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([ArticleId::from("s")]);
        let (_, s1) = run_strategy(&g, &start, StrategyId::S1BsFsFull, &decider, &config).unwrap();
        let (_, s2) = run_strategy(&g, &start, StrategyId::S2BsParFs, &decider, &config).unwrap();
        let r = recall(&s2.included, &s1.included).unwrap();
        assert!((r - 5.0 / 7.0).abs() < 1e-9);
        assert!(!meets_quasi_sensitivity(r));
    }

    #[test]
    fn effort_from_trace_matches_run_counters() {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([ArticleId::from("s")]);
        for strategy in StrategyId::all() {
            let (trace, result) = run_strategy(&g, &start, strategy, &decider, &config).unwrap();
            assert_eq!(effort(&trace), result.effort, "{strategy}");
        }
    }

    #[test]
    fn g1_s1_effort_values() {
        let g = g1();
        let decider = Decider::verdicts_from(g.ids().map(|i| (i.clone(), Verdict::Include)));
        let mut config = SearchConfig::new(2014);
        config.start_min = 1;
        config.start_preferred = 1;
        let start = StartSet::from_ids([ArticleId::from("s")]);
        let (trace, _) = run_strategy(&g, &start, StrategyId::S1BsFsFull, &decider, &config).unwrap();
        assert_eq!(
            effort(&trace),
            Effort {
                candidates_assessed: 7,
                full_texts_read: 7
            }
        );
    }

    #[test]
    fn empty_trace_effort() {
        let trace = SearchTrace {
            schema_version: crate::provenance::TRACE_SCHEMA_VERSION,
            strategy: StrategyId::S1BsFsFull,
            config: crate::provenance::TraceConfig {
                query: None,
                search: SearchConfig::new(2014),
                start_ids: vec![],
                window: None,
            },
            events: vec![],
            records: BTreeMap::new(),
        };
        assert_eq!(effort(&trace), Effort::default());
    }

    #[test]
    fn report_orders_strategies_canonically() {
        let make = |strategy: StrategyId, n: usize| StrategyResult {
            strategy,
            included: (0..n).map(|i| ArticleId::from(format!("a{i}"))).collect(),
            borderline: BTreeSet::new(),
            iterations: vec![],
            effort: Effort::default(),
        };
        let results = vec![
            make(StrategyId::Adaptive, 7),
            make(StrategyId::S1BsFsFull, 7),
            make(StrategyId::S2BsParFs, 5),
        ];
        let report = ComparisonReport::from_results(&results);
        let order: Vec<StrategyId> = report.rows.iter().map(|r| r.strategy).collect();
        assert_eq!(
            order,
            vec![StrategyId::S1BsFsFull, StrategyId::S2BsParFs, StrategyId::Adaptive]
        );
        let csv = report.strategies_csv();
        assert!(csv.starts_with("strategy,included,borderline,assessed,fulltext\n"));
        assert!(csv.contains("S1_BS_FS_FULL,7,0,0,0"));
        let overlaps = report.overlaps_csv();
        assert!(overlaps.starts_with("a,b,both,only_a,only_b,delta_pct\n"));
        // S2 (5) to S1 is not a row (ordering), S1 (7) to S2 (5) is -29%.
        assert!(overlaps.contains("S1_BS_FS_FULL,S2_BS_PAR_FS,5,2,0,-29"));
    }
}
