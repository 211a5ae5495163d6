//! Core engine for hybrid literature-search strategies over citation graphs.
//!
//! The crate models a directed citation graph, a multi-reviewer screening
//! protocol with wild cards and borderline tracking, six snowballing
//! strategy runners, an append-only discovery trace from which alternative
//! strategies can be re-derived without re-running the search, comparison
//! metrics, a seeded synthetic-corpus generator, and file/provider I/O.

pub mod corpus;
pub mod engine;
pub mod ingest;
pub mod metrics;
pub mod provenance;
pub mod screening;
pub mod synthgen;

#[cfg(test)]
pub(crate) mod testutil;

pub use corpus::{Article, ArticleId, CitationGraph, PubType};
pub use engine::{Direction, Query, SearchConfig, StartSet, StrategyId, StrategyResult};
pub use provenance::SearchTrace;
pub use screening::{Decider, Decision, ScreeningRecord, Verdict};
