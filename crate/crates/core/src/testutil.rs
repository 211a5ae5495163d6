//! Shared unit-test fixtures.

use std::collections::BTreeSet;

use crate::corpus::{Article, ArticleId, CitationGraph, PubType};

/// The canonical seven-article fixture used throughout the suite.
///
/// Articles: s(2012), p1(2010), p2(2008), q1(2013), q2(2014), r(2007),
/// w(2013). Edges (citing -> cited): s->p1, p1->p2, q1->s, q2->q1, q2->r,
/// w->p2.
pub(crate) fn g1() -> CitationGraph {
    let articles = vec![
        Article::new(
            "s",
            "A hybrid search strategy for literature studies",
            2012,
            PubType::Journal,
        ),
        Article::new(
            "p1",
            "Snowballing procedures for reference analysis",
            2010,
            PubType::Journal,
        ),
        Article::new("p2", "Citation graph methods", 2008, PubType::Conference),
        Article::new(
            "q1",
            "Extending search coverage in mapping studies",
            2013,
            PubType::Conference,
        ),
        Article::new(
            "q2",
            "Evaluating search completeness over citation networks",
            2014,
            PubType::Journal,
        ),
        Article::new(
            "r",
            "Foundations of systematic review methods",
            2007,
            PubType::Conference,
        ),
        Article::new("w", "Workshop notes on study selection", 2013, PubType::Workshop),
    ];
    let edges = [
        ("s", "p1"),
        ("p1", "p2"),
        ("q1", "s"),
        ("q2", "q1"),
        ("q2", "r"),
        ("w", "p2"),
    ]
    .into_iter()
    .map(|(a, b)| (ArticleId::from(a), ArticleId::from(b)))
    .collect();
    CitationGraph::build(articles, edges).unwrap()
}

pub(crate) fn ids(names: &[&str]) -> BTreeSet<ArticleId> {
    names.iter().map(|s| ArticleId::from(*s)).collect()
}
