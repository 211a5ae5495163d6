//! Immutable citation-graph data model.
//!
//! An edge `A -> B` means "A cites B": the references of an article are its
//! out-neighbors, its citations are its in-neighbors. The graph is built
//! once, validated, and never mutated afterwards, so it is safe to share
//! across concurrent strategy runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Canonical article identifier. Opaque, non-empty, unique within a corpus.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArticleId(String);

impl ArticleId {
    pub fn new(id: impl Into<String>) -> Self {
        ArticleId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ArticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ArticleId {
    fn from(s: &str) -> Self {
        ArticleId(s.to_owned())
    }
}

impl From<String> for ArticleId {
    fn from(s: String) -> Self {
        ArticleId(s)
    }
}

/// Publication type of an article. Database searches and snowballing steps
/// filter on this independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PubType {
    Journal,
    Conference,
    Workshop,
    BookChapter,
    Book,
    Keynote,
    Column,
    Thesis,
    Other,
}

impl PubType {
    /// All publication types, in declaration order.
    pub fn all() -> [PubType; 9] {
        [
            PubType::Journal,
            PubType::Conference,
            PubType::Workshop,
            PubType::BookChapter,
            PubType::Book,
            PubType::Keynote,
            PubType::Column,
            PubType::Thesis,
            PubType::Other,
        ]
    }
}

/// A bibliographic record: the unit of search and screening.
///
/// `year` may be absent; such articles fail every year-bounded filter.
/// `supersedes` points at an older version (typically a conference paper
/// replaced by a journal version) that [`CitationGraph::dedupe_versions`]
/// removes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Article {
    pub id: ArticleId,
    pub title: String,
    #[serde(rename = "abstract", default, skip_serializing_if = "Option::is_none")]
    pub abstract_text: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub year: Option<i32>,
    pub pub_type: PubType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub venue: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supersedes: Option<ArticleId>,
}

impl Article {
    /// Minimal constructor used heavily by tests and the generator.
    pub fn new(
        id: impl Into<ArticleId>,
        title: impl Into<String>,
        year: i32,
        pub_type: PubType,
    ) -> Self {
        Article {
            id: id.into(),
            title: title.into(),
            abstract_text: None,
            keywords: Vec::new(),
            year: Some(year),
            pub_type,
            venue: None,
            supersedes: None,
        }
    }

    fn validate(&self) -> Result<(), CorpusError> {
        if self.id.as_str().is_empty() {
            return Err(CorpusError::EmptyArticleId);
        }
        if let Some(target) = &self.supersedes {
            if target == &self.id {
                return Err(CorpusError::SupersedesCycle {
                    article: self.id.clone(),
                });
            }
        }
        if let Some(year) = self.year {
            if !(1900..=2100).contains(&year) {
                return Err(CorpusError::YearOutOfRange {
                    article: self.id.clone(),
                    year,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("article id must be non-empty")]
    EmptyArticleId,
    #[error("duplicate article id `{0}`")]
    DuplicateArticleId(ArticleId),
    #[error("article `{article}` has year {year} outside [1900, 2100]")]
    YearOutOfRange { article: ArticleId, year: i32 },
    #[error("edge ({citing} -> {cited}) names unknown article `{unknown}`")]
    UnknownEdgeEndpoint {
        citing: ArticleId,
        cited: ArticleId,
        unknown: ArticleId,
    },
    #[error("self-citation edge on `{0}`")]
    SelfCitation(ArticleId),
    #[error("unknown article `{0}`")]
    UnknownArticle(ArticleId),
    #[error("supersedes chain through `{article}` forms a cycle")]
    SupersedesCycle { article: ArticleId },
    #[error("article `{article}` supersedes unknown article `{target}`")]
    SupersedesUnknownTarget {
        article: ArticleId,
        target: ArticleId,
    },
}

/// Immutable directed citation graph. Edge `(a, b)` means "a cites b".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CitationGraph {
    articles: BTreeMap<ArticleId, Article>,
    outgoing: BTreeMap<ArticleId, BTreeSet<ArticleId>>,
    incoming: BTreeMap<ArticleId, BTreeSet<ArticleId>>,
}

impl CitationGraph {
    /// Builds a graph from articles and `(citing, cited)` edge pairs.
    ///
    /// Duplicate edges collapse silently; duplicate ids, dangling edge
    /// endpoints and self-citations are errors.
    pub fn build(
        articles: Vec<Article>,
        edges: Vec<(ArticleId, ArticleId)>,
    ) -> Result<CitationGraph, CorpusError> {
        let mut map = BTreeMap::new();
        for article in articles {
            article.validate()?;
            let id = article.id.clone();
            if map.insert(id.clone(), article).is_some() {
                return Err(CorpusError::DuplicateArticleId(id));
            }
        }
        let mut outgoing: BTreeMap<ArticleId, BTreeSet<ArticleId>> =
            map.keys().map(|id| (id.clone(), BTreeSet::new())).collect();
        let mut incoming = outgoing.clone();
        for (citing, cited) in edges {
            if citing == cited {
                return Err(CorpusError::SelfCitation(citing));
            }
            for endpoint in [&citing, &cited] {
                if !map.contains_key(endpoint) {
                    return Err(CorpusError::UnknownEdgeEndpoint {
                        citing: citing.clone(),
                        cited: cited.clone(),
                        unknown: (*endpoint).clone(),
                    });
                }
            }
            outgoing
                .get_mut(&citing)
                .expect("endpoint checked")
                .insert(cited.clone());
            incoming.get_mut(&cited).expect("endpoint checked").insert(citing);
        }
        Ok(CitationGraph {
            articles: map,
            outgoing,
            incoming,
        })
    }

    pub fn empty() -> CitationGraph {
        CitationGraph {
            articles: BTreeMap::new(),
            outgoing: BTreeMap::new(),
            incoming: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.outgoing.values().map(BTreeSet::len).sum()
    }

    pub fn contains(&self, id: &ArticleId) -> bool {
        self.articles.contains_key(id)
    }

    pub fn article(&self, id: &ArticleId) -> Result<&Article, CorpusError> {
        self.articles
            .get(id)
            .ok_or_else(|| CorpusError::UnknownArticle(id.clone()))
    }

    /// All articles, ascending by id.
    pub fn articles(&self) -> impl Iterator<Item = &Article> {
        self.articles.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &ArticleId> {
        self.articles.keys()
    }

    /// All `(citing, cited)` edges, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (&ArticleId, &ArticleId)> {
        self.outgoing
            .iter()
            .flat_map(|(citing, cited)| cited.iter().map(move |c| (citing, c)))
    }

    /// Out-neighbors of `id`: the articles it cites.
    pub fn references(&self, id: &ArticleId) -> Result<&BTreeSet<ArticleId>, CorpusError> {
        self.outgoing
            .get(id)
            .ok_or_else(|| CorpusError::UnknownArticle(id.clone()))
    }

    /// In-neighbors of `id`: the articles citing it.
    pub fn citations(&self, id: &ArticleId) -> Result<&BTreeSet<ArticleId>, CorpusError> {
        self.incoming
            .get(id)
            .ok_or_else(|| CorpusError::UnknownArticle(id.clone()))
    }

    /// Smallest known publication year in the corpus, if any article has one.
    pub fn min_year(&self) -> Option<i32> {
        self.articles.values().filter_map(|a| a.year).min()
    }

    /// Removes every article superseded by a present article, redirecting its
    /// incident edges to the superseding article. Duplicate and self edges
    /// produced by redirection are dropped.
    pub fn dedupe_versions(&self) -> Result<CitationGraph, CorpusError> {
        // replacement[c] = j when j.supersedes = c and both are present
        let mut replacement: BTreeMap<ArticleId, ArticleId> = BTreeMap::new();
        for article in self.articles.values() {
            if let Some(target) = &article.supersedes {
                if !self.articles.contains_key(target) {
                    return Err(CorpusError::SupersedesUnknownTarget {
                        article: article.id.clone(),
                        target: target.clone(),
                    });
                }
                replacement.insert(target.clone(), article.id.clone());
            }
        }
        // Resolve chains (A supersedes B supersedes C) to the final survivor,
        // rejecting cycles.
        let mut resolved: BTreeMap<ArticleId, ArticleId> = BTreeMap::new();
        for start in replacement.keys() {
            let mut visited = BTreeSet::new();
            let mut current = start.clone();
            while let Some(next) = replacement.get(&current) {
                if !visited.insert(current.clone()) {
                    return Err(CorpusError::SupersedesCycle {
                        article: start.clone(),
                    });
                }
                current = next.clone();
            }
            resolved.insert(start.clone(), current);
        }
        let resolve = |id: &ArticleId| resolved.get(id).unwrap_or(id).clone();

        let survivors: Vec<Article> = self
            .articles
            .values()
            .filter(|a| !resolved.contains_key(&a.id))
            .cloned()
            .map(|mut a| {
                // The link was consumed by removing its target.
                a.supersedes = None;
                a
            })
            .collect();
        let mut edges = BTreeSet::new();
        for (citing, cited) in self.edges() {
            let citing = resolve(citing);
            let cited = resolve(cited);
            if citing != cited {
                edges.insert((citing, cited));
            }
        }
        CitationGraph::build(survivors, edges.into_iter().collect())
    }
}

/// Canonical title key for duplicate detection across sources: case-folded,
/// punctuation replaced by spaces, whitespace collapsed.
pub fn normalize_title(title: &str) -> String {
    let lowered: String = title
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{g1, ids};

    fn id(s: &str) -> ArticleId {
        ArticleId::from(s)
    }

    #[test]
    fn empty_build() {
        let g = CitationGraph::build(vec![], vec![]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn g1_references() {
        let g = g1();
        assert_eq!(*g.references(&id("s")).unwrap(), ids(&["p1"]));
        assert_eq!(*g.references(&id("q2")).unwrap(), ids(&["q1", "r"]));
        assert!(g.references(&id("r")).unwrap().is_empty());
    }

    #[test]
    fn g1_citations() {
        let g = g1();
        assert_eq!(*g.citations(&id("p2")).unwrap(), ids(&["p1", "w"]));
        assert!(g.citations(&id("q2")).unwrap().is_empty());
        assert_eq!(*g.citations(&id("s")).unwrap(), ids(&["q1"]));
    }

    #[test]
    fn duplicate_edges_collapse() {
        let articles = vec![
            Article::new("s", "a", 2012, PubType::Journal),
            Article::new("p1", "b", 2010, PubType::Journal),
        ];
        let edges = vec![(id("s"), id("p1")), (id("s"), id("p1"))];
        let g = CitationGraph::build(articles, edges).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn build_rejects_duplicate_id() {
        let articles = vec![
            Article::new("s", "a", 2012, PubType::Journal),
            Article::new("s", "b", 2010, PubType::Journal),
        ];
        assert_eq!(
            CitationGraph::build(articles, vec![]),
            Err(CorpusError::DuplicateArticleId(id("s")))
        );
    }

    #[test]
    fn build_rejects_unknown_endpoint() {
        let articles = vec![Article::new("s", "a", 2012, PubType::Journal)];
        let err = CitationGraph::build(articles, vec![(id("s"), id("nope"))]).unwrap_err();
        assert!(
            matches!(err, CorpusError::UnknownEdgeEndpoint { unknown, .. } if unknown == id("nope"))
        );
    }

    #[test]
    fn build_rejects_self_citation() {
        let articles = vec![Article::new("s", "a", 2012, PubType::Journal)];
        assert_eq!(
            CitationGraph::build(articles, vec![(id("s"), id("s"))]),
            Err(CorpusError::SelfCitation(id("s")))
        );
    }

    #[test]
    fn unknown_article_lookup() {
        let g = g1();
        assert_eq!(
            g.references(&id("zz")).unwrap_err(),
            CorpusError::UnknownArticle(id("zz"))
        );
    }

    #[test]
    fn normalize_title_examples() {
        assert_eq!(normalize_title("  The Title! "), "the title");
        assert_eq!(
            normalize_title("Hybrid Search"),
            normalize_title("hybrid   SEARCH")
        );
        assert_eq!(normalize_title("A\u{2014}B"), "a b");
    }

    #[test]
    fn dedupe_redirects_edges_to_journal_version() {
        let mut journal = Article::new("J", "Study (journal)", 2014, PubType::Journal);
        journal.supersedes = Some(id("C"));
        let articles = vec![
            journal,
            Article::new("C", "Study (conference)", 2012, PubType::Conference),
            Article::new("x", "Citing work", 2013, PubType::Journal),
        ];
        let g = CitationGraph::build(articles, vec![(id("x"), id("C"))]).unwrap();
        let deduped = g.dedupe_versions().unwrap();
        assert!(!deduped.contains(&id("C")));
        assert_eq!(*deduped.references(&id("x")).unwrap(), ids(&["J"]));
    }

    #[test]
    fn dedupe_without_links_is_identity() {
        let g = g1();
        assert_eq!(g.dedupe_versions().unwrap(), g);
    }

    #[test]
    fn dedupe_rejects_cycles() {
        let mut a = Article::new("J", "x", 2014, PubType::Journal);
        a.supersedes = Some(id("C"));
        let mut b = Article::new("C", "y", 2012, PubType::Conference);
        b.supersedes = Some(id("J"));
        let g = CitationGraph::build(vec![a, b], vec![]).unwrap();
        assert!(matches!(
            g.dedupe_versions().unwrap_err(),
            CorpusError::SupersedesCycle { .. }
        ));
    }

    #[test]
    fn dedupe_rejects_unknown_target() {
        let mut a = Article::new("J", "x", 2014, PubType::Journal);
        a.supersedes = Some(id("gone"));
        let g = CitationGraph::build(vec![a], vec![]).unwrap();
        assert_eq!(
            g.dedupe_versions().unwrap_err(),
            CorpusError::SupersedesUnknownTarget {
                article: id("J"),
                target: id("gone"),
            }
        );
    }

    #[test]
    fn dedupe_follows_chains_and_drops_self_edges() {
        // A supersedes B, B supersedes C; an edge A->C must vanish rather
        // than become a self-loop.
        let mut a = Article::new("A", "v3", 2015, PubType::Journal);
        a.supersedes = Some(id("B"));
        let mut b = Article::new("B", "v2", 2013, PubType::Conference);
        b.supersedes = Some(id("C"));
        let c = Article::new("C", "v1", 2011, PubType::Workshop);
        let x = Article::new("x", "other", 2014, PubType::Journal);
        let g = CitationGraph::build(
            vec![a, b, c, x],
            vec![(id("A"), id("C")), (id("x"), id("C")), (id("x"), id("B"))],
        )
        .unwrap();
        let deduped = g.dedupe_versions().unwrap();
        assert_eq!(deduped.len(), 2);
        assert_eq!(*deduped.references(&id("x")).unwrap(), ids(&["A"]));
        assert!(deduped.references(&id("A")).unwrap().is_empty());
    }

    #[test]
    fn dedupe_is_idempotent() {
        let mut journal = Article::new("J", "j", 2014, PubType::Journal);
        journal.supersedes = Some(id("C"));
        let articles = vec![
            journal,
            Article::new("C", "c", 2012, PubType::Conference),
            Article::new("x", "x", 2013, PubType::Journal),
        ];
        let g = CitationGraph::build(articles, vec![(id("x"), id("C"))]).unwrap();
        let once = g.dedupe_versions().unwrap();
        let twice = once.dedupe_versions().unwrap();
        assert_eq!(once, twice);
        assert!(once.len() <= g.len());
    }

    #[test]
    fn year_bounds_enforced() {
        let a = Article::new("a", "t", 1800, PubType::Journal);
        assert!(matches!(
            CitationGraph::build(vec![a], vec![]),
            Err(CorpusError::YearOutOfRange { .. })
        ));
    }
}
