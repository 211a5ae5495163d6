//! Two-stage multi-reviewer screening with wild cards and borderline tracking.
//!
//! Every candidate article is first scored on title, abstract and keywords by
//! each panel member (0 exclude, 1 uncertain, 2 include). Articles whose
//! score sum reaches the advance threshold move to full-text assessment;
//! rejected articles can still be promoted by a single reviewer as a wild
//! card. Full-text score sums decide the final outcome: at or above the
//! include threshold the article is included, exactly at the borderline sum
//! it is excluded but tracked separately, below that it is excluded.
//!
//! The numeric thresholds (advance >= 4, include >= 4, borderline = 3) are
//! defined for a three-reviewer panel. Other panel sizes are refused unless
//! explicit thresholds are configured.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::ArticleId;

/// A single reviewer score: 0 exclude, 1 uncertain, 2 include.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Score(u8);

impl Score {
    pub fn new(value: u8) -> Result<Score, ScreeningError> {
        if value <= 2 {
            Ok(Score(value))
        } else {
            Err(ScreeningError::ScoreOutOfRange(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Score {
    type Error = ScreeningError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        Score::new(value)
    }
}

impl From<Score> for u8 {
    fn from(score: Score) -> u8 {
        score.0
    }
}

/// Assessment stage a score sheet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    TitleAbstractKeywords,
    FullText,
}

/// Ordered list of distinct reviewer ids, fixed for a whole run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ReviewerPanel {
    reviewers: Vec<String>,
}

impl ReviewerPanel {
    pub fn new(reviewers: Vec<String>) -> Result<ReviewerPanel, ScreeningError> {
        if reviewers.is_empty() {
            return Err(ScreeningError::EmptyPanel);
        }
        let mut seen = BTreeSet::new();
        for r in &reviewers {
            if !seen.insert(r.clone()) {
                return Err(ScreeningError::DuplicateReviewer(r.clone()));
            }
        }
        Ok(ReviewerPanel { reviewers })
    }

    /// The conventional three-reviewer panel.
    pub fn default_three() -> ReviewerPanel {
        ReviewerPanel {
            reviewers: vec!["r1".into(), "r2".into(), "r3".into()],
        }
    }

    pub fn len(&self) -> usize {
        self.reviewers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reviewers.is_empty()
    }

    pub fn reviewers(&self) -> &[String] {
        &self.reviewers
    }

    pub fn contains(&self, reviewer: &str) -> bool {
        self.reviewers.iter().any(|r| r == reviewer)
    }
}

impl TryFrom<Vec<String>> for ReviewerPanel {
    type Error = ScreeningError;

    fn try_from(v: Vec<String>) -> Result<Self, Self::Error> {
        ReviewerPanel::new(v)
    }
}

impl From<ReviewerPanel> for Vec<String> {
    fn from(p: ReviewerPanel) -> Vec<String> {
        p.reviewers
    }
}

/// One score per panel member for one stage, in panel order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageScores {
    pub stage: Stage,
    pub scores: Vec<Score>,
}

impl StageScores {
    pub fn new(stage: Stage, scores: Vec<Score>) -> StageScores {
        StageScores { stage, scores }
    }

    pub fn from_values(stage: Stage, values: &[u8]) -> Result<StageScores, ScreeningError> {
        let scores = values
            .iter()
            .map(|&v| Score::new(v))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(StageScores { stage, scores })
    }

    pub fn sum(&self) -> u32 {
        self.scores.iter().map(|s| u32::from(s.value())).sum()
    }

    fn check_arity(&self, panel: &ReviewerPanel) -> Result<(), ScreeningError> {
        if self.scores.len() != panel.len() {
            return Err(ScreeningError::ScoreArityMismatch {
                expected: panel.len(),
                found: self.scores.len(),
            });
        }
        Ok(())
    }
}

/// Outcome of the title/abstract/keywords stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TitleDecision {
    Advance,
    Reject,
}

/// Outcome of the full-text stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullTextDecision {
    Included,
    Borderline,
    Excluded,
}

/// Final per-article decision after the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Included,
    Borderline,
    Excluded,
    RejectedAtTitle,
}

/// Score-sum thresholds. The defaults are only meaningful for a panel of
/// three; [`ScreeningRules::new`] refuses other panel sizes without explicit
/// values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Title-stage sum needed to advance to full text.
    pub advance: u32,
    /// Full-text sum needed for inclusion.
    pub include: u32,
    /// Full-text sum that marks an excluded article as borderline.
    pub borderline: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            advance: 4,
            include: 4,
            borderline: 3,
        }
    }
}

/// Panel plus resolved thresholds, validated together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningRules {
    pub panel: ReviewerPanel,
    pub thresholds: Thresholds,
}

impl ScreeningRules {
    /// Default thresholds apply only to three-reviewer panels; any other
    /// size must supply explicit thresholds.
    pub fn new(
        panel: ReviewerPanel,
        thresholds: Option<Thresholds>,
    ) -> Result<ScreeningRules, ScreeningError> {
        match thresholds {
            Some(thresholds) => Ok(ScreeningRules { panel, thresholds }),
            None if panel.len() == 3 => Ok(ScreeningRules {
                panel,
                thresholds: Thresholds::default(),
            }),
            None => Err(ScreeningError::UnsupportedPanelSize(panel.len())),
        }
    }

    pub fn default_three() -> ScreeningRules {
        ScreeningRules {
            panel: ReviewerPanel::default_three(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScreeningError {
    #[error("score {0} outside {{0, 1, 2}}")]
    ScoreOutOfRange(u8),
    #[error("reviewer panel must not be empty")]
    EmptyPanel,
    #[error("duplicate reviewer id `{0}`")]
    DuplicateReviewer(String),
    #[error("panel of {0} reviewers requires explicit thresholds")]
    UnsupportedPanelSize(usize),
    #[error("expected {expected} scores (one per reviewer), found {found}")]
    ScoreArityMismatch { expected: usize, found: usize },
    #[error("expected {expected:?} scores, got {found:?}")]
    WrongStage { expected: Stage, found: Stage },
    #[error("reviewer `{reviewer}` nominated `{article}` which is not in the rejected pool")]
    NominationOutsidePool { reviewer: String, article: ArticleId },
    #[error("round {round} contains a nomination from `{reviewer}` who was not asked to nominate")]
    UnexpectedNominator { reviewer: String, round: usize },
    #[error("unknown reviewer `{0}`")]
    UnknownReviewer(String),
    #[error("no screening decision available for article `{0}`")]
    MissingDecision(ArticleId),
    #[error("article `{0}` advanced to full text but the decider has no full-text scores for it")]
    MissingFullTextScores(ArticleId),
}

/// Title stage is binary: advance iff the score sum reaches the threshold.
pub fn title_stage_decision(
    scores: &StageScores,
    rules: &ScreeningRules,
) -> Result<TitleDecision, ScreeningError> {
    if scores.stage != Stage::TitleAbstractKeywords {
        return Err(ScreeningError::WrongStage {
            expected: Stage::TitleAbstractKeywords,
            found: scores.stage,
        });
    }
    scores.check_arity(&rules.panel)?;
    if scores.sum() >= rules.thresholds.advance {
        Ok(TitleDecision::Advance)
    } else {
        Ok(TitleDecision::Reject)
    }
}

/// Full-text stage: include at or above the include threshold, borderline at
/// exactly the borderline sum, exclude otherwise.
pub fn full_text_decision(
    scores: &StageScores,
    rules: &ScreeningRules,
) -> Result<FullTextDecision, ScreeningError> {
    if scores.stage != Stage::FullText {
        return Err(ScreeningError::WrongStage {
            expected: Stage::FullText,
            found: scores.stage,
        });
    }
    scores.check_arity(&rules.panel)?;
    let sum = scores.sum();
    if sum >= rules.thresholds.include {
        Ok(FullTextDecision::Included)
    } else if sum == rules.thresholds.borderline {
        Ok(FullTextDecision::Borderline)
    } else {
        Ok(FullTextDecision::Excluded)
    }
}

/// Result of the iterative wild-card nomination rounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildcardOutcome {
    /// Distinct nominated articles, all promoted to full-text assessment.
    pub selected: BTreeSet<ArticleId>,
    /// First nominator of each selected article, in panel order on ties.
    pub nominated_by: BTreeMap<ArticleId, String>,
    /// True when the rounds ended with fewer wild cards than reviewers.
    pub exhausted: bool,
}

/// Replays wild-card nomination rounds over title-rejected articles.
///
/// Round 1 lets every reviewer nominate at most one rejected article. After
/// each round, reviewers whose nomination collided (the same article was
/// nominated more than once, or was already nominated in an earlier round)
/// nominate again; rounds repeat until the distinct count reaches the panel
/// size or no eligible nominations remain. The colliding article itself
/// stays selected.
pub fn apply_wildcards(
    panel: &ReviewerPanel,
    rounds: &[BTreeMap<String, ArticleId>],
    rejected_pool: &BTreeSet<ArticleId>,
) -> Result<WildcardOutcome, ScreeningError> {
    let mut selected = BTreeSet::new();
    let mut nominated_by = BTreeMap::new();
    let mut expected: Vec<String> = panel.reviewers().to_vec();

    for (round_index, round) in rounds.iter().enumerate() {
        for reviewer in round.keys() {
            if !expected.iter().any(|r| r == reviewer) {
                return Err(ScreeningError::UnexpectedNominator {
                    reviewer: reviewer.clone(),
                    round: round_index + 1,
                });
            }
        }
        let mut colliding = Vec::new();
        // Panel order keeps first-nominator attribution deterministic.
        for reviewer in expected.clone() {
            let Some(article) = round.get(&reviewer) else {
                continue; // reviewer had nothing eligible left to nominate
            };
            if !rejected_pool.contains(article) {
                return Err(ScreeningError::NominationOutsidePool {
                    reviewer,
                    article: article.clone(),
                });
            }
            if selected.insert(article.clone()) {
                nominated_by.insert(article.clone(), reviewer);
            } else {
                colliding.push(reviewer);
            }
        }
        // A same-round collision sends every nominator of that article back,
        // including the one whose copy landed first.
        let mut article_nominators: BTreeMap<&ArticleId, Vec<&String>> = BTreeMap::new();
        for (reviewer, article) in round {
            article_nominators.entry(article).or_default().push(reviewer);
        }
        for (_, nominators) in article_nominators {
            if nominators.len() > 1 {
                for reviewer in nominators {
                    if !colliding.iter().any(|r| r == reviewer) {
                        colliding.push(reviewer.clone());
                    }
                }
            }
        }
        colliding.sort_by_key(|r| panel.reviewers().iter().position(|p| p == r));

        if selected.len() >= panel.len() || colliding.is_empty() {
            return Ok(WildcardOutcome {
                exhausted: selected.len() < panel.len(),
                selected,
                nominated_by,
            });
        }
        expected = colliding;
    }

    Ok(WildcardOutcome {
        exhausted: selected.len() < panel.len(),
        selected,
        nominated_by,
    })
}

/// Per-article screening outcome: the scores that were recorded, whether a
/// wild card forced the full-text read, and the final decision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreeningRecord {
    pub article: ArticleId,
    pub title_scores: StageScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wildcard_nominated_by: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_text_scores: Option<StageScores>,
    pub decision: Decision,
}

/// Direct verdict used when per-reviewer scores are not being simulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Include,
    Borderline,
    Exclude,
}

/// Scores a decider holds for one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub title: Vec<Score>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fulltext: Option<Vec<Score>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wildcard_by: Option<String>,
}

/// Simulation stand-in for the human reviewers: either full score sheets or
/// direct verdicts. Every article presented for screening must have an
/// entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decider {
    Scores(BTreeMap<ArticleId, ScoreEntry>),
    Verdicts(BTreeMap<ArticleId, Verdict>),
}

impl Decider {
    pub fn verdicts_from(iter: impl IntoIterator<Item = (ArticleId, Verdict)>) -> Decider {
        Decider::Verdicts(iter.into_iter().collect())
    }

    pub fn covers(&self, id: &ArticleId) -> bool {
        match self {
            Decider::Scores(map) => map.contains_key(id),
            Decider::Verdicts(map) => map.contains_key(id),
        }
    }
}

/// Screens one article through the whole pipeline.
///
/// With a score decider: title stage first; a rejected article with a
/// wild-card nomination is promoted to full text anyway. With a verdict
/// decider the pipeline is bypassed and a synthetic record is built whose
/// scores still satisfy the record invariants: include maps to unanimous
/// 2s at both stages, borderline to an advancing title and full text
/// (1,1,1), exclude to title (0,0,0) and rejection at title.
pub fn screen(
    article: &ArticleId,
    decider: &Decider,
    rules: &ScreeningRules,
) -> Result<ScreeningRecord, ScreeningError> {
    match decider {
        Decider::Verdicts(map) => {
            let verdict = map
                .get(article)
                .ok_or_else(|| ScreeningError::MissingDecision(article.clone()))?;
            Ok(synthetic_record(article, *verdict, rules))
        }
        Decider::Scores(map) => {
            let entry = map
                .get(article)
                .ok_or_else(|| ScreeningError::MissingDecision(article.clone()))?;
            screen_scored(article, entry, rules)
        }
    }
}

fn screen_scored(
    article: &ArticleId,
    entry: &ScoreEntry,
    rules: &ScreeningRules,
) -> Result<ScreeningRecord, ScreeningError> {
    let title_scores = StageScores::new(Stage::TitleAbstractKeywords, entry.title.clone());
    let title = title_stage_decision(&title_scores, rules)?;

    let wildcard = match (&title, &entry.wildcard_by) {
        // Wild cards exist only for articles that failed the title stage.
        (TitleDecision::Reject, Some(reviewer)) => {
            if !rules.panel.contains(reviewer) {
                return Err(ScreeningError::UnknownReviewer(reviewer.clone()));
            }
            Some(reviewer.clone())
        }
        _ => None,
    };

    if title == TitleDecision::Reject && wildcard.is_none() {
        return Ok(ScreeningRecord {
            article: article.clone(),
            title_scores,
            wildcard_nominated_by: None,
            full_text_scores: None,
            decision: Decision::RejectedAtTitle,
        });
    }

    let fulltext = entry
        .fulltext
        .as_ref()
        .ok_or_else(|| ScreeningError::MissingFullTextScores(article.clone()))?;
    let full_text_scores = StageScores::new(Stage::FullText, fulltext.clone());
    let decision = match full_text_decision(&full_text_scores, rules)? {
        FullTextDecision::Included => Decision::Included,
        FullTextDecision::Borderline => Decision::Borderline,
        FullTextDecision::Excluded => Decision::Excluded,
    };
    Ok(ScreeningRecord {
        article: article.clone(),
        title_scores,
        wildcard_nominated_by: wildcard,
        full_text_scores: Some(full_text_scores),
        decision,
    })
}

fn synthetic_record(
    article: &ArticleId,
    verdict: Verdict,
    rules: &ScreeningRules,
) -> ScreeningRecord {
    let n = rules.panel.len();
    let uniform = |v: u8| vec![Score(v); n];
    let (title, fulltext, decision) = match verdict {
        Verdict::Include => (uniform(2), Some(uniform(2)), Decision::Included),
        Verdict::Borderline => (uniform(2), Some(uniform(1)), Decision::Borderline),
        Verdict::Exclude => (uniform(0), None, Decision::RejectedAtTitle),
    };
    ScreeningRecord {
        article: article.clone(),
        title_scores: StageScores::new(Stage::TitleAbstractKeywords, title),
        wildcard_nominated_by: None,
        full_text_scores: fulltext.map(|s| StageScores::new(Stage::FullText, s)),
        decision,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> ArticleId {
        ArticleId::from(s)
    }

    fn title(values: &[u8]) -> StageScores {
        StageScores::from_values(Stage::TitleAbstractKeywords, values).unwrap()
    }

    fn fulltext(values: &[u8]) -> StageScores {
        StageScores::from_values(Stage::FullText, values).unwrap()
    }

    #[test]
    fn title_threshold() {
        let rules = ScreeningRules::default_three();
        assert_eq!(
            title_stage_decision(&title(&[2, 2, 1]), &rules).unwrap(),
            TitleDecision::Advance
        );
        assert_eq!(
            title_stage_decision(&title(&[2, 2, 0]), &rules).unwrap(),
            TitleDecision::Advance
        );
        assert_eq!(
            title_stage_decision(&title(&[0, 0, 0]), &rules).unwrap(),
            TitleDecision::Reject
        );
        assert_eq!(
            title_stage_decision(&title(&[1, 1, 1]), &rules).unwrap(),
            TitleDecision::Reject
        );
    }

    #[test]
    fn full_text_thresholds() {
        let rules = ScreeningRules::default_three();
        assert_eq!(
            full_text_decision(&fulltext(&[2, 2, 2]), &rules).unwrap(),
            FullTextDecision::Included
        );
        assert_eq!(
            full_text_decision(&fulltext(&[1, 1, 1]), &rules).unwrap(),
            FullTextDecision::Borderline
        );
        assert_eq!(
            full_text_decision(&fulltext(&[2, 1, 0]), &rules).unwrap(),
            FullTextDecision::Borderline
        );
        assert_eq!(
            full_text_decision(&fulltext(&[2, 0, 0]), &rules).unwrap(),
            FullTextDecision::Excluded
        );
    }

    #[test]
    fn wrong_stage_rejected() {
        let rules = ScreeningRules::default_three();
        assert!(matches!(
            title_stage_decision(&fulltext(&[2, 2, 2]), &rules),
            Err(ScreeningError::WrongStage { .. })
        ));
        assert!(matches!(
            full_text_decision(&title(&[2, 2, 2]), &rules),
            Err(ScreeningError::WrongStage { .. })
        ));
    }

    #[test]
    fn decision_monotone_in_each_score() {
        // Raising any single score never moves a decision towards exclusion.
        let rules = ScreeningRules::default_three();
        let rank_title = |d: TitleDecision| match d {
            TitleDecision::Reject => 0,
            TitleDecision::Advance => 1,
        };
        let rank_full = |d: FullTextDecision| match d {
            FullTextDecision::Excluded => 0,
            FullTextDecision::Borderline => 1,
            FullTextDecision::Included => 2,
        };
        for a in 0..=2u8 {
            for b in 0..=2u8 {
                for c in 0..=2u8 {
                    for slot in 0..3 {
                        let mut raised = [a, b, c];
                        if raised[slot] == 2 {
                            continue;
                        }
                        raised[slot] += 1;
                        let base_t = title_stage_decision(&title(&[a, b, c]), &rules).unwrap();
                        let high_t = title_stage_decision(&title(&raised), &rules).unwrap();
                        assert!(rank_title(high_t) >= rank_title(base_t));
                        let base_f = full_text_decision(&fulltext(&[a, b, c]), &rules).unwrap();
                        let high_f = full_text_decision(&fulltext(&raised), &rules).unwrap();
                        assert!(rank_full(high_f) >= rank_full(base_f));
                    }
                }
            }
        }
    }

    #[test]
    fn panel_size_requires_explicit_thresholds() {
        let panel = ReviewerPanel::new(vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(
            ScreeningRules::new(panel.clone(), None).unwrap_err(),
            ScreeningError::UnsupportedPanelSize(2)
        );
        let rules = ScreeningRules::new(
            panel,
            Some(Thresholds {
                advance: 3,
                include: 3,
                borderline: 2,
            }),
        )
        .unwrap();
        assert_eq!(rules.thresholds.advance, 3);
    }

    #[test]
    fn arity_mismatch_detected() {
        let rules = ScreeningRules::default_three();
        assert_eq!(
            title_stage_decision(&title(&[2, 2]), &rules).unwrap_err(),
            ScreeningError::ScoreArityMismatch {
                expected: 3,
                found: 2
            }
        );
    }

    fn pool(names: &[&str]) -> BTreeSet<ArticleId> {
        names.iter().map(|s| id(s)).collect()
    }

    fn round(entries: &[(&str, &str)]) -> BTreeMap<String, ArticleId> {
        entries
            .iter()
            .map(|(r, a)| ((*r).to_owned(), id(a)))
            .collect()
    }

    #[test]
    fn wildcards_all_distinct_single_round() {
        let panel = ReviewerPanel::default_three();
        let rounds = vec![round(&[("r1", "A"), ("r2", "B"), ("r3", "C")])];
        let outcome = apply_wildcards(&panel, &rounds, &pool(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(outcome.selected, pool(&["A", "B", "C"]));
        assert!(!outcome.exhausted);
        assert_eq!(outcome.nominated_by[&id("A")], "r1");
    }

    #[test]
    fn wildcards_renomination_after_collision() {
        let panel = ReviewerPanel::default_three();
        let rounds = vec![
            round(&[("r1", "A"), ("r2", "A"), ("r3", "B")]),
            round(&[("r1", "C"), ("r2", "D")]),
        ];
        let outcome = apply_wildcards(&panel, &rounds, &pool(&["A", "B", "C", "D", "E"])).unwrap();
        assert_eq!(outcome.selected, pool(&["A", "B", "C", "D"]));
        assert!(!outcome.exhausted);
        // First copy of the collision wins attribution.
        assert_eq!(outcome.nominated_by[&id("A")], "r1");
    }

    #[test]
    fn wildcards_empty_pool() {
        let panel = ReviewerPanel::default_three();
        let outcome = apply_wildcards(&panel, &[], &BTreeSet::new()).unwrap();
        assert!(outcome.selected.is_empty());
        assert!(outcome.exhausted);
    }

    #[test]
    fn wildcards_nomination_outside_pool() {
        let panel = ReviewerPanel::default_three();
        let rounds = vec![round(&[("r1", "Z")])];
        assert_eq!(
            apply_wildcards(&panel, &rounds, &pool(&["A"])).unwrap_err(),
            ScreeningError::NominationOutsidePool {
                reviewer: "r1".into(),
                article: id("Z"),
            }
        );
    }

    #[test]
    fn wildcards_stop_once_quota_reached() {
        // Round 2 reaches three distinct wild cards; round 3 is never
        // consumed even though r1 collided again.
        let panel = ReviewerPanel::default_three();
        let rounds = vec![
            round(&[("r1", "A"), ("r2", "A"), ("r3", "B")]),
            round(&[("r1", "B"), ("r2", "C")]),
            round(&[("r1", "D")]),
        ];
        let outcome = apply_wildcards(&panel, &rounds, &pool(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(outcome.selected, pool(&["A", "B", "C"]));
        assert!(!outcome.exhausted);
    }

    #[test]
    fn wildcards_cross_round_duplicate_counts_as_collision() {
        let panel = ReviewerPanel::default_three();
        let rounds = vec![
            round(&[("r1", "A"), ("r2", "A"), ("r3", "B")]),
            round(&[("r1", "B"), ("r2", "B")]),
            round(&[("r1", "C")]),
        ];
        let outcome = apply_wildcards(&panel, &rounds, &pool(&["A", "B", "C", "D"])).unwrap();
        assert_eq!(outcome.selected, pool(&["A", "B", "C"]));
        assert!(!outcome.exhausted);
    }

    #[test]
    fn wildcards_unexpected_nominator_rejected() {
        let panel = ReviewerPanel::default_three();
        let rounds = vec![
            round(&[("r1", "A"), ("r2", "A"), ("r3", "B")]),
            round(&[("r3", "C")]),
        ];
        // Only r1 and r2 collided, so r3 may not nominate again.
        assert_eq!(
            apply_wildcards(&panel, &rounds, &pool(&["A", "B", "C"])).unwrap_err(),
            ScreeningError::UnexpectedNominator {
                reviewer: "r3".into(),
                round: 2,
            }
        );
    }

    fn score_entry(title: &[u8], fulltext: Option<&[u8]>, wildcard: Option<&str>) -> ScoreEntry {
        ScoreEntry {
            title: title.iter().map(|&v| Score::new(v).unwrap()).collect(),
            fulltext: fulltext.map(|v| v.iter().map(|&x| Score::new(x).unwrap()).collect()),
            wildcard_by: wildcard.map(str::to_owned),
        }
    }

    #[test]
    fn screen_unanimous_include() {
        let rules = ScreeningRules::default_three();
        let decider =
            Decider::Scores([(id("a"), score_entry(&[2, 2, 2], Some(&[2, 2, 2]), None))].into());
        let record = screen(&id("a"), &decider, &rules).unwrap();
        assert_eq!(record.decision, Decision::Included);
        assert!(record.wildcard_nominated_by.is_none());
    }

    #[test]
    fn screen_rejects_sum_three_title() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Scores([(id("a"), score_entry(&[1, 1, 1], None, None))].into());
        let record = screen(&id("a"), &decider, &rules).unwrap();
        assert_eq!(record.decision, Decision::RejectedAtTitle);
        assert!(record.full_text_scores.is_none());
    }

    #[test]
    fn screen_wildcard_promotion() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Scores(
            [(id("a"), score_entry(&[1, 1, 0], Some(&[2, 2, 2]), Some("r2")))].into(),
        );
        let record = screen(&id("a"), &decider, &rules).unwrap();
        assert_eq!(record.decision, Decision::Included);
        assert_eq!(record.wildcard_nominated_by.as_deref(), Some("r2"));
    }

    #[test]
    fn screen_wildcard_ignored_when_title_advances() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Scores(
            [(id("a"), score_entry(&[2, 2, 1], Some(&[1, 1, 1]), Some("r1")))].into(),
        );
        let record = screen(&id("a"), &decider, &rules).unwrap();
        assert_eq!(record.decision, Decision::Borderline);
        assert!(record.wildcard_nominated_by.is_none());
    }

    #[test]
    fn screen_missing_decision() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Scores(BTreeMap::new());
        assert_eq!(
            screen(&id("a"), &decider, &rules).unwrap_err(),
            ScreeningError::MissingDecision(id("a"))
        );
    }

    #[test]
    fn screen_advanced_without_fulltext_scores_is_an_error() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Scores([(id("a"), score_entry(&[2, 2, 2], None, None))].into());
        assert_eq!(
            screen(&id("a"), &decider, &rules).unwrap_err(),
            ScreeningError::MissingFullTextScores(id("a"))
        );
    }

    #[test]
    fn verdict_records_satisfy_invariants() {
        let rules = ScreeningRules::default_three();
        let decider = Decider::Verdicts(
            [
                (id("i"), Verdict::Include),
                (id("b"), Verdict::Borderline),
                (id("e"), Verdict::Exclude),
            ]
            .into(),
        );
        let include = screen(&id("i"), &decider, &rules).unwrap();
        assert_eq!(include.decision, Decision::Included);
        assert_eq!(include.full_text_scores.as_ref().unwrap().sum(), 6);
        let borderline = screen(&id("b"), &decider, &rules).unwrap();
        assert_eq!(borderline.decision, Decision::Borderline);
        assert_eq!(borderline.full_text_scores.as_ref().unwrap().sum(), 3);
        let exclude = screen(&id("e"), &decider, &rules).unwrap();
        assert_eq!(exclude.decision, Decision::RejectedAtTitle);
        assert!(exclude.full_text_scores.is_none());
        assert_eq!(exclude.title_scores.sum(), 0);
    }

    #[test]
    fn screen_is_deterministic() {
        let rules = ScreeningRules::default_three();
        let decider =
            Decider::Scores([(id("a"), score_entry(&[2, 2, 0], Some(&[2, 1, 0]), None))].into());
        let first = screen(&id("a"), &decider, &rules).unwrap();
        let second = screen(&id("a"), &decider, &rules).unwrap();
        assert_eq!(first, second);
        assert_eq!(first.decision, Decision::Borderline);
    }
}
