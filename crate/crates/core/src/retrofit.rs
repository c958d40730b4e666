//! Inference of missing `IsSupplementedBy` relations from `Cites` and
//! `References` relations.
//!
//! Two heuristics are available. The rule variant retrofits a citation when
//! the two records share authors and were dated close together. The interval
//! variant scores a feature vector of date proximity, title and subject
//! overlap and author overlap, calibrates a score interval on known
//! supplement pairs, and retrofits citations whose score falls inside it.
//!
//! Candidates are drawn from asserted relations only, so running either
//! heuristic again on a graph that already holds its output yields the same
//! set of inferred relations.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diff::{match_author_sets, MatchConfig};
use crate::graph::Graph;
use crate::model::{
    ProductKind, Provenance, Relation, RelationSemantics, ResearchProduct, RetrofitRule,
    SupplementPair,
};
use crate::normalize::title_tokens;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetrofitError {
    #[error("window_days must be positive")]
    WindowDays,
    #[error("min_shared_authors must be >= 1")]
    MinSharedAuthors,
    #[error("weights must be non-negative and sum to 1 (sum = {0})")]
    Weights(f64),
    #[error("interval multiplier must be non-negative, got {0}")]
    Multiplier(f64),
    #[error("calibration needs at least 2 known pairs, got {0}")]
    TooFewPairs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrofitRuleConfig {
    pub window_days: i64,
    pub min_shared_authors: usize,
}

impl Default for RetrofitRuleConfig {
    fn default() -> Self {
        Self {
            window_days: 183,
            min_shared_authors: 1,
        }
    }
}

/// Outcome of checking one candidate against the date/author rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleCheck {
    Qualifies,
    MissingDate,
    OutsideWindow,
    TooFewSharedAuthors,
}

impl RetrofitRuleConfig {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        if self.window_days <= 0 {
            return Err(RetrofitError::WindowDays);
        }
        if self.min_shared_authors < 1 {
            return Err(RetrofitError::MinSharedAuthors);
        }
        Ok(())
    }

    pub fn check(
        &self,
        publication: &ResearchProduct,
        supplement: &ResearchProduct,
        match_cfg: &MatchConfig,
    ) -> RuleCheck {
        let (Some(dp), Some(dd)) = (publication.date, supplement.date) else {
            return RuleCheck::MissingDate;
        };
        if (dp - dd).num_days().abs() > self.window_days {
            return RuleCheck::OutsideWindow;
        }
        let shared = match_author_sets(&publication.authors, &supplement.authors, match_cfg)
            .matches
            .len();
        if shared < self.min_shared_authors {
            return RuleCheck::TooFewSharedAuthors;
        }
        RuleCheck::Qualifies
    }
}

/// A publication and supplement tied only by `Cites`/`References`.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePair {
    pub publication: Arc<ResearchProduct>,
    pub supplement: Arc<ResearchProduct>,
}

/// Asserted `Cites`/`References` relations between a publication and a
/// dataset/software, in either direction, folded to canonical
/// publication→supplement form. Pairs already linked by an asserted
/// `IsSupplementedBy` are excluded. Sorted by (publication, supplement).
pub fn vanilla_candidates(graph: &Graph) -> Vec<CandidatePair> {
    let canonical = |rel: &Relation| {
        let a = graph.product(&rel.source_id)?;
        let b = graph.product(&rel.target_id)?;
        if a.kind == ProductKind::Publication && b.kind.is_supplement() {
            Some((a.clone(), b.clone()))
        } else if b.kind == ProductKind::Publication && a.kind.is_supplement() {
            Some((b.clone(), a.clone()))
        } else {
            None
        }
    };
    let asserted = |rel: &&Relation| rel.provenance == Provenance::Asserted;

    let supplemented: HashSet<(String, String)> = graph
        .relations()
        .iter()
        .filter(asserted)
        .filter(|r| r.semantics == RelationSemantics::IsSupplementedBy)
        .filter_map(canonical)
        .map(|(p, d)| (p.id.clone(), d.id.clone()))
        .collect();

    let mut out: BTreeMap<(String, String), CandidatePair> = BTreeMap::new();
    for rel in graph.relations().iter().filter(asserted) {
        if !rel.semantics.is_vanilla() {
            continue;
        }
        let Some((p, d)) = canonical(rel) else { continue };
        let key = (p.id.clone(), d.id.clone());
        if supplemented.contains(&key) {
            continue;
        }
        out.entry(key).or_insert(CandidatePair {
            publication: p,
            supplement: d,
        });
    }
    out.into_values().collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RetrofitOutcome {
    /// Inferred relations in canonical publication→supplement form.
    pub relations: Vec<Relation>,
    pub candidates: usize,
    pub skipped_missing_date: usize,
}

/// Retrofits every candidate satisfying the date window and shared-author rule.
pub fn retrofit_by_rule(
    graph: &Graph,
    cfg: &RetrofitRuleConfig,
    match_cfg: &MatchConfig,
) -> RetrofitOutcome {
    let candidates = vanilla_candidates(graph);
    let mut outcome = RetrofitOutcome {
        candidates: candidates.len(),
        ..RetrofitOutcome::default()
    };
    for c in &candidates {
        match cfg.check(&c.publication, &c.supplement, match_cfg) {
            RuleCheck::Qualifies => outcome.relations.push(Relation::inferred(
                &c.publication.id,
                &c.supplement.id,
                RetrofitRule::DateAuthor,
            )),
            RuleCheck::MissingDate => outcome.skipped_missing_date += 1,
            RuleCheck::OutsideWindow | RuleCheck::TooFewSharedAuthors => {}
        }
    }
    outcome
}

/// Similarity features between a publication and a candidate supplement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub date_delta_days: Option<u64>,
    pub title_similarity: f64,
    pub subject_overlap: f64,
    pub author_overlap: f64,
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

impl FeatureVector {
    pub fn between(
        publication: &ResearchProduct,
        supplement: &ResearchProduct,
        match_cfg: &MatchConfig,
    ) -> Self {
        let date_delta_days = match (publication.date, supplement.date) {
            (Some(a), Some(b)) => Some((a - b).num_days().unsigned_abs()),
            _ => None,
        };
        let matches = match_author_sets(&publication.authors, &supplement.authors, match_cfg)
            .matches
            .len();
        let largest = publication.authors.len().max(supplement.authors.len());
        let author_overlap = if largest == 0 {
            0.0
        } else {
            matches as f64 / largest as f64
        };
        Self {
            date_delta_days,
            title_similarity: jaccard(&title_tokens(&publication.title), &title_tokens(&supplement.title)),
            subject_overlap: jaccard(&publication.subjects, &supplement.subjects),
            author_overlap,
        }
    }

    /// `max(0, 1 - delta/365)`, or 0 when a date is missing.
    pub fn date_proximity(&self) -> f64 {
        self.date_delta_days
            .map_or(0.0, |d| (1.0 - d as f64 / 365.0).max(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub date: f64,
    pub title: f64,
    pub subjects: f64,
    pub authors: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            date: 0.25,
            title: 0.25,
            subjects: 0.25,
            authors: 0.25,
        }
    }
}

impl Weights {
    pub fn validate(&self) -> Result<(), RetrofitError> {
        let parts = [self.date, self.title, self.subjects, self.authors];
        let sum: f64 = parts.iter().sum();
        if parts.iter().any(|w| !(*w >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(RetrofitError::Weights(sum));
        }
        Ok(())
    }
}

/// Weighted mean of the four feature components, in `[0, 1]`.
pub fn score(fv: &FeatureVector, weights: &Weights) -> Result<f64, RetrofitError> {
    weights.validate()?;
    let s = weights.date * fv.date_proximity()
        + weights.title * fv.title_similarity
        + weights.subjects * fv.subject_overlap
        + weights.authors * fv.author_overlap;
    Ok(s.clamp(0.0, 1.0))
}

/// `mean ± multiplier · σ` of scores over known supplement pairs, with σ the
/// sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreInterval {
    pub mean: f64,
    pub std: f64,
    pub low: f64,
    pub high: f64,
}

impl ScoreInterval {
    pub const DEFAULT_MULTIPLIER: f64 = 2.0;

    pub fn from_scores(scores: &[f64], multiplier: f64) -> Result<Self, RetrofitError> {
        if !(multiplier >= 0.0) {
            return Err(RetrofitError::Multiplier(multiplier));
        }
        let n = scores.len();
        if n < 2 {
            return Err(RetrofitError::TooFewPairs(n));
        }
        let mean = scores.iter().sum::<f64>() / n as f64;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        Ok(Self {
            mean,
            std,
            low: mean - multiplier * std,
            high: mean + multiplier * std,
        })
    }

    pub fn contains(&self, score: f64) -> bool {
        self.low <= score && score <= self.high
    }
}

/// Calibrates the interval on asserted pairs; inferred pairs are ignored.
pub fn calibrate_interval(
    known_pairs: &[SupplementPair],
    weights: &Weights,
    match_cfg: &MatchConfig,
    multiplier: f64,
) -> Result<ScoreInterval, RetrofitError> {
    weights.validate()?;
    let scores = known_pairs
        .iter()
        .filter(|p| p.provenance() == Provenance::Asserted)
        .map(|p| score(&FeatureVector::between(p.publication(), p.supplement(), match_cfg), weights))
        .collect::<Result<Vec<_>, _>>()?;
    ScoreInterval::from_scores(&scores, multiplier)
}

/// Retrofits each candidate whose score lies inside `interval`.
pub fn infer_supplement(
    candidates: &[CandidatePair],
    interval: &ScoreInterval,
    weights: &Weights,
    match_cfg: &MatchConfig,
) -> Result<Vec<Relation>, RetrofitError> {
    weights.validate()?;
    let mut out = Vec::new();
    for c in candidates {
        let fv = FeatureVector::between(&c.publication, &c.supplement, match_cfg);
        if interval.contains(score(&fv, weights)?) {
            out.push(Relation::inferred(&c.publication.id, &c.supplement.id, RetrofitRule::Interval));
        }
    }
    Ok(out)
}
