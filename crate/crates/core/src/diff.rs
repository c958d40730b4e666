//! Author-list alignment and classification of authorship variation events.
//!
//! A publication byline `A_p` and a supplement byline `A_d` are aligned
//! one-to-one. Unmatched supplement authors are additions, unmatched
//! publication authors are removals, and a shuffle is any inversion in the
//! relative order of the matched authors. Each event is a binary flag per
//! pair. Shuffles ignore position shifts caused by additions or removals
//! because only the relative order of matched authors is compared.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AuthorAlignment, AuthorList, AuthorMention, EventFlags, ExceptionKind, MatchMethod,
    MatchedAuthor, ShuffleAdjacency, SupplementPair, VariationAnnotation,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("fuzzy threshold must be in (0, 1], got {0}")]
    Threshold(f64),
    #[error("adjacency is only defined for shuffled alignments")]
    NotShuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub fuzzy_enabled: bool,
    /// Minimum normalized edit similarity for a fuzzy match.
    pub fuzzy_threshold: f64,
    /// Lowercase substrings marking a group rather than a person.
    pub group_patterns: Vec<String>,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            fuzzy_enabled: true,
            fuzzy_threshold: 0.90,
            group_patterns: ["team", "group", "consortium", "collaboration", "data curation"]
                .into_iter()
                .map(str::to_string)
                .collect(),
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), DiffError> {
        if !(self.fuzzy_threshold > 0.0 && self.fuzzy_threshold <= 1.0) {
            return Err(DiffError::Threshold(self.fuzzy_threshold));
        }
        Ok(())
    }

    pub fn is_group_name(&self, mention: &AuthorMention) -> bool {
        let name = mention.name_key();
        self.group_patterns
            .iter()
            .any(|pat| !pat.is_empty() && name.contains(pat.as_str()))
    }
}

/// `1 - levenshtein / max_len` over characters of the normalized names.
pub fn name_similarity(a: &str, b: &str) -> f64 {
    strsim::normalized_levenshtein(a, b)
}

// Two mentions carrying different ORCIDs are never the same person.
fn orcid_conflict(p: &AuthorMention, d: &AuthorMention) -> bool {
    matches!((p.orcid_key(), d.orcid_key()), (Some(a), Some(b)) if a != b)
}

/// Aligns two bylines in three passes: ORCID equality, normalized-name
/// equality, then (if enabled) greedy best-first fuzzy matching.
///
/// The exact passes walk `A_p` in position order and take the lowest-position
/// free candidate in `A_d`. The fuzzy pass ranks every free pair at or above
/// the threshold by similarity, breaking ties by publication position and
/// then supplement position.
pub fn match_author_sets(
    publication: &AuthorList,
    supplement: &AuthorList,
    cfg: &MatchConfig,
) -> AuthorAlignment {
    let ps = publication.mentions();
    let ds = supplement.mentions();
    let mut p_match: Vec<Option<(usize, MatchMethod, f64)>> = vec![None; ps.len()];
    let mut d_taken = vec![false; ds.len()];

    let p_orcids: Vec<Option<String>> = ps.iter().map(AuthorMention::orcid_key).collect();
    let d_orcids: Vec<Option<String>> = ds.iter().map(AuthorMention::orcid_key).collect();
    for (i, po) in p_orcids.iter().enumerate() {
        let Some(po) = po else { continue };
        if let Some(j) = (0..ds.len()).find(|&j| !d_taken[j] && d_orcids[j].as_ref() == Some(po)) {
            d_taken[j] = true;
            p_match[i] = Some((j, MatchMethod::Orcid, 1.0));
        }
    }

    for (i, p) in ps.iter().enumerate() {
        if p_match[i].is_some() {
            continue;
        }
        if let Some(j) = (0..ds.len()).find(|&j| {
            !d_taken[j] && ds[j].name_key() == p.name_key() && !orcid_conflict(p, &ds[j])
        }) {
            d_taken[j] = true;
            p_match[i] = Some((j, MatchMethod::Exact, 1.0));
        }
    }

    if cfg.fuzzy_enabled {
        let mut candidates = Vec::new();
        for (i, p) in ps.iter().enumerate() {
            if p_match[i].is_some() {
                continue;
            }
            for (j, d) in ds.iter().enumerate() {
                if d_taken[j] || orcid_conflict(p, d) {
                    continue;
                }
                let sim = name_similarity(p.name_key(), d.name_key());
                if sim >= cfg.fuzzy_threshold {
                    candidates.push((sim, i, j));
                }
            }
        }
        // Mentions are position-sorted, so index order is position order.
        candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        for (sim, i, j) in candidates {
            if p_match[i].is_none() && !d_taken[j] {
                d_taken[j] = true;
                p_match[i] = Some((j, MatchMethod::Fuzzy, sim));
            }
        }
    }

    let mut alignment = AuthorAlignment::default();
    for (i, m) in p_match.into_iter().enumerate() {
        match m {
            Some((j, method, score)) => alignment.matches.push(MatchedAuthor {
                p_mention: ps[i].clone(),
                d_mention: ds[j].clone(),
                method,
                score,
            }),
            None => alignment.removals.push(ps[i].clone()),
        }
    }
    alignment.additions = ds
        .iter()
        .zip(&d_taken)
        .filter(|(_, taken)| !**taken)
        .map(|(d, _)| d.clone())
        .collect();
    alignment
}

fn has_inversion(d_positions: &[u32]) -> bool {
    d_positions.windows(2).any(|w| w[0] > w[1])
}

/// Binary addition/removal/shuffle flags for an alignment.
pub fn detect_events(alignment: &AuthorAlignment) -> EventFlags {
    let d_order = alignment.d_positions_in_p_order();
    EventFlags {
        addition: !alignment.additions.is_empty(),
        removal: !alignment.removals.is_empty(),
        shuffle: d_order.len() > 1 && has_inversion(&d_order),
    }
}

/// Returns the reason a pair cannot be annotated, if any.
///
/// Checked in order: a supplement author that names a group, an empty
/// byline on either side, and two non-empty bylines with nothing in common.
pub fn classify_exception(
    pair: &SupplementPair,
    alignment: &AuthorAlignment,
    cfg: &MatchConfig,
) -> Option<ExceptionKind> {
    let (ap, ad) = (&pair.publication().authors, &pair.supplement().authors);
    if ad.iter().any(|m| cfg.is_group_name(m)) {
        Some(ExceptionKind::GroupAttribution)
    } else if ap.is_empty() || ad.is_empty() {
        Some(ExceptionKind::Other("empty author list".into()))
    } else if alignment.matches.is_empty() {
        Some(ExceptionKind::NullIntersection)
    } else {
        None
    }
}

/// Whether some inverted pair of matched authors sits more than one step
/// apart in the publication-ordered match sequence.
pub fn classify_shuffle_adjacency(
    alignment: &AuthorAlignment,
) -> Result<ShuffleAdjacency, DiffError> {
    let d_order = alignment.d_positions_in_p_order();
    if d_order.len() < 2 || !has_inversion(&d_order) {
        return Err(DiffError::NotShuffled);
    }
    // An inversion with gap > 1 exists iff some element is larger than an
    // element at least two places later; track the running prefix maximum.
    let mut prefix_max = d_order[0];
    for j in 2..d_order.len() {
        prefix_max = prefix_max.max(d_order[j - 2]);
        if prefix_max > d_order[j] {
            return Ok(ShuffleAdjacency::InvolvesNonAdjacent);
        }
    }
    Ok(ShuffleAdjacency::AdjacentOnly)
}

/// Full per-pair annotation: alignment, exception check, then events.
pub fn annotate(pair: &SupplementPair, cfg: &MatchConfig) -> (AuthorAlignment, VariationAnnotation) {
    let alignment = match_author_sets(&pair.publication().authors, &pair.supplement().authors, cfg);
    if let Some(exception) = classify_exception(pair, &alignment, cfg) {
        return (alignment, VariationAnnotation::excepted(exception));
    }
    let flags = detect_events(&alignment);
    let adjacency = flags
        .shuffle
        .then(|| classify_shuffle_adjacency(&alignment).expect("shuffle implies an inversion"));
    (alignment, VariationAnnotation::events(flags, adjacency))
}
