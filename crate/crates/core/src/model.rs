//! Domain types shared by every stage of the pipeline.
//!
//! Everything here is immutable once constructed. Constructors validate the
//! invariants; deserialization goes through the same constructors so a
//! decoded value is never weaker than a built one.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::{normalize_name, normalize_orcid};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("author position must be >= 1")]
    ZeroPosition,
    #[error("author name is empty")]
    EmptyName,
    #[error("duplicate author position {0}")]
    DuplicatePosition(u32),
    #[error("supplement {id} has kind {kind}, expected dataset or software")]
    SupplementKind { id: String, kind: ProductKind },
    #[error("publication {id} has kind {kind}, expected publication")]
    PublicationKind { id: String, kind: ProductKind },
    #[error("product id is empty")]
    EmptyId,
}

/// One author in a byline.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawMention")]
pub struct AuthorMention {
    position: u32,
    full_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orcid: Option<String>,
    #[serde(skip)]
    key: String,
}

#[derive(Deserialize)]
struct RawMention {
    position: u32,
    full_name: String,
    #[serde(default)]
    orcid: Option<String>,
}

impl TryFrom<RawMention> for AuthorMention {
    type Error = ModelError;

    fn try_from(raw: RawMention) -> Result<Self, Self::Error> {
        AuthorMention::new(raw.position, raw.full_name, raw.orcid)
    }
}

impl AuthorMention {
    pub fn new(
        position: u32,
        full_name: impl Into<String>,
        orcid: Option<String>,
    ) -> Result<Self, ModelError> {
        let full_name = full_name.into();
        if position == 0 {
            return Err(ModelError::ZeroPosition);
        }
        let trimmed = full_name.trim();
        if trimmed.is_empty() {
            return Err(ModelError::EmptyName);
        }
        // Names made only of stripped punctuation still need a comparable key.
        let key = normalize_name(trimmed).unwrap_or_else(|_| trimmed.to_lowercase());
        let orcid = orcid
            .as_deref()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string);
        Ok(Self {
            position,
            full_name,
            orcid,
            key,
        })
    }

    pub fn position(&self) -> u32 {
        self.position
    }

    pub fn full_name(&self) -> &str {
        &self.full_name
    }

    pub fn orcid(&self) -> Option<&str> {
        self.orcid.as_deref()
    }

    /// ORCID reduced to its bare `0000-0000-0000-000X` form, if present.
    pub fn orcid_key(&self) -> Option<String> {
        self.orcid.as_deref().and_then(normalize_orcid)
    }

    /// Normalized name used for matching.
    pub fn name_key(&self) -> &str {
        &self.key
    }
}

/// A byline: mentions with unique positions, kept in ascending position order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<AuthorMention>", into = "Vec<AuthorMention>")]
pub struct AuthorList {
    mentions: Vec<AuthorMention>,
}

impl AuthorList {
    /// Builds a list from mentions in any order.
    ///
    /// Exact `(position, full_name)` repeats collapse into one mention; two
    /// different mentions claiming the same position are rejected.
    pub fn new(mentions: impl IntoIterator<Item = AuthorMention>) -> Result<Self, ModelError> {
        let mut seen: HashSet<(u32, String)> = HashSet::new();
        let mut mentions: Vec<AuthorMention> = mentions
            .into_iter()
            .filter(|m| seen.insert((m.position, m.full_name.clone())))
            .collect();
        mentions.sort_by_key(|m| m.position);
        if let Some(w) = mentions.windows(2).find(|w| w[0].position == w[1].position) {
            return Err(ModelError::DuplicatePosition(w[0].position));
        }
        Ok(Self { mentions })
    }

    /// Convenience for `(position, name)` tuples without ORCIDs.
    pub fn from_names<S: Into<String>>(
        entries: impl IntoIterator<Item = (u32, S)>,
    ) -> Result<Self, ModelError> {
        let mentions = entries
            .into_iter()
            .map(|(pos, name)| AuthorMention::new(pos, name, None))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(mentions)
    }

    pub fn mentions(&self) -> &[AuthorMention] {
        &self.mentions
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AuthorMention> {
        self.mentions.iter()
    }

    pub fn len(&self) -> usize {
        self.mentions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mentions.is_empty()
    }
}

impl TryFrom<Vec<AuthorMention>> for AuthorList {
    type Error = ModelError;

    fn try_from(value: Vec<AuthorMention>) -> Result<Self, Self::Error> {
        AuthorList::new(value)
    }
}

impl From<AuthorList> for Vec<AuthorMention> {
    fn from(value: AuthorList) -> Self {
        value.mentions
    }
}

impl<'a> IntoIterator for &'a AuthorList {
    type Item = &'a AuthorMention;
    type IntoIter = std::slice::Iter<'a, AuthorMention>;

    fn into_iter(self) -> Self::IntoIter {
        self.mentions.iter()
    }
}

/// Kind of research product. `Dataset` is the umbrella for data files,
/// figures and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    Publication,
    Dataset,
    Software,
}

impl ProductKind {
    pub fn is_supplement(self) -> bool {
        matches!(self, ProductKind::Dataset | ProductKind::Software)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ProductKind::Publication => "publication",
            ProductKind::Dataset => "dataset",
            ProductKind::Software => "software",
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResearchProduct {
    pub id: String,
    pub kind: ProductKind,
    pub title: String,
    pub authors: AuthorList,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub subjects: BTreeSet<String>,
}

impl ResearchProduct {
    pub fn new(
        id: impl Into<String>,
        kind: ProductKind,
        title: impl Into<String>,
        authors: AuthorList,
    ) -> Result<Self, ModelError> {
        let id = id.into();
        if id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        Ok(Self {
            id,
            kind,
            title: title.into(),
            authors,
            date: None,
            subjects: BTreeSet::new(),
        })
    }

    pub fn with_date(mut self, date: NaiveDate) -> Self {
        self.date = Some(date);
        self
    }

    pub fn with_subjects<S: Into<String>>(mut self, subjects: impl IntoIterator<Item = S>) -> Self {
        self.subjects = subjects.into_iter().map(Into::into).collect();
        self
    }
}

/// Relation semantics. Labels outside the three known ones are kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationSemantics {
    IsSupplementedBy,
    Cites,
    References,
    Other(String),
}

impl RelationSemantics {
    /// Known labels are recognised case-insensitively.
    pub fn from_label(label: &str) -> Self {
        let trimmed = label.trim();
        if trimmed.eq_ignore_ascii_case("IsSupplementedBy") {
            RelationSemantics::IsSupplementedBy
        } else if trimmed.eq_ignore_ascii_case("Cites") {
            RelationSemantics::Cites
        } else if trimmed.eq_ignore_ascii_case("References") {
            RelationSemantics::References
        } else {
            RelationSemantics::Other(label.to_string())
        }
    }

    pub fn label(&self) -> &str {
        match self {
            RelationSemantics::IsSupplementedBy => "IsSupplementedBy",
            RelationSemantics::Cites => "Cites",
            RelationSemantics::References => "References",
            RelationSemantics::Other(label) => label,
        }
    }

    /// `Cites` or `References`, the candidates for retrofitting.
    pub fn is_vanilla(&self) -> bool {
        matches!(self, RelationSemantics::Cites | RelationSemantics::References)
    }
}

impl fmt::Display for RelationSemantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for RelationSemantics {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for RelationSemantics {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let label = String::deserialize(deserializer)?;
        Ok(RelationSemantics::from_label(&label))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Asserted,
    Inferred,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Asserted => "asserted",
            Provenance::Inferred => "inferred",
        }
    }
}

/// Which retrofit heuristic produced an inferred relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RetrofitRule {
    #[serde(rename = "date-author")]
    DateAuthor,
    #[serde(rename = "interval")]
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    #[serde(rename = "source")]
    pub source_id: String,
    #[serde(rename = "target")]
    pub target_id: String,
    #[serde(rename = "reltype")]
    pub semantics: RelationSemantics,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<RetrofitRule>,
}

impl Relation {
    pub fn asserted(
        source_id: impl Into<String>,
        target_id: impl Into<String>,
        semantics: RelationSemantics,
    ) -> Self {
        Self {
            source_id: source_id.into(),
            target_id: target_id.into(),
            semantics,
            provenance: Provenance::Asserted,
            rule: None,
        }
    }

    pub fn inferred(
        publication_id: impl Into<String>,
        supplement_id: impl Into<String>,
        rule: RetrofitRule,
    ) -> Self {
        Self {
            source_id: publication_id.into(),
            target_id: supplement_id.into(),
            semantics: RelationSemantics::IsSupplementedBy,
            provenance: Provenance::Inferred,
            rule: Some(rule),
        }
    }
}

/// A publication and one of its supplementary datasets or software.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawPair")]
pub struct SupplementPair {
    publication: Arc<ResearchProduct>,
    supplement: Arc<ResearchProduct>,
    provenance: Provenance,
}

#[derive(Deserialize)]
struct RawPair {
    publication: Arc<ResearchProduct>,
    supplement: Arc<ResearchProduct>,
    provenance: Provenance,
}

impl TryFrom<RawPair> for SupplementPair {
    type Error = ModelError;

    fn try_from(raw: RawPair) -> Result<Self, Self::Error> {
        SupplementPair::new(raw.publication, raw.supplement, raw.provenance)
    }
}

impl SupplementPair {
    pub fn new(
        publication: Arc<ResearchProduct>,
        supplement: Arc<ResearchProduct>,
        provenance: Provenance,
    ) -> Result<Self, ModelError> {
        if publication.kind != ProductKind::Publication {
            return Err(ModelError::PublicationKind {
                id: publication.id.clone(),
                kind: publication.kind,
            });
        }
        if !supplement.kind.is_supplement() {
            return Err(ModelError::SupplementKind {
                id: supplement.id.clone(),
                kind: supplement.kind,
            });
        }
        Ok(Self {
            publication,
            supplement,
            provenance,
        })
    }

    pub fn publication(&self) -> &ResearchProduct {
        &self.publication
    }

    pub fn supplement(&self) -> &ResearchProduct {
        &self.supplement
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn supplement_kind(&self) -> ProductKind {
        self.supplement.kind
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.publication.id, &self.supplement.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMethod {
    Orcid,
    Exact,
    Fuzzy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedAuthor {
    pub p_mention: AuthorMention,
    pub d_mention: AuthorMention,
    pub method: MatchMethod,
    /// 1.0 for ORCID and exact matches, the name similarity for fuzzy ones.
    pub score: f64,
}

/// One-to-one alignment of a publication byline against a supplement byline.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuthorAlignment {
    /// Ordered by publication position.
    pub matches: Vec<MatchedAuthor>,
    /// Supplement mentions with no counterpart, by position.
    pub additions: Vec<AuthorMention>,
    /// Publication mentions with no counterpart, by position.
    pub removals: Vec<AuthorMention>,
}

impl AuthorAlignment {
    /// Supplement positions of the matches, read in publication order.
    pub fn d_positions_in_p_order(&self) -> Vec<u32> {
        self.matches.iter().map(|m| m.d_mention.position()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "class", content = "reason", rename_all = "snake_case")]
pub enum ExceptionKind {
    GroupAttribution,
    NullIntersection,
    Other(String),
}

impl fmt::Display for ExceptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExceptionKind::GroupAttribution => f.write_str("group_attribution"),
            ExceptionKind::NullIntersection => f.write_str("null_intersection"),
            ExceptionKind::Other(reason) => write!(f, "other: {reason}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShuffleAdjacency {
    AdjacentOnly,
    InvolvesNonAdjacent,
}

impl ShuffleAdjacency {
    pub fn as_str(self) -> &'static str {
        match self {
            ShuffleAdjacency::AdjacentOnly => "adjacent_only",
            ShuffleAdjacency::InvolvesNonAdjacent => "involves_non_adjacent",
        }
    }
}

/// Binary event flags for one pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventFlags {
    pub addition: bool,
    pub removal: bool,
    pub shuffle: bool,
}

impl EventFlags {
    pub fn any(self) -> bool {
        self.addition || self.removal || self.shuffle
    }

    pub fn count(self) -> u32 {
        u32::from(self.addition) + u32::from(self.removal) + u32::from(self.shuffle)
    }
}

/// Annotation of one pair: event flags, or an exception that suppresses them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariationAnnotation {
    pub addition: bool,
    pub removal: bool,
    pub shuffle: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exception: Option<ExceptionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_adjacency: Option<ShuffleAdjacency>,
}

impl VariationAnnotation {
    pub fn excepted(kind: ExceptionKind) -> Self {
        Self {
            exception: Some(kind),
            ..Self::default()
        }
    }

    pub fn events(
        flags: EventFlags,
        shuffle_adjacency: Option<ShuffleAdjacency>,
    ) -> Self {
        debug_assert_eq!(flags.shuffle, shuffle_adjacency.is_some());
        Self {
            addition: flags.addition,
            removal: flags.removal,
            shuffle: flags.shuffle,
            exception: None,
            shuffle_adjacency,
        }
    }

    pub fn flags(&self) -> EventFlags {
        EventFlags {
            addition: self.addition,
            removal: self.removal,
            shuffle: self.shuffle,
        }
    }

    pub fn is_varied(&self) -> bool {
        self.flags().any()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn product(id: &str, kind: ProductKind) -> Arc<ResearchProduct> {
        Arc::new(ResearchProduct::new(id, kind, "t", AuthorList::default()).unwrap())
    }

    #[test]
    fn author_list_sorts_by_position() {
        let list = AuthorList::from_names([(3, "c"), (1, "a"), (2, "b")]).unwrap();
        let positions: Vec<u32> = list.iter().map(|m| m.position()).collect();
        assert_eq!(positions, vec![1, 2, 3]);
    }

    #[test]
    fn duplicate_positions_rejected() {
        let err = AuthorList::from_names([(1, "a"), (1, "b")]).unwrap_err();
        assert_eq!(err, ModelError::DuplicatePosition(1));
    }

    #[test]
    fn exact_repeats_collapse() {
        let list = AuthorList::from_names([(1, "a"), (1, "a"), (2, "b")]).unwrap();
        assert_eq!(list.len(), 2);
    }

    #[test]
    fn mention_invariants() {
        assert_eq!(
            AuthorMention::new(0, "a", None).unwrap_err(),
            ModelError::ZeroPosition
        );
        assert_eq!(
            AuthorMention::new(1, "   ", None).unwrap_err(),
            ModelError::EmptyName
        );
        let m = AuthorMention::new(1, "Lovelace, Ada", Some(" ".into())).unwrap();
        assert_eq!(m.name_key(), "ada lovelace");
        assert_eq!(m.orcid(), None);
    }

    #[test]
    fn supplement_must_not_be_publication() {
        let p = product("p", ProductKind::Publication);
        let q = product("q", ProductKind::Publication);
        assert!(matches!(
            SupplementPair::new(p.clone(), q, Provenance::Asserted),
            Err(ModelError::SupplementKind { .. })
        ));
        let d = product("d", ProductKind::Software);
        assert!(SupplementPair::new(p, d, Provenance::Asserted).is_ok());
    }

    #[test]
    fn semantics_labels() {
        assert_eq!(
            RelationSemantics::from_label("isSupplementedBy"),
            RelationSemantics::IsSupplementedBy
        );
        assert_eq!(
            RelationSemantics::from_label("HasVersion"),
            RelationSemantics::Other("HasVersion".into())
        );
    }

    #[test]
    fn decoding_enforces_invariants() {
        let bad = r#"[{"position":1,"full_name":"a"},{"position":1,"full_name":"b"}]"#;
        assert!(serde_json::from_str::<AuthorList>(bad).is_err());
        let zero = r#"{"position":0,"full_name":"a"}"#;
        assert!(serde_json::from_str::<AuthorMention>(zero).is_err());
    }
}
