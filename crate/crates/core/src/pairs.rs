//! Selection of publication/supplement pairs and removal of pairs that are
//! artifacts of merged records sharing a generic title.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::Graph;
use crate::model::{ProductKind, Provenance, RelationSemantics, ResearchProduct, SupplementPair};
use crate::normalize::normalize_title;

/// Publications with at least one relation of any semantics, in either
/// direction, to a dataset or software.
pub fn select_linked_publications(graph: &Graph) -> BTreeSet<String> {
    let mut linked = BTreeSet::new();
    for rel in graph.relations() {
        let (Some(a), Some(b)) = (graph.product(&rel.source_id), graph.product(&rel.target_id))
        else {
            continue;
        };
        for (x, y) in [(a, b), (b, a)] {
            if x.kind == ProductKind::Publication && y.kind.is_supplement() {
                linked.insert(x.id.clone());
            }
        }
    }
    linked
}

/// Relations that could not become pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionDiagnostics {
    /// `(source, target)` of supplement relations with a missing endpoint.
    pub dangling: Vec<(String, String)>,
    /// Supplement relations whose endpoints are not one publication and one
    /// dataset/software.
    pub kind_mismatch: u64,
}

/// One pair per publication/supplement linked by `IsSupplementedBy`, in
/// either orientation. Sorted by publication id, then supplement id. A pair
/// is asserted if any relation producing it is asserted.
pub fn select_supplement_pairs(graph: &Graph) -> (Vec<SupplementPair>, SelectionDiagnostics) {
    let mut diagnostics = SelectionDiagnostics::default();
    let mut found: BTreeMap<(String, String), (Arc<ResearchProduct>, Arc<ResearchProduct>, Provenance)> =
        BTreeMap::new();
    for rel in graph.relations() {
        if rel.semantics != RelationSemantics::IsSupplementedBy {
            continue;
        }
        let (Some(a), Some(b)) = (graph.product(&rel.source_id), graph.product(&rel.target_id))
        else {
            diagnostics
                .dangling
                .push((rel.source_id.clone(), rel.target_id.clone()));
            continue;
        };
        let (p, d) = if a.kind == ProductKind::Publication && b.kind.is_supplement() {
            (a, b)
        } else if b.kind == ProductKind::Publication && a.kind.is_supplement() {
            (b, a)
        } else {
            diagnostics.kind_mismatch += 1;
            continue;
        };
        found
            .entry((p.id.clone(), d.id.clone()))
            .and_modify(|entry| entry.2 = entry.2.min(rel.provenance))
            .or_insert_with(|| (p.clone(), d.clone(), rel.provenance));
    }
    let pairs = found
        .into_values()
        .map(|(p, d, prov)| SupplementPair::new(p, d, prov).expect("kinds checked above"))
        .collect();
    (pairs, diagnostics)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoisePolicy {
    /// Normalized titles that are always treated as merged-record noise.
    pub generic_title_blocklist: BTreeSet<String>,
    pub fanin_threshold: usize,
    /// In characters of the normalized title.
    pub min_title_length: usize,
}

impl Default for NoisePolicy {
    fn default() -> Self {
        Self {
            generic_title_blocklist: [normalize_title("Index data")].into_iter().collect(),
            fanin_threshold: 5,
            min_title_length: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("fanin_threshold must be >= 2, got {0}")]
    FaninThreshold(usize),
    #[error("min_title_length must be positive")]
    MinTitleLength,
}

impl NoisePolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.fanin_threshold < 2 {
            return Err(PolicyError::FaninThreshold(self.fanin_threshold));
        }
        if self.min_title_length == 0 {
            return Err(PolicyError::MinTitleLength);
        }
        Ok(())
    }

    /// Replaces the blocklist with entries read from `reader`: one title per
    /// line, `#` starts a comment, entries are normalized on load.
    pub fn load_blocklist<R: BufRead>(&mut self, reader: R) -> std::io::Result<()> {
        let mut list = BTreeSet::new();
        for line in reader.lines() {
            let line = line?;
            let entry = line.split('#').next().unwrap_or_default();
            let title = normalize_title(entry);
            if !title.is_empty() {
                list.insert(title);
            }
        }
        self.generic_title_blocklist = list;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseReason {
    BlocklistedTitle,
    GenericTitleFanin,
}

impl NoiseReason {
    pub fn as_str(self) -> &'static str {
        match self {
            NoiseReason::BlocklistedTitle => "blocklisted_title",
            NoiseReason::GenericTitleFanin => "generic_title_fanin",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlaggedPair {
    pub pair: SupplementPair,
    pub reason: NoiseReason,
    pub fanin: usize,
}

/// Splits `pairs` into kept and flagged. A pair is flagged when its
/// supplement title is blocklisted, or when the title is shorter than
/// `min_title_length` and at least `fanin_threshold` distinct publications
/// point at the supplement. Input order is preserved on both sides.
pub fn detect_dedup_noise(
    pairs: Vec<SupplementPair>,
    policy: &NoisePolicy,
) -> (Vec<SupplementPair>, Vec<FlaggedPair>) {
    let mut fanin: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for pair in &pairs {
        fanin
            .entry(pair.supplement().id.as_str())
            .or_default()
            .insert(pair.publication().id.as_str());
    }
    let fanin: HashMap<String, usize> = fanin
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.len()))
        .collect();

    let mut kept = Vec::new();
    let mut flagged = Vec::new();
    for pair in pairs {
        let title = normalize_title(&pair.supplement().title);
        let n = fanin[&pair.supplement().id];
        let reason = if policy.generic_title_blocklist.contains(&title) {
            Some(NoiseReason::BlocklistedTitle)
        } else if title.chars().count() < policy.min_title_length && n >= policy.fanin_threshold {
            Some(NoiseReason::GenericTitleFanin)
        } else {
            None
        };
        match reason {
            Some(reason) => flagged.push(FlaggedPair {
                pair,
                reason,
                fanin: n,
            }),
            None => kept.push(pair),
        }
    }
    (kept, flagged)
}

/// Writes flagged pairs as CSV: `publication_id,supplement_id,reason,fanin`.
pub fn write_flagged_csv<W: Write>(writer: W, flagged: &[FlaggedPair]) -> csv::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(writer);
    out.write_record(["publication_id", "supplement_id", "reason", "fanin"])?;
    for f in flagged {
        let (p, d) = f.pair.key();
        out.write_record([p, d, f.reason.as_str(), &f.fanin.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
