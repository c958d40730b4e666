//! Aggregate statistics over annotated pairs and their export.
//!
//! A [`ReportSummary`] is derived entirely from four raw tallies (pair count,
//! event-combination counts, exception counts, non-adjacent shuffles); every
//! other field is recomputed from them, so summaries merge by adding tallies.

use std::fs;
use std::io::{BufRead, Write};
use std::ops::Add;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ExceptionKind, MatchMethod, ProductKind, Provenance, ShuffleAdjacency, SupplementPair,
    VariationAnnotation,
};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("line {line}: {source}")]
    Decode {
        line: u64,
        #[source]
        source: serde_json::Error,
    },
    #[error("summary invariant violated: {0}")]
    Invariant(String),
}

/// Percentage of `num` over `den`, rounded half-up to two decimals.
/// Zero denominators give 0.
pub fn percent(num: u64, den: u64) -> f64 {
    if den == 0 {
        return 0.0;
    }
    let hundredths = (u128::from(num) * 20_000 + u128::from(den)) / (2 * u128::from(den));
    hundredths as f64 / 100.0
}

/// One annotated pair as written to `annotations.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairRecord {
    pub publication_id: String,
    pub supplement_id: String,
    pub kind: ProductKind,
    pub provenance: Provenance,
    #[serde(flatten)]
    pub annotation: VariationAnnotation,
    /// Distinct methods used by the alignment's matches.
    #[serde(default)]
    pub match_methods: Vec<MatchMethod>,
}

impl PairRecord {
    pub fn new(
        pair: &SupplementPair,
        annotation: VariationAnnotation,
        methods: impl IntoIterator<Item = MatchMethod>,
    ) -> Self {
        let mut match_methods: Vec<MatchMethod> = methods.into_iter().collect();
        match_methods.sort();
        match_methods.dedup();
        Self {
            publication_id: pair.publication().id.clone(),
            supplement_id: pair.supplement().id.clone(),
            kind: pair.supplement_kind(),
            provenance: pair.provenance(),
            annotation,
            match_methods,
        }
    }
}

pub fn write_pair_records<W: Write>(mut writer: W, records: &[PairRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut writer, r)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()
}

pub fn read_pair_records<R: BufRead>(reader: R) -> Result<Vec<PairRecord>, ReportError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| ReportError::Io {
            path: PathBuf::from("<annotations>"),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| ReportError::Decode {
            line: i as u64 + 1,
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}

/// The seven non-empty combinations of addition (A), removal (R), shuffle (S).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combo {
    A,
    R,
    S,
    AR,
    AS,
    RS,
    ARS,
}

impl Combo {
    pub const ALL: [Combo; 7] = [
        Combo::A,
        Combo::R,
        Combo::S,
        Combo::AR,
        Combo::AS,
        Combo::RS,
        Combo::ARS,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Combo::A => "A",
            Combo::R => "R",
            Combo::S => "S",
            Combo::AR => "A+R",
            Combo::AS => "A+S",
            Combo::RS => "R+S",
            Combo::ARS => "A+R+S",
        }
    }

    pub fn from_flags(addition: bool, removal: bool, shuffle: bool) -> Option<Combo> {
        match (addition, removal, shuffle) {
            (false, false, false) => None,
            (true, false, false) => Some(Combo::A),
            (false, true, false) => Some(Combo::R),
            (false, false, true) => Some(Combo::S),
            (true, true, false) => Some(Combo::AR),
            (true, false, true) => Some(Combo::AS),
            (false, true, true) => Some(Combo::RS),
            (true, true, true) => Some(Combo::ARS),
        }
    }

    /// `(addition, removal, shuffle)` membership.
    pub fn flags(self) -> (bool, bool, bool) {
        match self {
            Combo::A => (true, false, false),
            Combo::R => (false, true, false),
            Combo::S => (false, false, true),
            Combo::AR => (true, true, false),
            Combo::AS => (true, false, true),
            Combo::RS => (false, true, true),
            Combo::ARS => (true, true, true),
        }
    }

    pub fn size(self) -> u64 {
        let (a, r, s) = self.flags();
        u64::from(a) + u64::from(r) + u64::from(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComboCounts {
    #[serde(rename = "A")]
    pub a: u64,
    #[serde(rename = "R")]
    pub r: u64,
    #[serde(rename = "S")]
    pub s: u64,
    #[serde(rename = "A+R")]
    pub ar: u64,
    #[serde(rename = "A+S")]
    pub as_: u64,
    #[serde(rename = "R+S")]
    pub rs: u64,
    #[serde(rename = "A+R+S")]
    pub ars: u64,
}

impl ComboCounts {
    pub fn get(&self, combo: Combo) -> u64 {
        match combo {
            Combo::A => self.a,
            Combo::R => self.r,
            Combo::S => self.s,
            Combo::AR => self.ar,
            Combo::AS => self.as_,
            Combo::RS => self.rs,
            Combo::ARS => self.ars,
        }
    }

    pub fn get_mut(&mut self, combo: Combo) -> &mut u64 {
        match combo {
            Combo::A => &mut self.a,
            Combo::R => &mut self.r,
            Combo::S => &mut self.s,
            Combo::AR => &mut self.ar,
            Combo::AS => &mut self.as_,
            Combo::RS => &mut self.rs,
            Combo::ARS => &mut self.ars,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Combo, u64)> + '_ {
        Combo::ALL.into_iter().map(|c| (c, self.get(c)))
    }

    pub fn total(&self) -> u64 {
        self.iter().map(|(_, n)| n).sum()
    }
}

impl Add for ComboCounts {
    type Output = ComboCounts;

    fn add(mut self, rhs: ComboCounts) -> ComboCounts {
        for c in Combo::ALL {
            *self.get_mut(c) += rhs.get(c);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionCounts {
    pub group_attribution: u64,
    pub null_intersection: u64,
    pub other: u64,
}

impl ExceptionCounts {
    pub fn total(&self) -> u64 {
        self.group_attribution + self.null_intersection + self.other
    }
}

impl Add for ExceptionCounts {
    type Output = ExceptionCounts;

    fn add(self, rhs: ExceptionCounts) -> ExceptionCounts {
        ExceptionCounts {
            group_attribution: self.group_attribution + rhs.group_attribution,
            null_intersection: self.null_intersection + rhs.null_intersection,
            other: self.other + rhs.other,
        }
    }
}

/// The raw tallies a summary is computed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tallies {
    pub total_pairs: u64,
    pub combos: ComboCounts,
    pub exceptions: ExceptionCounts,
    pub shuffle_nonadjacent: u64,
}

impl Tallies {
    pub fn of(annotation: &VariationAnnotation) -> Self {
        let mut t = Tallies {
            total_pairs: 1,
            ..Tallies::default()
        };
        if let Some(c) = Combo::from_flags(annotation.addition, annotation.removal, annotation.shuffle) {
            *t.combos.get_mut(c) += 1;
        }
        match &annotation.exception {
            Some(ExceptionKind::GroupAttribution) => t.exceptions.group_attribution += 1,
            Some(ExceptionKind::NullIntersection) => t.exceptions.null_intersection += 1,
            Some(ExceptionKind::Other(_)) => t.exceptions.other += 1,
            None => {}
        }
        if annotation.shuffle_adjacency == Some(ShuffleAdjacency::InvolvesNonAdjacent) {
            t.shuffle_nonadjacent += 1;
        }
        t
    }
}

impl Add for Tallies {
    type Output = Tallies;

    fn add(self, rhs: Tallies) -> Tallies {
        Tallies {
            total_pairs: self.total_pairs + rhs.total_pairs,
            combos: self.combos + rhs.combos,
            exceptions: self.exceptions + rhs.exceptions,
            shuffle_nonadjacent: self.shuffle_nonadjacent + rhs.shuffle_nonadjacent,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryKind {
    Dataset,
    Software,
    Combined,
}

/// Which pairs [`summarize`] looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindFilter {
    Dataset,
    Software,
    All,
}

impl KindFilter {
    fn admits(self, kind: ProductKind) -> bool {
        match self {
            KindFilter::Dataset => kind == ProductKind::Dataset,
            KindFilter::Software => kind == ProductKind::Software,
            KindFilter::All => true,
        }
    }

    fn summary_kind(self) -> SummaryKind {
        match self {
            KindFilter::Dataset => SummaryKind::Dataset,
            KindFilter::Software => SummaryKind::Software,
            KindFilter::All => SummaryKind::Combined,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub addition: u64,
    pub removal: u64,
    pub shuffle: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EventPercents {
    pub addition: f64,
    pub removal: f64,
    pub shuffle: f64,
}

/// Aggregate statistics. Pair percentages use total pairs as the base,
/// event percentages use total events, the multi-event percentage uses
/// varied pairs and the non-adjacent percentage uses shuffles. Excepted
/// pairs count as unvaried.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub kind: SummaryKind,
    pub total_pairs: u64,
    pub varied_pairs: u64,
    pub varied_pct: f64,
    pub unvaried_pairs: u64,
    pub unvaried_pct: f64,
    pub event_counts: EventCounts,
    pub event_pcts: EventPercents,
    pub combo_counts: ComboCounts,
    pub multi_event_pairs: u64,
    pub multi_event_pct: f64,
    pub exception_counts: ExceptionCounts,
    pub shuffle_nonadjacent_count: u64,
    pub shuffle_nonadjacent_pct: f64,
}

impl ReportSummary {
    pub fn empty(kind: SummaryKind) -> Self {
        Self::from_tallies(kind, Tallies::default())
    }

    /// # Panics
    /// If the tallies are inconsistent: more varied or excepted pairs than
    /// pairs, or more non-adjacent shuffles than shuffles.
    pub fn from_tallies(kind: SummaryKind, t: Tallies) -> Self {
        let combos = t.combos;
        let varied = combos.total();
        let count = |pick: fn((bool, bool, bool)) -> bool| -> u64 {
            combos.iter().filter(|(c, _)| pick(c.flags())).map(|(_, n)| n).sum()
        };
        let addition = count(|f| f.0);
        let removal = count(|f| f.1);
        let shuffle = count(|f| f.2);
        let total_events = addition + removal + shuffle;
        let multi = combos.iter().filter(|(c, _)| c.size() >= 2).map(|(_, n)| n).sum();
        assert!(
            varied + t.exceptions.total() <= t.total_pairs,
            "varied ({varied}) + excepted ({}) exceed total ({})",
            t.exceptions.total(),
            t.total_pairs
        );
        assert!(t.shuffle_nonadjacent <= shuffle, "non-adjacent shuffles exceed shuffles");
        let unvaried = t.total_pairs - varied;
        Self {
            kind,
            total_pairs: t.total_pairs,
            varied_pairs: varied,
            varied_pct: percent(varied, t.total_pairs),
            unvaried_pairs: unvaried,
            unvaried_pct: percent(unvaried, t.total_pairs),
            event_counts: EventCounts {
                addition,
                removal,
                shuffle,
                total: total_events,
            },
            event_pcts: EventPercents {
                addition: percent(addition, total_events),
                removal: percent(removal, total_events),
                shuffle: percent(shuffle, total_events),
            },
            combo_counts: combos,
            multi_event_pairs: multi,
            multi_event_pct: percent(multi, varied),
            exception_counts: t.exceptions,
            shuffle_nonadjacent_count: t.shuffle_nonadjacent,
            shuffle_nonadjacent_pct: percent(t.shuffle_nonadjacent, shuffle),
        }
    }

    pub fn tallies(&self) -> Tallies {
        Tallies {
            total_pairs: self.total_pairs,
            combos: self.combo_counts,
            exceptions: self.exception_counts,
            shuffle_nonadjacent: self.shuffle_nonadjacent_count,
        }
    }

    /// Sums the tallies of two summaries over disjoint pair sets. Differing
    /// kinds merge to `Combined`.
    pub fn merge(&self, other: &ReportSummary) -> ReportSummary {
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            SummaryKind::Combined
        };
        Self::from_tallies(kind, self.tallies() + other.tallies())
    }

    /// Re-derives every computed field from the tallies and compares.
    pub fn check_invariants(&self) -> Result<(), ReportError> {
        if self.combo_counts.total() != self.varied_pairs {
            return Err(ReportError::Invariant(format!(
                "combo counts sum to {}, varied pairs is {}",
                self.combo_counts.total(),
                self.varied_pairs
            )));
        }
        if self.varied_pairs + self.unvaried_pairs != self.total_pairs {
            return Err(ReportError::Invariant("varied + unvaried != total".into()));
        }
        let rebuilt = Self::from_tallies(self.kind, self.tallies());
        if &rebuilt != self {
            return Err(ReportError::Invariant(
                "derived fields disagree with tallies".into(),
            ));
        }
        Ok(())
    }

    /// `varied/total (pct%)`.
    pub fn headline(&self) -> String {
        format!(
            "{}/{} ({:.2}%)",
            self.varied_pairs, self.total_pairs, self.varied_pct
        )
    }
}

/// Summarizes the records admitted by `filter`. Runs as a parallel fold.
pub fn summarize(records: &[PairRecord], filter: KindFilter) -> ReportSummary {
    let tallies = records
        .par_iter()
        .filter(|r| filter.admits(r.kind))
        .map(|r| Tallies::of(&r.annotation))
        .reduce(Tallies::default, |a, b| a + b);
    ReportSummary::from_tallies(filter.summary_kind(), tallies)
}

/// Dataset, software and combined summaries of one annotation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub dataset: ReportSummary,
    pub software: ReportSummary,
    pub combined: ReportSummary,
}

impl ReportBundle {
    pub fn from_records(records: &[PairRecord]) -> Self {
        let dataset = summarize(records, KindFilter::Dataset);
        let software = summarize(records, KindFilter::Software);
        let combined = dataset.merge(&software);
        Self {
            dataset,
            software,
            combined,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    Json,
    Csv,
    #[default]
    Both,
}

impl ExportFormat {
    fn json(self) -> bool {
        matches!(self, ExportFormat::Json | ExportFormat::Both)
    }

    fn csv(self) -> bool {
        matches!(self, ExportFormat::Csv | ExportFormat::Both)
    }
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const PAIRS_FILE: &str = "pairs.csv";
pub const COMBOS_FILE: &str = "combos.csv";

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ReportError> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .map_err(|source| ReportError::Csv {
            path: path.to_path_buf(),
            source,
        })
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Renders the summary as pretty JSON with a trailing newline.
pub fn summary_json(summary: &ReportSummary) -> String {
    let mut text = serde_json::to_string_pretty(summary).expect("summary serializes");
    text.push('\n');
    text
}

/// Writes `summary.json`, `pairs.csv` and `combos.csv` (per `format`) into
/// `out_dir` and returns the paths written.
pub fn export(
    summary: &ReportSummary,
    records: &[PairRecord],
    out_dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, ReportError> {
    summary.check_invariants()?;
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| ReportError::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    if format.json() {
        let path = out_dir.join(SUMMARY_FILE);
        fs::write(&path, summary_json(summary)).map_err(io_err(&path))?;
        written.push(path);
    }

    if format.csv() {
        let path = out_dir.join(PAIRS_FILE);
        let csv_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| ReportError::Csv { path, source }
        };
        let mut w = csv_writer(&path)?;
        w.write_record([
            "publication_id",
            "supplement_id",
            "kind",
            "provenance",
            "addition",
            "removal",
            "shuffle",
            "exception",
            "adjacency",
            "match_methods",
        ])
        .map_err(csv_err(&path))?;
        for r in records {
            let a = &r.annotation;
            let exception = a.exception.as_ref().map(ToString::to_string).unwrap_or_default();
            let adjacency = a.shuffle_adjacency.map(ShuffleAdjacency::as_str).unwrap_or_default();
            let methods = r
                .match_methods
                .iter()
                .map(|m| match m {
                    MatchMethod::Orcid => "orcid",
                    MatchMethod::Exact => "exact",
                    MatchMethod::Fuzzy => "fuzzy",
                })
                .collect::<Vec<_>>()
                .join(";");
            w.write_record([
                r.publication_id.as_str(),
                r.supplement_id.as_str(),
                r.kind.as_str(),
                r.provenance.as_str(),
                flag(a.addition),
                flag(a.removal),
                flag(a.shuffle),
                &exception,
                adjacency,
                &methods,
            ])
            .map_err(csv_err(&path))?;
        }
        w.flush().map_err(io_err(&path))?;
        written.push(path);

        let path = out_dir.join(COMBOS_FILE);
        write_combos(&path, summary)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes the combined summary through [`export`], then per-kind
/// `summary_<kind>.json` and `combos_<kind>.csv` sidecars.
pub fn export_bundle(
    bundle: &ReportBundle,
    records: &[PairRecord],
    out_dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>, ReportError> {
    let mut written = export(&bundle.combined, records, out_dir, format)?;
    for (name, summary) in [("dataset", &bundle.dataset), ("software", &bundle.software)] {
        summary.check_invariants()?;
        if format.json() {
            let path = out_dir.join(format!("summary_{name}.json"));
            fs::write(&path, summary_json(summary)).map_err(|source| ReportError::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        if format.csv() {
            let path = out_dir.join(format!("combos_{name}.csv"));
            write_combos(&path, summary)?;
            written.push(path);
        }
    }
    Ok(written)
}

fn write_combos(path: &Path, summary: &ReportSummary) -> Result<(), ReportError> {
    let csv_err = |source| ReportError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    w.write_record(["combo", "count"]).map_err(csv_err)?;
    for (combo, n) in summary.combo_counts.iter() {
        w.write_record([combo.label(), &n.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn record(kind: ProductKind, a: bool, r: bool, s: bool) -> PairRecord {
        let adjacency = s.then_some(ShuffleAdjacency::AdjacentOnly);
        PairRecord {
            publication_id: "p".into(),
            supplement_id: "d".into(),
            kind,
            provenance: Provenance::Asserted,
            annotation: VariationAnnotation::events(
                crate::model::EventFlags {
                    addition: a,
                    removal: r,
                    shuffle: s,
                },
                adjacency,
            ),
            match_methods: vec![],
        }
    }

    #[test]
    fn percent_rounds_half_up() {
        assert_eq!(percent(1, 8), 12.5);
        assert_eq!(percent(1, 3), 33.33);
        assert_eq!(percent(2, 3), 66.67);
        assert_eq!(percent(1, 800), 0.13);
        assert_eq!(percent(683, 3052), 22.38);
        assert_eq!(percent(5, 0), 0.0);
    }

    #[test]
    fn four_pair_fixture() {
        let records = [
            record(ProductKind::Dataset, true, false, false),
            record(ProductKind::Dataset, false, true, false),
            record(ProductKind::Dataset, true, true, true),
            record(ProductKind::Dataset, false, false, false),
        ];
        let s = summarize(&records, KindFilter::Dataset);
        assert_eq!(s.total_pairs, 4);
        assert_eq!(s.varied_pairs, 3);
        assert_eq!(s.varied_pct, 75.0);
        assert_eq!(
            s.event_counts,
            EventCounts {
                addition: 2,
                removal: 2,
                shuffle: 1,
                total: 5
            }
        );
        assert_eq!(
            (s.event_pcts.addition, s.event_pcts.removal, s.event_pcts.shuffle),
            (40.0, 40.0, 20.0)
        );
        assert_eq!(s.multi_event_pairs, 1);
        assert_eq!(s.multi_event_pct, 33.33);
        s.check_invariants().unwrap();
    }

    #[test]
    fn empty_summary_is_zero() {
        let s = summarize(&[], KindFilter::Software);
        assert_eq!(s, ReportSummary::empty(SummaryKind::Software));
        assert_eq!(s.total_pairs, 0);
        assert_eq!(s.varied_pct, 0.0);
        assert_eq!(s.multi_event_pct, 0.0);
    }

    #[test]
    fn filter_by_kind() {
        let records = [
            record(ProductKind::Dataset, true, false, false),
            record(ProductKind::Software, false, false, false),
        ];
        assert_eq!(summarize(&records, KindFilter::Dataset).total_pairs, 1);
        assert_eq!(summarize(&records, KindFilter::Software).varied_pairs, 0);
        assert_eq!(summarize(&records, KindFilter::All).kind, SummaryKind::Combined);
    }

    #[test]
    fn excepted_pairs_count_as_unvaried() {
        let mut r = record(ProductKind::Dataset, false, false, false);
        r.annotation = VariationAnnotation::excepted(ExceptionKind::GroupAttribution);
        let s = summarize(&[r], KindFilter::Dataset);
        assert_eq!(s.unvaried_pairs, 1);
        assert_eq!(s.exception_counts.group_attribution, 1);
    }

    #[test]
    fn record_line_round_trip() {
        let mut r = record(ProductKind::Dataset, true, false, true);
        r.match_methods = vec![MatchMethod::Exact];
        let line = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<PairRecord>(&line).unwrap(), r);

        let mut e = record(ProductKind::Software, false, false, false);
        e.annotation = VariationAnnotation::excepted(ExceptionKind::Other("empty author list".into()));
        let line = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<PairRecord>(&line).unwrap(), e);
    }

    #[test]
    fn export_empty_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let s = ReportSummary::empty(SummaryKind::Dataset);
        export(&s, &[], dir.path(), ExportFormat::Both).unwrap();
        let pairs = fs::read_to_string(dir.path().join(PAIRS_FILE)).unwrap();
        assert_eq!(pairs.lines().count(), 1);
        let combos = fs::read_to_string(dir.path().join(COMBOS_FILE)).unwrap();
        assert_eq!(combos.lines().count(), 8);
        assert!(combos.lines().skip(1).all(|l| l.ends_with(",0")));
    }

    #[test]
    fn export_combo_rows_sum_to_varied() {
        let dir = tempfile::tempdir().unwrap();
        let records = [
            record(ProductKind::Dataset, true, false, false),
            record(ProductKind::Dataset, true, true, false),
            record(ProductKind::Dataset, false, false, false),
        ];
        let s = summarize(&records, KindFilter::Dataset);
        export(&s, &records, dir.path(), ExportFormat::Csv).unwrap();
        assert!(!dir.path().join(SUMMARY_FILE).exists());
        let combos = fs::read_to_string(dir.path().join(COMBOS_FILE)).unwrap();
        let order: Vec<&str> = combos.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(order, ["A", "R", "S", "A+R", "A+S", "R+S", "A+R+S"]);
        let sum: u64 = combos
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap())
            .sum();
        assert_eq!(sum, s.varied_pairs);
    }

    #[test]
    fn export_rejects_inconsistent_summary() {
        let mut s = ReportSummary::empty(SummaryKind::Dataset);
        s.varied_pairs = 3;
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            export(&s, &[], dir.path(), ExportFormat::Json),
            Err(ReportError::Invariant(_))
        ));
    }

    #[test]
    fn export_reports_path_on_io_failure() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = export(
            &ReportSummary::empty(SummaryKind::Dataset),
            &[],
            &blocker.join("sub"),
            ExportFormat::Json,
        )
        .unwrap_err();
        assert!(err.to_string().contains("file"));
    }

    fn arb_tallies() -> impl Strategy<Value = Tallies> {
        (prop::array::uniform7(0u64..50), 0u64..20, 0u64..20, 0u64..20, 0u64..50, any::<u64>()).prop_map(
            |(c, g, n, o, extra, nonadj)| {
                let combos = ComboCounts {
                    a: c[0],
                    r: c[1],
                    s: c[2],
                    ar: c[3],
                    as_: c[4],
                    rs: c[5],
                    ars: c[6],
                };
                let shuffles = c[2] + c[4] + c[5] + c[6];
                Tallies {
                    total_pairs: combos.total() + g + n + o + extra,
                    combos,
                    exceptions: ExceptionCounts {
                        group_attribution: g,
                        null_intersection: n,
                        other: o,
                    },
                    shuffle_nonadjacent: if shuffles == 0 { 0 } else { nonadj % (shuffles + 1) },
                }
            },
        )
    }

    fn arb_kind() -> impl Strategy<Value = SummaryKind> {
        prop::sample::select(vec![SummaryKind::Dataset, SummaryKind::Software, SummaryKind::Combined])
    }

    proptest! {
        #[test]
        fn derived_fields_match_tallies(t in arb_tallies(), k in arb_kind()) {
            let s = ReportSummary::from_tallies(k, t);
            prop_assert!(s.check_invariants().is_ok());
            prop_assert_eq!(s.varied_pairs + s.unvaried_pairs, s.total_pairs);
            prop_assert_eq!(s.combo_counts.total(), s.varied_pairs);
            if s.event_counts.total > 0 {
                let sum = s.event_pcts.addition + s.event_pcts.removal + s.event_pcts.shuffle;
                prop_assert!((sum - 100.0).abs() <= 0.02 + 1e-9);
            }
        }

        #[test]
        fn merge_is_commutative_and_associative(
            a in arb_tallies(), b in arb_tallies(), c in arb_tallies(),
            ka in arb_kind(), kb in arb_kind(), kc in arb_kind(),
        ) {
            let (a, b, c) = (
                ReportSummary::from_tallies(ka, a),
                ReportSummary::from_tallies(kb, b),
                ReportSummary::from_tallies(kc, c),
            );
            prop_assert_eq!(a.merge(&b), b.merge(&a));
            prop_assert_eq!(a.merge(&b).merge(&c), a.merge(&b.merge(&c)));
            prop_assert_eq!(a.merge(&ReportSummary::empty(a.kind)), a.clone());
        }
    }
}
