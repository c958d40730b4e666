//! Detection and aggregation of authorship variations between publications
//! and their supplementary datasets or software.
//!
//! The pipeline reads a metadata graph ([`ingest`]), selects
//! publication/supplement pairs and drops merged-record noise ([`pairs`]),
//! optionally retrofits missing supplement relations ([`retrofit`]), aligns
//! the two bylines of each pair and flags additions, removals and shuffles
//! ([`diff`]), and aggregates the flags into summary tables ([`report`]).

pub mod diff;
pub mod graph;
pub mod ingest;
pub mod model;
pub mod normalize;
pub mod pairs;
pub mod pipeline;
pub mod report;
pub mod retrofit;

pub use diff::{
    annotate, classify_exception, classify_shuffle_adjacency, detect_events, match_author_sets,
    DiffError, MatchConfig,
};
pub use graph::Graph;
pub use ingest::{
    parse_products, parse_relations, product_stream, relation_stream, ErrorPolicy, IngestError,
    IngestReport, MappingConfig,
};
pub use model::{
    AuthorAlignment, AuthorList, AuthorMention, EventFlags, ExceptionKind, MatchMethod,
    MatchedAuthor, ModelError, ProductKind, Provenance, Relation, RelationSemantics,
    ResearchProduct, RetrofitRule, ShuffleAdjacency, SupplementPair, VariationAnnotation,
};
pub use normalize::{normalize_name, NormalizeError};
pub use pairs::{
    detect_dedup_noise, select_linked_publications, select_supplement_pairs, NoisePolicy,
};
pub use pipeline::annotate_pairs;
pub use report::{
    export, export_bundle, summarize, ExportFormat, KindFilter, PairRecord, ReportBundle, ReportError,
    ReportSummary, SummaryKind,
};
pub use retrofit::{
    calibrate_interval, infer_supplement, retrofit_by_rule, score, FeatureVector,
    RetrofitError, RetrofitRuleConfig, ScoreInterval, Weights,
};
