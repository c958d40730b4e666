//! Streaming ingestion of newline-delimited JSON dumps.
//!
//! Products and relations are read one line at a time; only the current
//! record is held in memory. Field locations are configurable through
//! [`MappingConfig`] since dump schemas differ between releases.
//!
//! Bad records are skipped and counted by default ([`ErrorPolicy::Skip`]);
//! [`ErrorPolicy::Abort`] stops at the first one.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::model::{
    AuthorList, AuthorMention, ModelError, Provenance, Relation, RelationSemantics,
    ResearchProduct, RetrofitRule, ProductKind,
};
use crate::normalize::normalize_subject;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {class}: {message}")]
    Record {
        line: u64,
        class: ErrorClass,
        message: String,
    },
    #[error("invalid mapping config: {0}")]
    Config(String),
}

/// Error classes counted in an [`IngestReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorClass {
    MalformedRecord,
    MissingField,
    InvalidField,
    InvalidAuthor,
    DuplicatePosition,
    UnknownKind,
    InvalidDate,
    DuplicateId,
}

impl ErrorClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorClass::MalformedRecord => "malformed_record",
            ErrorClass::MissingField => "missing_field",
            ErrorClass::InvalidField => "invalid_field",
            ErrorClass::InvalidAuthor => "invalid_author",
            ErrorClass::DuplicatePosition => "duplicate_position",
            ErrorClass::UnknownKind => "unknown_kind",
            ErrorClass::InvalidDate => "invalid_date",
            ErrorClass::DuplicateId => "duplicate_id",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorPolicy {
    #[default]
    Skip,
    Abort,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub records_read: u64,
    pub records_accepted: u64,
    pub records_skipped: u64,
    pub errors: BTreeMap<ErrorClass, u64>,
}

impl IngestReport {
    fn accept(&mut self) {
        self.records_read += 1;
        self.records_accepted += 1;
    }

    fn skip(&mut self, class: ErrorClass) {
        self.records_read += 1;
        self.records_skipped += 1;
        *self.errors.entry(class).or_default() += 1;
    }

    pub fn count(&self, class: ErrorClass) -> u64 {
        self.errors.get(&class).copied().unwrap_or(0)
    }
}

/// What to do with a product whose kind label is not in the table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnknownKindPolicy {
    #[default]
    Reject,
    MapTo(ProductKind),
}

/// Dotted field paths into product records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductFields {
    pub id: String,
    pub kind: String,
    pub title: String,
    pub authors: String,
    /// Relative to each author object. When absent from a record the
    /// 1-based array index is used.
    pub author_position: String,
    pub author_name: String,
    pub author_orcid: Option<String>,
    pub date: Option<String>,
    pub subjects: Option<String>,
    /// Relative to each subject element when subjects are objects.
    pub subject_value: Option<String>,
}

impl Default for ProductFields {
    fn default() -> Self {
        Self {
            id: "id".into(),
            kind: "type".into(),
            title: "title".into(),
            authors: "authors".into(),
            author_position: "rank".into(),
            author_name: "fullname".into(),
            author_orcid: Some("orcid".into()),
            date: Some("date".into()),
            subjects: Some("subjects".into()),
            subject_value: None,
        }
    }
}

/// Dotted field paths into relation records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelationFields {
    pub source: String,
    pub target: String,
    pub reltype: String,
    pub provenance: Option<String>,
    pub rule: Option<String>,
}

impl Default for RelationFields {
    fn default() -> Self {
        Self {
            source: "source".into(),
            target: "target".into(),
            reltype: "reltype".into(),
            provenance: Some("provenance".into()),
            rule: Some("rule".into()),
        }
    }
}

/// Field bindings and kind-label translation for one dump schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MappingConfig {
    pub products: ProductFields,
    pub relations: RelationFields,
    /// Dump label (matched case-insensitively) to product kind. Labels
    /// given in a file are added to the built-in ones.
    #[serde(deserialize_with = "with_builtin_labels")]
    pub kind_labels: BTreeMap<String, ProductKind>,
    pub unknown_kind: UnknownKindPolicy,
}

fn builtin_labels() -> BTreeMap<String, ProductKind> {
    [
        ("publication", ProductKind::Publication),
        ("dataset", ProductKind::Dataset),
        ("software", ProductKind::Software),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

fn with_builtin_labels<'de, D: serde::Deserializer<'de>>(
    de: D,
) -> Result<BTreeMap<String, ProductKind>, D::Error> {
    let mut labels = builtin_labels();
    labels.extend(BTreeMap::<String, ProductKind>::deserialize(de)?);
    Ok(labels)
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            products: ProductFields::default(),
            relations: RelationFields::default(),
            kind_labels: builtin_labels(),
            unknown_kind: UnknownKindPolicy::Reject,
        }
    }
}

impl MappingConfig {
    /// Loads a mapping from a `.json` or `.toml` file. Missing keys take
    /// their defaults.
    pub fn from_path(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: MappingConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text)
                .map_err(|e| IngestError::Config(format!("{}: {e}", path.display())))?,
            _ => toml::from_str(&text)
                .map_err(|e| IngestError::Config(format!("{}: {e}", path.display())))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        let p = &self.products;
        let r = &self.relations;
        let required = [
            ("products.id", &p.id),
            ("products.kind", &p.kind),
            ("products.title", &p.title),
            ("products.authors", &p.authors),
            ("products.author_position", &p.author_position),
            ("products.author_name", &p.author_name),
            ("relations.source", &r.source),
            ("relations.target", &r.target),
            ("relations.reltype", &r.reltype),
        ];
        for (name, path) in required {
            if path.trim().is_empty() {
                return Err(IngestError::Config(format!("binding `{name}` is empty")));
            }
        }
        Ok(())
    }

    fn kind_for(&self, label: &str) -> Option<ProductKind> {
        let lower = label.trim().to_lowercase();
        self.kind_labels
            .iter()
            .find(|(k, _)| k.to_lowercase() == lower)
            .map(|(_, v)| *v)
            .or(match self.unknown_kind {
                UnknownKindPolicy::Reject => None,
                UnknownKindPolicy::MapTo(kind) => Some(kind),
            })
    }
}

#[derive(Debug)]
struct RecordError {
    class: ErrorClass,
    message: String,
}

impl RecordError {
    fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        Self {
            class,
            message: message.into(),
        }
    }
}

impl From<ModelError> for RecordError {
    fn from(e: ModelError) -> Self {
        let class = match e {
            ModelError::DuplicatePosition(_) => ErrorClass::DuplicatePosition,
            ModelError::EmptyId => ErrorClass::MissingField,
            _ => ErrorClass::InvalidAuthor,
        };
        RecordError::new(class, e.to_string())
    }
}

type ParseFn<T> = fn(&MappingConfig, &Value) -> Result<T, RecordError>;

/// Iterator over the records of one newline-delimited stream.
///
/// Under [`ErrorPolicy::Skip`] it only yields `Ok` items (bad lines are
/// counted in [`report`](Self::report)); under `Abort` the first bad line
/// yields an `Err` and ends iteration. Blank lines are ignored.
pub struct RecordStream<'c, R, T> {
    reader: R,
    cfg: &'c MappingConfig,
    policy: ErrorPolicy,
    parse: ParseFn<T>,
    buf: Vec<u8>,
    line: u64,
    report: IngestReport,
    done: bool,
}

impl<'c, R: BufRead, T> RecordStream<'c, R, T> {
    fn new(reader: R, cfg: &'c MappingConfig, policy: ErrorPolicy, parse: ParseFn<T>) -> Self {
        Self {
            reader,
            cfg,
            policy,
            parse,
            buf: Vec::with_capacity(4096),
            line: 0,
            report: IngestReport::default(),
            done: false,
        }
    }

    pub fn report(&self) -> &IngestReport {
        &self.report
    }

    pub fn into_report(self) -> IngestReport {
        self.report
    }
}

impl<R: BufRead, T> Iterator for RecordStream<'_, R, T> {
    type Item = Result<T, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        while !self.done {
            self.buf.clear();
            match self.reader.read_until(b'\n', &mut self.buf) {
                Ok(0) => {
                    self.done = true;
                    return None;
                }
                Ok(_) => {}
                Err(e) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
            }
            self.line += 1;
            if self.buf.iter().all(u8::is_ascii_whitespace) {
                continue;
            }
            let parsed = serde_json::from_slice::<Value>(&self.buf)
                .map_err(|e| RecordError::new(ErrorClass::MalformedRecord, e.to_string()))
                .and_then(|value| (self.parse)(self.cfg, &value));
            match parsed {
                Ok(item) => {
                    self.report.accept();
                    return Some(Ok(item));
                }
                Err(err) => {
                    self.report.skip(err.class);
                    if self.policy == ErrorPolicy::Abort {
                        self.done = true;
                        return Some(Err(IngestError::Record {
                            line: self.line,
                            class: err.class,
                            message: err.message,
                        }));
                    }
                }
            }
        }
        None
    }
}

/// Streams products from `reader` without collecting them.
pub fn product_stream<R: BufRead>(
    reader: R,
    cfg: &MappingConfig,
    policy: ErrorPolicy,
) -> RecordStream<'_, R, ResearchProduct> {
    RecordStream::new(reader, cfg, policy, parse_product_record)
}

/// Streams relations from `reader` without collecting them.
pub fn relation_stream<R: BufRead>(
    reader: R,
    cfg: &MappingConfig,
    policy: ErrorPolicy,
) -> RecordStream<'_, R, Relation> {
    RecordStream::new(reader, cfg, policy, parse_relation_record)
}

/// Reads every product in file order. Repeated ids after the first are
/// skipped and counted as `duplicate_id`.
pub fn parse_products<R: BufRead>(
    reader: R,
    cfg: &MappingConfig,
    policy: ErrorPolicy,
) -> Result<(Vec<ResearchProduct>, IngestReport), IngestError> {
    let mut stream = product_stream(reader, cfg, policy);
    let mut seen = HashSet::new();
    let mut products = Vec::new();
    let mut duplicates = 0;
    for item in stream.by_ref() {
        let product = item?;
        if !seen.insert(product.id.clone()) {
            if policy == ErrorPolicy::Abort {
                return Err(IngestError::Record {
                    line: stream.line,
                    class: ErrorClass::DuplicateId,
                    message: format!("duplicate product id {}", product.id),
                });
            }
            duplicates += 1;
            continue;
        }
        products.push(product);
    }
    let mut report = stream.into_report();
    if duplicates > 0 {
        report.records_accepted -= duplicates;
        report.records_skipped += duplicates;
        *report.errors.entry(ErrorClass::DuplicateId).or_default() += duplicates;
    }
    Ok((products, report))
}

/// Reads every relation in file order. Endpoints are not checked here.
pub fn parse_relations<R: BufRead>(
    reader: R,
    cfg: &MappingConfig,
    policy: ErrorPolicy,
) -> Result<(Vec<Relation>, IngestReport), IngestError> {
    let mut stream = relation_stream(reader, cfg, policy);
    let relations = stream.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((relations, stream.into_report()))
}

fn lookup<'v>(value: &'v Value, path: &str) -> Option<&'v Value> {
    path.split('.')
        .try_fold(value, |v, key| v.get(key))
        .filter(|v| !v.is_null())
}

fn required<'v>(value: &'v Value, path: &str) -> Result<&'v Value, RecordError> {
    lookup(value, path)
        .ok_or_else(|| RecordError::new(ErrorClass::MissingField, format!("missing `{path}`")))
}

fn as_text(value: &Value, path: &str) -> Result<String, RecordError> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(RecordError::new(
            ErrorClass::InvalidField,
            format!("`{path}` is not text"),
        )),
    }
}

fn parse_product_record(cfg: &MappingConfig, record: &Value) -> Result<ResearchProduct, RecordError> {
    let f = &cfg.products;
    let id = as_text(required(record, &f.id)?, &f.id)?;
    if id.trim().is_empty() {
        return Err(RecordError::new(ErrorClass::MissingField, "empty id"));
    }
    let label = as_text(required(record, &f.kind)?, &f.kind)?;
    let kind = cfg
        .kind_for(&label)
        .ok_or_else(|| RecordError::new(ErrorClass::UnknownKind, format!("kind `{label}`")))?;
    let title = match lookup(record, &f.title) {
        Some(v) => as_text(v, &f.title)?,
        None => String::new(),
    };
    let authors = parse_authors(f, record)?;
    let mut product = ResearchProduct::new(id, kind, title, authors)?;

    if let Some(date_path) = &f.date {
        if let Some(v) = lookup(record, date_path) {
            let text = as_text(v, date_path)?;
            if !text.trim().is_empty() {
                let date = parse_date(&text).ok_or_else(|| {
                    RecordError::new(ErrorClass::InvalidDate, format!("date `{text}`"))
                })?;
                product = product.with_date(date);
            }
        }
    }

    if let Some(subjects_path) = &f.subjects {
        if let Some(v) = lookup(record, subjects_path) {
            product.subjects = parse_subjects(v, f.subject_value.as_deref())?;
        }
    }
    Ok(product)
}

fn parse_authors(f: &ProductFields, record: &Value) -> Result<AuthorList, RecordError> {
    let Some(raw) = lookup(record, &f.authors) else {
        return Ok(AuthorList::default());
    };
    let entries = raw.as_array().ok_or_else(|| {
        RecordError::new(ErrorClass::InvalidField, format!("`{}` is not a list", f.authors))
    })?;
    let mut mentions = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let position = match lookup(entry, &f.author_position) {
            None => i as u32 + 1,
            Some(Value::Number(n)) => n.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or_else(
                || RecordError::new(ErrorClass::InvalidAuthor, format!("author rank {n}")),
            )?,
            Some(Value::String(s)) => s.trim().parse::<u32>().map_err(|_| {
                RecordError::new(ErrorClass::InvalidAuthor, format!("author rank `{s}`"))
            })?,
            Some(_) => {
                return Err(RecordError::new(ErrorClass::InvalidAuthor, "author rank type"))
            }
        };
        let name = lookup(entry, &f.author_name)
            .and_then(Value::as_str)
            .ok_or_else(|| RecordError::new(ErrorClass::InvalidAuthor, "author without name"))?;
        let orcid = f
            .author_orcid
            .as_deref()
            .and_then(|p| lookup(entry, p))
            .and_then(Value::as_str)
            .map(str::to_string);
        mentions.push(AuthorMention::new(position, name, orcid)?);
    }
    Ok(AuthorList::new(mentions)?)
}

fn parse_subjects(value: &Value, inner: Option<&str>) -> Result<BTreeSet<String>, RecordError> {
    let items = value
        .as_array()
        .ok_or_else(|| RecordError::new(ErrorClass::InvalidField, "subjects is not a list"))?;
    let mut out = BTreeSet::new();
    for item in items {
        let text = match (item, inner) {
            (Value::String(s), _) => Some(s.as_str()),
            (other, Some(path)) => lookup(other, path).and_then(Value::as_str),
            _ => None,
        };
        if let Some(text) = text {
            let subject = normalize_subject(text);
            if !subject.is_empty() {
                out.insert(subject);
            }
        }
    }
    Ok(out)
}

/// Parses `YYYY`, `YYYY-MM`, `YYYY-MM-DD` and full ISO-8601 timestamps.
///
/// Year-only values resolve to July 1 and year-month values to the 15th, so
/// day-level window checks stay defined.
pub fn parse_date(text: &str) -> Option<NaiveDate> {
    let text = text.trim();
    let date_part = text.split(['T', ' ']).next().unwrap_or(text);
    let mut parts = date_part.split('-');
    let year: i32 = parts.next()?.parse().ok()?;
    let month = parts.next().map(str::parse::<u32>);
    let day = parts.next().map(str::parse::<u32>);
    if parts.next().is_some() {
        return None;
    }
    match (month, day) {
        (None, None) => NaiveDate::from_ymd_opt(year, 7, 1),
        (Some(Ok(m)), None) => NaiveDate::from_ymd_opt(year, m, 15),
        (Some(Ok(m)), Some(Ok(d))) => NaiveDate::from_ymd_opt(year, m, d),
        _ => None,
    }
}

fn parse_relation_record(cfg: &MappingConfig, record: &Value) -> Result<Relation, RecordError> {
    let f = &cfg.relations;
    let source = as_text(required(record, &f.source)?, &f.source)?;
    let target = as_text(required(record, &f.target)?, &f.target)?;
    let label = as_text(required(record, &f.reltype)?, &f.reltype)?;
    let provenance = match f.provenance.as_deref().and_then(|p| lookup(record, p)) {
        None => Provenance::Asserted,
        Some(v) => match v.as_str() {
            Some(s) if s.eq_ignore_ascii_case("asserted") => Provenance::Asserted,
            Some(s) if s.eq_ignore_ascii_case("inferred") => Provenance::Inferred,
            _ => {
                return Err(RecordError::new(
                    ErrorClass::InvalidField,
                    format!("provenance `{v}`"),
                ))
            }
        },
    };
    let rule = match f.rule.as_deref().and_then(|p| lookup(record, p)) {
        None => None,
        Some(v) => Some(
            serde_json::from_value::<RetrofitRule>(v.clone())
                .map_err(|_| RecordError::new(ErrorClass::InvalidField, format!("rule `{v}`")))?,
        ),
    };
    if source.is_empty() || target.is_empty() {
        return Err(RecordError::new(ErrorClass::MissingField, "empty endpoint"));
    }
    Ok(Relation {
        source_id: source,
        target_id: target,
        semantics: RelationSemantics::from_label(&label),
        provenance,
        rule,
    })
}
