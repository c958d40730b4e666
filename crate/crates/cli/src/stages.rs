use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context as _};
use authvar_core::ingest::IngestReport;
use authvar_core::pairs::{write_flagged_csv, FlaggedPair};
use authvar_core::report::{read_pair_records, write_pair_records};
use authvar_core::retrofit::vanilla_candidates;
use authvar_core::{
    annotate_pairs, calibrate_interval, detect_dedup_noise, export_bundle, infer_supplement,
    parse_products, parse_relations, product_stream, relation_stream, retrofit_by_rule,
    select_supplement_pairs, ErrorPolicy, Graph, PairRecord, ProductKind, Relation,
    ReportBundle, SupplementPair,
};
use serde::Serialize;

use crate::config::{RetrofitMode, RunConfig};
use crate::{Failure, FailureExt};

pub const PAIRS_JSONL: &str = "pairs.jsonl";
pub const FLAGGED_CSV: &str = "flagged_pairs.csv";
pub const INFERRED_JSONL: &str = "inferred_relations.jsonl";
pub const ANNOTATIONS_JSONL: &str = "annotations.jsonl";

pub struct Context {
    cfg: RunConfig,
    dry_run: bool,
}

impl Context {
    pub fn new(cfg: RunConfig, dry_run: bool) -> Self {
        Self { cfg, dry_run }
    }

    fn policy(&self) -> ErrorPolicy {
        if self.cfg.strict {
            ErrorPolicy::Abort
        } else {
            ErrorPolicy::Skip
        }
    }

    fn out_path(&self, name: &str) -> PathBuf {
        self.cfg.out_dir().join(name)
    }

    /// Writes a file under the output directory unless this is a dry run.
    fn write_out(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> anyhow::Result<()>,
    ) -> Result<(), Failure> {
        if self.dry_run {
            return Ok(());
        }
        let path = self.out_path(name);
        let result = (|| {
            fs::create_dir_all(self.cfg.out_dir())?;
            let mut w = BufWriter::new(File::create(&path)?);
            body(&mut w)?;
            w.flush()?;
            anyhow::Ok(())
        })();
        result
            .with_context(|| format!("writing {}", path.display()))
            .input()
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("opening {}", path.display()))
        .input()
}

fn warn_skips(what: &str, path: &Path, report: &IngestReport) {
    if report.records_skipped == 0 {
        return;
    }
    let classes = report
        .errors
        .iter()
        .map(|(class, n)| format!("{class}={n}"))
        .collect::<Vec<_>>()
        .join(", ");
    eprintln!(
        "warning: {what} {}: skipped {} of {} records ({classes})",
        path.display(),
        report.records_skipped,
        report.records_read
    );
}

#[derive(Serialize)]
struct IngestCheckOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    products: Option<IngestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    relations: Option<IngestReport>,
}

/// Streams the inputs without retaining records.
pub fn ingest_check(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    if cfg.paths.products.is_none() && cfg.paths.relations.is_none() {
        return Err(Failure::Config(anyhow!(
            "ingest-check needs --products and/or --relations"
        )));
    }
    let mut out = IngestCheckOutput {
        products: None,
        relations: None,
    };
    if cfg.paths.products.is_some() {
        let path = cfg.input(&cfg.paths.products, "products").config()?;
        let mut stream = product_stream(open(&path)?, &cfg.mapping, ctx.policy());
        for item in stream.by_ref() {
            item.with_context(|| path.display().to_string()).input()?;
        }
        let report = stream.into_report();
        warn_skips("products", &path, &report);
        out.products = Some(report);
    }
    if cfg.paths.relations.is_some() {
        let path = cfg.input(&cfg.paths.relations, "relations").config()?;
        let mut stream = relation_stream(open(&path)?, &cfg.mapping, ctx.policy());
        for item in stream.by_ref() {
            item.with_context(|| path.display().to_string()).input()?;
        }
        let report = stream.into_report();
        warn_skips("relations", &path, &report);
        out.relations = Some(report);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("report serializes")
    );
    Ok(())
}

fn load_graph(ctx: &Context) -> Result<Graph, Failure> {
    let cfg = &ctx.cfg;
    let products_path = cfg.input(&cfg.paths.products, "products").config()?;
    let relations_path = cfg.input(&cfg.paths.relations, "relations").config()?;
    let (products, report) = parse_products(open(&products_path)?, &cfg.mapping, ctx.policy())
        .with_context(|| products_path.display().to_string())
        .input()?;
    warn_skips("products", &products_path, &report);
    let (relations, report) = parse_relations(open(&relations_path)?, &cfg.mapping, ctx.policy())
        .with_context(|| relations_path.display().to_string())
        .input()?;
    warn_skips("relations", &relations_path, &report);
    let (graph, dropped) = Graph::new(products, relations);
    debug_assert_eq!(dropped, 0, "parse_products drops duplicate ids");
    Ok(graph)
}

fn select(ctx: &Context, graph: &Graph) -> (Vec<SupplementPair>, Vec<FlaggedPair>) {
    let (pairs, diagnostics) = select_supplement_pairs(graph);
    if !diagnostics.dangling.is_empty() {
        eprintln!(
            "warning: {} supplement relations reference unknown products",
            diagnostics.dangling.len()
        );
    }
    if diagnostics.kind_mismatch > 0 {
        eprintln!(
            "warning: {} supplement relations do not link a publication to a dataset or software",
            diagnostics.kind_mismatch
        );
    }
    detect_dedup_noise(pairs, &ctx.cfg.noise)
}

/// Runs the configured retrofit and returns the inferred relations.
fn infer(ctx: &Context, graph: &Graph, mode: RetrofitMode) -> Result<Vec<Relation>, Failure> {
    let cfg = &ctx.cfg;
    match mode {
        RetrofitMode::Off => Ok(Vec::new()),
        RetrofitMode::Rule => {
            let outcome = retrofit_by_rule(graph, &cfg.retrofit.rule(), &cfg.matching);
            if outcome.skipped_missing_date > 0 {
                eprintln!(
                    "warning: {} citation candidates lack a date and were skipped",
                    outcome.skipped_missing_date
                );
            }
            Ok(outcome.relations)
        }
        RetrofitMode::Interval => {
            let (known, _) = select(ctx, graph);
            let interval = calibrate_interval(
                &known,
                &cfg.weights,
                &cfg.matching,
                cfg.retrofit.multiplier,
            )
            .context("calibrating the score interval")
            .input()?;
            eprintln!(
                "score interval: mean {:.4}, std {:.4}, [{:.4}, {:.4}]",
                interval.mean, interval.std, interval.low, interval.high
            );
            infer_supplement(
                &vanilla_candidates(graph),
                &interval,
                &cfg.weights,
                &cfg.matching,
            )
            .input()
        }
    }
}

fn write_relations(ctx: &Context, relations: &[Relation]) -> Result<(), Failure> {
    ctx.write_out(INFERRED_JSONL, |w| {
        for rel in relations {
            serde_json::to_writer(&mut *w, rel)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

/// Graph → (optional retrofit) → kept and flagged pairs. Writes
/// `inferred_relations.jsonl` when a retrofit mode is active.
fn build_pairs(ctx: &Context) -> Result<(Vec<SupplementPair>, Vec<FlaggedPair>), Failure> {
    let mut graph = load_graph(ctx)?;
    let mode = ctx.cfg.retrofit.mode;
    if mode != RetrofitMode::Off {
        let inferred = infer(ctx, &graph, mode)?;
        eprintln!("retrofit: {} relations inferred", inferred.len());
        write_relations(ctx, &inferred)?;
        graph.extend_relations(inferred);
    }
    Ok(select(ctx, &graph))
}

fn write_pairs(
    ctx: &Context,
    kept: &[SupplementPair],
    flagged: &[FlaggedPair],
) -> Result<(), Failure> {
    ctx.write_out(PAIRS_JSONL, |w| {
        for pair in kept {
            serde_json::to_writer(&mut *w, pair)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    })?;
    ctx.write_out(FLAGGED_CSV, |w| Ok(write_flagged_csv(w, flagged)?))
}

fn describe_pairs(kept: &[SupplementPair], flagged: &[FlaggedPair]) -> String {
    let datasets = kept
        .iter()
        .filter(|p| p.supplement_kind() == ProductKind::Dataset)
        .count();
    format!(
        "pairs: {} kept ({} dataset, {} software), {} flagged as noise",
        kept.len(),
        datasets,
        kept.len() - datasets,
        flagged.len()
    )
}

pub fn pairs(ctx: &Context) -> Result<(), Failure> {
    let (kept, flagged) = build_pairs(ctx)?;
    write_pairs(ctx, &kept, &flagged)?;
    println!("{}", describe_pairs(&kept, &flagged));
    Ok(())
}

pub fn retrofit(ctx: &Context) -> Result<(), Failure> {
    let graph = load_graph(ctx)?;
    let mode = match ctx.cfg.retrofit.mode {
        RetrofitMode::Off => RetrofitMode::Rule,
        other => other,
    };
    let inferred = infer(ctx, &graph, mode)?;
    write_relations(ctx, &inferred)?;
    println!("retrofit: {} relations inferred", inferred.len());
    Ok(())
}

fn read_pairs(path: &Path) -> Result<Vec<SupplementPair>, Failure> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line
            .with_context(|| format!("reading {}", path.display()))
            .input()?;
        if line.trim().is_empty() {
            continue;
        }
        let pair = serde_json::from_str(&line)
            .with_context(|| format!("{}: line {}", path.display(), i + 1))
            .input()?;
        out.push(pair);
    }
    Ok(out)
}

fn annotated(ctx: &Context) -> Result<Vec<PairRecord>, Failure> {
    let cfg = &ctx.cfg;
    let pairs = match &cfg.paths.pairs {
        Some(_) => read_pairs(&cfg.input(&cfg.paths.pairs, "pairs").config()?)?,
        None => build_pairs(ctx)?.0,
    };
    Ok(annotate_pairs(&pairs, &cfg.matching))
}

fn write_annotations(ctx: &Context, records: &[PairRecord]) -> Result<(), Failure> {
    ctx.write_out(ANNOTATIONS_JSONL, |w| Ok(write_pair_records(w, records)?))
}

pub fn annotate(ctx: &Context) -> Result<(), Failure> {
    let records = annotated(ctx)?;
    write_annotations(ctx, &records)?;
    let excepted = records
        .iter()
        .filter(|r| r.annotation.exception.is_some())
        .count();
    println!(
        "annotated {} pairs ({} exceptions)",
        records.len(),
        excepted
    );
    Ok(())
}

fn summarize_and_export(ctx: &Context, records: &[PairRecord]) -> Result<(), Failure> {
    let bundle = ReportBundle::from_records(records);
    if !ctx.dry_run {
        export_bundle(&bundle, records, &ctx.cfg.out_dir(), ctx.cfg.format).input()?;
    }
    println!("varied pairs: {}", bundle.combined.headline());
    println!("  dataset:  {}", bundle.dataset.headline());
    println!("  software: {}", bundle.software.headline());
    Ok(())
}

pub fn report(ctx: &Context) -> Result<(), Failure> {
    let cfg = &ctx.cfg;
    let path = match &cfg.paths.annotations {
        Some(_) => cfg.input(&cfg.paths.annotations, "annotations").config()?,
        None => {
            let default = ctx.out_path(ANNOTATIONS_JSONL);
            cfg.input(&Some(default), "annotations").config()?
        }
    };
    let records = read_pair_records(open(&path)?)
        .with_context(|| path.display().to_string())
        .input()?;
    summarize_and_export(ctx, &records)
}

pub fn run_all(ctx: &Context) -> Result<(), Failure> {
    let (kept, flagged) = build_pairs(ctx)?;
    write_pairs(ctx, &kept, &flagged)?;
    eprintln!("{}", describe_pairs(&kept, &flagged));
    let records = annotate_pairs(&kept, &ctx.cfg.matching);
    write_annotations(ctx, &records)?;
    summarize_and_export(ctx, &records)
}
