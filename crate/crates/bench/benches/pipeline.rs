use std::hint::black_box;
use std::io::Cursor;

use authvar_bench::{byline, pairs, products_jsonl};
use authvar_core::{
    annotate_pairs, detect_events, match_author_sets, normalize_name, parse_products,
    summarize, ErrorPolicy, KindFilter, MappingConfig, MatchConfig,
};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};

fn normalization(c: &mut Criterion) {
    c.bench_function("normalize_name", |b| {
        b.iter(|| normalize_name(black_box("  Müller-Lüdenscheidt, José Ángel ")).unwrap())
    });
}

fn alignment(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let mut group = c.benchmark_group("match_author_sets");
    for n in [5usize, 20, 100] {
        let ap = byline(n, 0, 0);
        let ad = byline(n, 1, 4);
        group.bench_function(format!("{n}_authors"), |b| {
            b.iter(|| detect_events(&match_author_sets(black_box(&ap), black_box(&ad), &cfg)))
        });
    }
    group.finish();
}

fn annotate_and_summarize(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let input = pairs(1_000, 8);
    c.bench_function("annotate_1000_pairs", |b| {
        b.iter(|| annotate_pairs(black_box(&input), &cfg))
    });
    let records = annotate_pairs(&input, &cfg);
    c.bench_function("summarize_1000_pairs", |b| {
        b.iter(|| summarize(black_box(&records), KindFilter::All))
    });
}

fn ingest(c: &mut Criterion) {
    let text = products_jsonl(2_000);
    let cfg = MappingConfig::default();
    let mut group = c.benchmark_group("ingest");
    group.throughput(Throughput::Bytes(text.len() as u64));
    group.bench_function("parse_products_2000", |b| {
        b.iter_batched(
            || Cursor::new(text.as_bytes()),
            |reader| parse_products(reader, &cfg, ErrorPolicy::Skip).unwrap(),
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

criterion_group!(benches, normalization, alignment, annotate_and_summarize, ingest);
criterion_main!(benches);
