use std::collections::BTreeSet;

use authvar_core::retrofit::{vanilla_candidates, RuleCheck};
use authvar_core::{
    calibrate_interval, infer_supplement, retrofit_by_rule, select_supplement_pairs, AuthorList,
    Graph, MatchConfig, ProductKind, Relation, RelationSemantics, ResearchProduct,
    RetrofitRuleConfig, ScoreInterval, Weights,
};
use chrono::{Duration, NaiveDate};
use proptest::prelude::*;

const NAMES: [&str; 5] = ["ann", "bob", "cid", "dee", "eve"];

#[derive(Debug, Clone)]
struct Shape {
    kind: ProductKind,
    authors: Vec<usize>,
    offset: Option<i64>,
}

fn arb_shape(kind: ProductKind) -> impl Strategy<Value = Shape> {
    (
        prop::sample::subsequence((0..NAMES.len()).collect::<Vec<_>>(), 0..=3),
        prop::option::weighted(0.9, -400i64..400),
    )
        .prop_map(move |(authors, offset)| Shape { kind, authors, offset })
}

fn arb_graph() -> impl Strategy<Value = Graph> {
    let pubs = prop::collection::vec(arb_shape(ProductKind::Publication), 1..6);
    let supps = prop::collection::vec(
        prop_oneof![arb_shape(ProductKind::Dataset), arb_shape(ProductKind::Software)],
        1..6,
    );
    (pubs, supps)
        .prop_flat_map(|(pubs, supps)| {
            let np = pubs.len();
            let ns = supps.len();
            let edge = (0..np, 0..ns, 0u8..4, any::<bool>());
            (Just(pubs), Just(supps), prop::collection::vec(edge, 0..20))
        })
        .prop_map(|(pubs, supps, edges)| {
            let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
            let build = |id: String, s: &Shape| {
                let list = AuthorList::from_names(
                    s.authors.iter().enumerate().map(|(i, &n)| (i as u32 + 1, NAMES[n])),
                )
                .unwrap();
                let p = ResearchProduct::new(id, s.kind, "", list).unwrap();
                match s.offset {
                    Some(d) => p.with_date(base + Duration::days(d)),
                    None => p,
                }
            };
            let mut products = Vec::new();
            for (i, s) in pubs.iter().enumerate() {
                products.push(build(format!("p{i}"), s));
            }
            for (i, s) in supps.iter().enumerate() {
                products.push(build(format!("d{i}"), s));
            }
            let relations = edges
                .into_iter()
                .map(|(p, d, sem, flip)| {
                    let sem = match sem {
                        0 => RelationSemantics::Cites,
                        1 => RelationSemantics::References,
                        2 => RelationSemantics::IsSupplementedBy,
                        _ => RelationSemantics::Other("IsRelatedTo".into()),
                    };
                    let (s, t) = (format!("p{p}"), format!("d{d}"));
                    if flip {
                        Relation::asserted(t, s, sem)
                    } else {
                        Relation::asserted(s, t, sem)
                    }
                })
                .collect();
            Graph::new(products, relations).0
        })
}

fn with(graph: &Graph, extra: &[Relation]) -> Graph {
    let mut g = graph.clone();
    g.extend_relations(extra.iter().cloned());
    g
}

proptest! {
    #[test]
    fn rule_output_revalidates(graph in arb_graph()) {
        let cfg = RetrofitRuleConfig::default();
        let m = MatchConfig::default();
        let out = retrofit_by_rule(&graph, &cfg, &m);
        let asserted_supp: BTreeSet<(String, String)> = select_supplement_pairs(&graph).0
            .iter()
            .map(|p| (p.publication().id.clone(), p.supplement().id.clone()))
            .collect();
        for rel in &out.relations {
            let p = graph.product(&rel.source_id).unwrap();
            let d = graph.product(&rel.target_id).unwrap();
            prop_assert_eq!(p.kind, ProductKind::Publication);
            prop_assert!(d.kind.is_supplement());
            prop_assert_eq!(cfg.check(p, d, &m), RuleCheck::Qualifies);
            prop_assert!(!asserted_supp.contains(&(rel.source_id.clone(), rel.target_id.clone())));
        }
    }

    #[test]
    fn rule_is_idempotent(graph in arb_graph()) {
        let cfg = RetrofitRuleConfig::default();
        let m = MatchConfig::default();
        let once = retrofit_by_rule(&graph, &cfg, &m).relations;
        let augmented = with(&graph, &once);
        let twice = retrofit_by_rule(&augmented, &cfg, &m).relations;
        prop_assert_eq!(&once, &twice);
        // Asserted relations are untouched and nothing is duplicated.
        prop_assert_eq!(&augmented.relations()[..graph.relations().len()], graph.relations());
        prop_assert_eq!(with(&augmented, &twice).relations().len(), augmented.relations().len());
    }

    #[test]
    fn widening_window_never_drops(graph in arb_graph(), w in 1i64..300, extra in 0i64..300) {
        let m = MatchConfig::default();
        let narrow = RetrofitRuleConfig { window_days: w, ..Default::default() };
        let wide = RetrofitRuleConfig { window_days: w + extra, ..Default::default() };
        let a: BTreeSet<Relation> = retrofit_by_rule(&graph, &narrow, &m).relations.into_iter().collect();
        let b: BTreeSet<Relation> = retrofit_by_rule(&graph, &wide, &m).relations.into_iter().collect();
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn interval_inference_is_sound_and_idempotent(graph in arb_graph()) {
        let m = MatchConfig::default();
        let w = Weights::default();
        let known = select_supplement_pairs(&graph).0;
        let Ok(interval) = calibrate_interval(&known, &w, &m, ScoreInterval::DEFAULT_MULTIPLIER) else {
            return Ok(());
        };
        let candidates = vanilla_candidates(&graph);
        let once = infer_supplement(&candidates, &interval, &w, &m).unwrap();
        for rel in &once {
            let p = graph.product(&rel.source_id).unwrap();
            let d = graph.product(&rel.target_id).unwrap();
            let s = authvar_core::score(&authvar_core::FeatureVector::between(p, d, &m), &w).unwrap();
            prop_assert!(interval.contains(s));
        }
        let augmented = with(&graph, &once);
        let twice = infer_supplement(&vanilla_candidates(&augmented), &interval, &w, &m).unwrap();
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn calibration_uses_only_asserted_pairs() {
    let mk = |id: &str, kind, authors: &[&str]| {
        let list = AuthorList::from_names(authors.iter().enumerate().map(|(i, n)| (i as u32 + 1, *n))).unwrap();
        ResearchProduct::new(id, kind, "", list).unwrap()
    };
    let products = vec![
        mk("p", ProductKind::Publication, &["ann"]),
        mk("d1", ProductKind::Dataset, &["ann"]),
        mk("d2", ProductKind::Dataset, &["bob"]),
    ];
    let relations = vec![
        Relation::asserted("p", "d1", RelationSemantics::IsSupplementedBy),
        Relation::inferred("p", "d2", authvar_core::RetrofitRule::DateAuthor),
    ];
    let (graph, _) = Graph::new(products, relations);
    let known = select_supplement_pairs(&graph).0;
    assert_eq!(known.len(), 2);
    let err = calibrate_interval(&known, &Weights::default(), &MatchConfig::default(), 2.0).unwrap_err();
    assert_eq!(err, authvar_core::RetrofitError::TooFewPairs(1));
}
