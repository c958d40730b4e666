use std::io::Cursor;

use authvar_core::{
    detect_dedup_noise, parse_products, parse_relations, select_supplement_pairs, ErrorPolicy,
    Graph, MappingConfig, NoisePolicy, RelationSemantics,
};

const PRODUCTS: &str = r#"{"id":"p1","type":"publication","title":"Benthic survey","authors":[{"rank":1,"fullname":"Ann Lee"}]}
{"id":"d1","type":"dataset","title":"Benthic survey raw counts","authors":[{"rank":1,"fullname":"Lee, Ann"}]}
"#;

const RELATIONS: &str = r#"{"source":"p1","target":"d1","reltype":"IsSupplementedBy"}
{"source":"p1","target":"d404","reltype":"IsSupplementedBy"}
{"source":"p1","target":"d1","reltype":"HasVersion"}
"#;

#[test]
fn dangling_relation_kept_at_parse_time_flagged_at_selection() {
    let cfg = MappingConfig::default();
    let (products, _) = parse_products(Cursor::new(PRODUCTS), &cfg, ErrorPolicy::Skip).unwrap();
    let (relations, report) = parse_relations(Cursor::new(RELATIONS), &cfg, ErrorPolicy::Skip).unwrap();
    assert_eq!(report.records_accepted, 3);
    assert_eq!(relations[2].semantics, RelationSemantics::Other("HasVersion".into()));

    let (graph, dropped) = Graph::new(products, relations);
    assert_eq!(dropped, 0);
    let (pairs, diag) = select_supplement_pairs(&graph);
    assert_eq!(pairs.len(), 1);
    assert_eq!(diag.dangling, [("p1".to_string(), "d404".to_string())]);

    let (kept, flagged) = detect_dedup_noise(pairs, &NoisePolicy::default());
    assert_eq!((kept.len(), flagged.len()), (1, 0));
}

#[test]
fn mapping_loads_from_toml_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let toml_path = dir.path().join("mapping.toml");
    std::fs::write(&toml_path, "[products]\ndate = \"publicationdate\"\n[kind_labels]\nOther = \"dataset\"\n").unwrap();
    let cfg = MappingConfig::from_path(&toml_path).unwrap();
    assert_eq!(cfg.products.date.as_deref(), Some("publicationdate"));
    assert_eq!(cfg.products.id, "id");
    assert_eq!(cfg.kind_labels.get("Other"), Some(&authvar_core::ProductKind::Dataset));
    assert_eq!(cfg.kind_labels.get("publication"), Some(&authvar_core::ProductKind::Publication));

    let json_path = dir.path().join("mapping.json");
    std::fs::write(&json_path, r#"{"relations":{"reltype":"relClass"}}"#).unwrap();
    let cfg = MappingConfig::from_path(&json_path).unwrap();
    assert_eq!(cfg.relations.reltype, "relClass");

    std::fs::write(&json_path, r#"{"relations":{"bogus":"x"}}"#).unwrap();
    assert!(MappingConfig::from_path(&json_path).is_err());
}
