//! Synthetic inputs for the criterion benches.

use authvar_core::{AuthorList, ProductKind, Provenance, ResearchProduct, SupplementPair};
use std::sync::Arc;

const SURNAMES: [&str; 12] = [
    "Rossi", "Bianchi", "Müller", "Smith", "García", "Nakamura", "Okafor", "Dubois", "Novak",
    "Silva", "Kowalski", "Jensen",
];

/// Byline of `n` authors, rotated by `shift` and with every `drop`-th author
/// removed, so pairs built from two calls differ in order and membership.
pub fn byline(n: usize, shift: usize, drop: usize) -> AuthorList {
    let names: Vec<String> = (0..n)
        .map(|i| format!("{} {}", SURNAMES[i % SURNAMES.len()], i))
        .collect();
    let mut picked: Vec<String> = Vec::new();
    for k in 0..n {
        let i = (k + shift) % n;
        if drop > 0 && i % drop == drop - 1 {
            continue;
        }
        picked.push(names[i].clone());
    }
    AuthorList::from_names(picked.into_iter().enumerate().map(|(i, s)| (i as u32 + 1, s)))
        .expect("positions are unique")
}

pub fn pairs(count: usize, authors: usize) -> Vec<SupplementPair> {
    (0..count)
        .map(|i| {
            let p = ResearchProduct::new(format!("p{i}"), ProductKind::Publication, "", byline(authors, 0, 0))
                .unwrap();
            let d = ResearchProduct::new(
                format!("d{i}"),
                ProductKind::Dataset,
                "",
                byline(authors, i % 3, 2 + i % 4),
            )
            .unwrap();
            SupplementPair::new(Arc::new(p), Arc::new(d), Provenance::Asserted).unwrap()
        })
        .collect()
}

/// Newline-delimited product records in the default dump layout.
pub fn products_jsonl(records: usize) -> String {
    let mut out = String::new();
    for i in 0..records {
        out.push_str(&format!(
            "{{\"id\":\"r{i}\",\"type\":\"dataset\",\"title\":\"Sample {i}\",\"date\":\"2020-03-04\",\"authors\":[{{\"rank\":1,\"fullname\":\"Rossi, Maria\"}},{{\"rank\":2,\"fullname\":\"Müller, J.\"}},{{\"rank\":3,\"fullname\":\"Ada Lovelace\"}}],\"subjects\":[\"ocean\"]}}\n"
        ));
    }
    out
}
