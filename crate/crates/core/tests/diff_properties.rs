use std::collections::BTreeSet;

use authvar_core::{
    classify_shuffle_adjacency, detect_events, match_author_sets, AuthorList, EventFlags,
    MatchConfig, ShuffleAdjacency,
};
use proptest::prelude::*;

const ALPHABET: [&str; 6] = ["ann", "bob", "cid", "dee", "eve", "fay"];

fn exact_only() -> MatchConfig {
    MatchConfig {
        fuzzy_enabled: false,
        ..MatchConfig::default()
    }
}

fn byline(names: &[&str]) -> AuthorList {
    AuthorList::from_names(names.iter().enumerate().map(|(i, n)| (i as u32 + 1, *n))).unwrap()
}

/// Event flags straight from set differences and two filtered orderings.
fn oracle(ap: &[&str], ad: &[&str]) -> EventFlags {
    let sp: BTreeSet<&str> = ap.iter().copied().collect();
    let sd: BTreeSet<&str> = ad.iter().copied().collect();
    let common: BTreeSet<&str> = sp.intersection(&sd).copied().collect();
    let in_p: Vec<&str> = ap.iter().copied().filter(|n| common.contains(n)).collect();
    let in_d: Vec<&str> = ad.iter().copied().filter(|n| common.contains(n)).collect();
    EventFlags {
        addition: !sd.is_subset(&sp),
        removal: !sp.is_subset(&sd),
        shuffle: common.len() > 1 && in_p != in_d,
    }
}

/// Adjacency by listing every inverted pair of the intersection sequence.
fn adjacency_oracle(ap: &[&str], ad: &[&str]) -> Option<ShuffleAdjacency> {
    let seq: Vec<&str> = ap.iter().copied().filter(|n| ad.contains(n)).collect();
    let d_index = |n: &str| ad.iter().position(|x| *x == n).unwrap();
    let mut gaps = Vec::new();
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if d_index(seq[i]) > d_index(seq[j]) {
                gaps.push(j - i);
            }
        }
    }
    if gaps.is_empty() {
        None
    } else if gaps.iter().any(|&g| g > 1) {
        Some(ShuffleAdjacency::InvolvesNonAdjacent)
    } else {
        Some(ShuffleAdjacency::AdjacentOnly)
    }
}

/// All sequences of distinct names from `alphabet` with length <= `max_len`.
fn all_bylines<'a>(alphabet: &[&'a str], max_len: usize) -> Vec<Vec<&'a str>> {
    let mut out = vec![vec![]];
    let mut frontier: Vec<Vec<&str>> = vec![vec![]];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for seq in &frontier {
            for n in alphabet {
                if !seq.contains(n) {
                    let mut s = seq.clone();
                    s.push(*n);
                    next.push(s);
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

#[test]
fn exhaustive_oracle_equivalence_small_alphabet() {
    let lists = all_bylines(&ALPHABET[..4], 4);
    assert_eq!(lists.len(), 65);
    let cfg = exact_only();
    for ap in &lists {
        for ad in &lists {
            let alignment = match_author_sets(&byline(ap), &byline(ad), &cfg);
            let got = detect_events(&alignment);
            assert_eq!(got, oracle(ap, ad), "ap={ap:?} ad={ad:?}");
            let adj = classify_shuffle_adjacency(&alignment).ok();
            assert_eq!(adj, adjacency_oracle(ap, ad), "ap={ap:?} ad={ad:?}");
        }
    }
}

fn arb_byline() -> impl Strategy<Value = Vec<&'static str>> {
    Just(ALPHABET.to_vec())
        .prop_shuffle()
        .prop_flat_map(|names| (Just(names), 0usize..=6))
        .prop_map(|(names, n)| names[..n].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn random_oracle_equivalence(ap in arb_byline(), ad in arb_byline()) {
        let alignment = match_author_sets(&byline(&ap), &byline(&ad), &exact_only());
        prop_assert_eq!(detect_events(&alignment), oracle(&ap, &ad));
        prop_assert_eq!(classify_shuffle_adjacency(&alignment).ok(), adjacency_oracle(&ap, &ad));
    }

    #[test]
    fn shuffle_ignores_unmatched_insertions(
        ap in arb_byline(),
        ad in arb_byline(),
        inserts in prop::collection::vec((0usize..8, 0usize..1000), 0..5),
    ) {
        let base = detect_events(&match_author_sets(&byline(&ap), &byline(&ad), &exact_only()));
        let mut extended: Vec<String> = ad.iter().map(|s| s.to_string()).collect();
        for (slot, tag) in inserts {
            let at = slot.min(extended.len());
            extended.insert(at, format!("outsider {tag} {}", extended.len()));
        }
        let names: Vec<&str> = extended.iter().map(String::as_str).collect();
        let grown = detect_events(&match_author_sets(&byline(&ap), &byline(&names), &exact_only()));
        prop_assert_eq!(grown.shuffle, base.shuffle);
    }

    #[test]
    fn swapping_roles_swaps_addition_and_removal(ap in arb_byline(), ad in arb_byline()) {
        let fwd = detect_events(&match_author_sets(&byline(&ap), &byline(&ad), &exact_only()));
        let rev = detect_events(&match_author_sets(&byline(&ad), &byline(&ap), &exact_only()));
        prop_assert_eq!(fwd.addition, rev.removal);
        prop_assert_eq!(fwd.removal, rev.addition);
        prop_assert_eq!(fwd.shuffle, rev.shuffle);
    }

    #[test]
    fn alignment_partitions_both_lists(ap in arb_byline(), ad in arb_byline()) {
        let (lp, ld) = (byline(&ap), byline(&ad));
        let a = match_author_sets(&lp, &ld, &MatchConfig::default());
        prop_assert!(a.matches.len() <= lp.len().min(ld.len()));
        prop_assert_eq!(a.matches.len() + a.removals.len(), lp.len());
        prop_assert_eq!(a.matches.len() + a.additions.len(), ld.len());
        let d_used: BTreeSet<u32> = a.matches.iter().map(|m| m.d_mention.position()).collect();
        prop_assert_eq!(d_used.len(), a.matches.len());
        let flags = detect_events(&a);
        if !flags.addition && !flags.removal {
            prop_assert_eq!(lp.len(), a.matches.len());
            prop_assert_eq!(ld.len(), a.matches.len());
        }
        prop_assert_eq!(flags, detect_events(&a));
    }
}
