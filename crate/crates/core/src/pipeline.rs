//! Stage helpers shared by the command-line front end and the benches.

use rayon::prelude::*;

use crate::diff::{annotate, MatchConfig};
use crate::model::SupplementPair;
use crate::report::PairRecord;

/// Annotates every pair in parallel; output order follows `pairs`.
pub fn annotate_pairs(pairs: &[SupplementPair], cfg: &MatchConfig) -> Vec<PairRecord> {
    pairs
        .par_iter()
        .map(|pair| {
            let (alignment, annotation) = annotate(pair, cfg);
            PairRecord::new(pair, annotation, alignment.matches.iter().map(|m| m.method))
        })
        .collect()
}
