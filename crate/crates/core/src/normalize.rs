//! Name, title and identifier normalization.
//!
//! Names go through compatibility decomposition, diacritic stripping,
//! case folding, punctuation removal (keeping `.` and `-`) and whitespace
//! collapsing. A name with exactly one comma is read as `Last, First` and
//! reordered to `First Last` before punctuation is dropped.

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NormalizeError {
    #[error("name is empty after normalization")]
    Empty,
}

/// Normalizes an author name for comparison.
///
/// ```
/// use authvar_core::normalize_name;
/// assert_eq!(normalize_name("Müller, J.").unwrap(), "j. muller");
/// ```
pub fn normalize_name(raw: &str) -> Result<String, NormalizeError> {
    let folded = fold(raw);
    let reordered = match folded.split_once(',') {
        Some((last, first)) if !first.contains(',') => format!("{first} {last}"),
        _ => folded,
    };
    let out = clean(&reordered);
    if out.is_empty() {
        Err(NormalizeError::Empty)
    } else {
        Ok(out)
    }
}

/// Normalizes a title. Same folding as names but commas are plain punctuation.
pub fn normalize_title(raw: &str) -> String {
    clean(&fold(raw))
}

/// Whitespace tokens of a normalized title.
pub fn title_tokens(raw: &str) -> std::collections::BTreeSet<String> {
    normalize_title(raw)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Normalizes a subject tag: folded, punctuation kept, whitespace collapsed.
pub fn normalize_subject(raw: &str) -> String {
    fold(raw).split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Extracts the bare 16-character ORCID iD (`0000-0002-1825-0097`) from a
/// raw value, accepting URL prefixes and a lowercase check digit.
pub fn normalize_orcid(raw: &str) -> Option<String> {
    let digits: String = raw
        .trim()
        .rsplit('/')
        .next()
        .unwrap_or_default()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_uppercase())
        .collect();
    let valid = digits.len() == 16
        && digits[..15].chars().all(|c| c.is_ascii_digit())
        && digits[15..].chars().all(|c| c.is_ascii_digit() || c == 'X');
    if !valid {
        return None;
    }
    Some(format!(
        "{}-{}-{}-{}",
        &digits[0..4],
        &digits[4..8],
        &digits[8..12],
        &digits[12..16]
    ))
}

// Lowercasing can introduce combining marks (e.g. U+0130) and NFKD can
// produce uppercase letters (e.g. U+210C), so the fold runs twice.
fn fold(raw: &str) -> String {
    fold_once(&fold_once(raw))
}

fn fold_once(raw: &str) -> String {
    raw.nfkd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_lowercase)
        .flat_map(case_fold_extra)
        .collect::<String>()
        .nfkd()
        .filter(|c| !is_combining_mark(*c))
        .collect()
}

// Full case folding entries not covered by `to_lowercase`.
fn case_fold_extra(c: char) -> impl Iterator<Item = char> {
    let (a, b) = match c {
        'ß' | 'ẞ' => ('s', Some('s')),
        'ς' => ('σ', None),
        other => (other, None),
    };
    std::iter::once(a).chain(b)
}

fn clean(folded: &str) -> String {
    folded
        .chars()
        .filter_map(|c| {
            if c.is_whitespace() {
                Some(' ')
            } else if c.is_alphanumeric() || c == '.' || c == '-' {
                Some(c)
            } else {
                None
            }
        })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}
