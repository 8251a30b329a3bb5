//! Detokenization and plain-text tokenization shared across the crate.
//!
//! The toolkit works on token sequences, but compressions are text. Joining
//! and re-splitting must agree, otherwise scores computed at training time
//! and at inference time drift apart. Both directions live here.

/// Tokens that absorb the preceding space when gluing text together.
const NO_SPACE_BEFORE: &[&str] = &[".", ",", ";", ":", "!", "?", "%", ")", "''"];

/// Tokens that absorb the following space.
const NO_SPACE_AFTER: &[&str] = &["(", "``"];

/// Multi-character punctuation forms kept whole when tokenizing.
const MULTI_PUNCT: &[&str] = &["''", "``", "...", "--"];

/// Join token forms into a single string, suppressing spaces around
/// punctuation: no space before `. , ; : ! ? % ) ''` and none after `( ``
pub fn join_tokens<'a, I>(forms: I) -> String
where
    I: IntoIterator<Item = &'a str>,
{
    let mut out = String::new();
    let mut prev: Option<&str> = None;
    for form in forms {
        if let Some(p) = prev {
            if !NO_SPACE_BEFORE.contains(&form) && !NO_SPACE_AFTER.contains(&p) {
                out.push(' ');
            }
        }
        out.push_str(form);
        prev = Some(form);
    }
    out
}

/// True if a form is pure punctuation (every char is ASCII punctuation).
pub fn is_punct_form(form: &str) -> bool {
    !form.is_empty() && form.chars().all(|c| c.is_ascii_punctuation())
}

/// Split plain text into tokens: whitespace first, then punctuation peeled
/// off word edges so that `Tuesday,` becomes `Tuesday` + `,`. The inverse of
/// [`join_tokens`] for text produced by it.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split_whitespace() {
        split_chunk(chunk, &mut tokens);
    }
    tokens
}

fn split_chunk(chunk: &str, out: &mut Vec<String>) {
    if chunk.is_empty() {
        return;
    }
    // Whole-chunk punctuation (".", "''", "...") stays a single token.
    if is_punct_form(chunk) {
        out.push(chunk.to_string());
        return;
    }
    // Peel one leading punctuation token, preferring multi-char forms.
    for p in MULTI_PUNCT {
        if let Some(rest) = chunk.strip_prefix(p) {
            out.push((*p).to_string());
            split_chunk(rest, out);
            return;
        }
    }
    let first = chunk.chars().next().unwrap();
    if first.is_ascii_punctuation() {
        out.push(first.to_string());
        split_chunk(&chunk[first.len_utf8()..], out);
        return;
    }
    // Peel one trailing punctuation token, preferring multi-char forms.
    for p in MULTI_PUNCT {
        if let Some(rest) = chunk.strip_suffix(p) {
            split_chunk(rest, out);
            out.push((*p).to_string());
            return;
        }
    }
    let last = chunk.chars().next_back().unwrap();
    if last.is_ascii_punctuation() {
        split_chunk(&chunk[..chunk.len() - last.len_utf8()], out);
        out.push(last.to_string());
        return;
    }
    out.push(chunk.to_string());
}

/// Character count of a string, spaces included.
pub fn char_len(text: &str) -> usize {
    text.chars().count()
}

/// FNV-1a 64-bit hash, seedable. Used wherever the toolkit needs a hash
/// that is stable across runs and platforms (fold assignment, feature-space
/// fingerprints).
pub fn fnv1a64(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64 ^ seed.wrapping_mul(0x9e3779b97f4a7c15);
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
