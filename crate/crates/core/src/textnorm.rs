//! Tokenization and text normalization shared by every metric.
//!
//! Tokens are maximal runs of letters and digits. Devanagari vowel signs and
//! the virama count as letters so that Hindi words stay whole. Everything else
//! (punctuation, symbols, whitespace) separates tokens and is dropped.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A tokenized text together with the byte span of every token in the source.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSeq {
    pub tokens: Vec<String>,
    pub source_spans: Vec<(usize, usize)>,
}

impl TokenSeq {
    /// Builds a sequence from bare tokens, e.g. for tests and fixtures.
    /// Spans index into the space-joined token string.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        let mut source_spans = Vec::with_capacity(tokens.len());
        let mut offset = 0;
        for t in &tokens {
            source_spans.push((offset, offset + t.len()));
            offset += t.len() + 1;
        }
        TokenSeq { tokens, source_spans }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }
}

fn is_devanagari_mark(c: char) -> bool {
    matches!(c as u32,
        0x0900..=0x0903 | 0x093A..=0x094F | 0x0951..=0x0957 | 0x0962..=0x0963)
}

pub(crate) fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || is_devanagari_mark(c)
}

/// Splits `text` into lowercase word tokens.
pub fn tokenize(text: &str) -> TokenSeq {
    let mut seq = TokenSeq::default();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        match (is_token_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_token(&mut seq, text, s, i);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_token(&mut seq, text, s, text.len());
    }
    seq
}

fn push_token(seq: &mut TokenSeq, text: &str, start: usize, end: usize) {
    seq.tokens.push(text[start..end].to_lowercase());
    seq.source_spans.push((start, end));
}

/// Counts of every contiguous `n`-token window, keyed by the window slice.
pub type NgramCounts<'a> = HashMap<&'a [String], usize>;

/// Multiset of contiguous `n`-grams. Empty when the sequence is shorter than `n`.
pub fn ngrams(seq: &TokenSeq, n: usize) -> Result<NgramCounts<'_>> {
    ngrams_of(&seq.tokens, n)
}

pub(crate) fn ngrams_of(tokens: &[String], n: usize) -> Result<NgramCounts<'_>> {
    if n == 0 {
        return Err(Error::invalid("n-gram order must be at least 1"));
    }
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    Ok(counts)
}

/// Lowercases and collapses every whitespace run to a single space, trimming both ends.
pub fn normalize_text(text: &str) -> String {
    collapse_whitespace(text).to_lowercase()
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

/// Splits whitespace-collapsed text into sentences. A sentence ends after a run
/// of `.`, `?` or `!` that is followed by a space or the end of the text, so
/// decimals such as `3.5` stay inside their sentence.
fn sentences(collapsed: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let chars: Vec<(usize, char)> = collapsed.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        if is_terminator(chars[i].1) {
            let mut j = i;
            while j + 1 < chars.len() && is_terminator(chars[j + 1].1) {
                j += 1;
            }
            let end = chars[j].0 + chars[j].1.len_utf8();
            if j + 1 == chars.len() || chars[j + 1].1 == ' ' {
                let s = collapsed[start..end].trim();
                if !s.is_empty() {
                    out.push(s);
                }
                start = end;
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    let tail = collapsed[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Post-processing applied to generated summaries before scoring: collapse
/// extra whitespace and drop sentences that repeat an earlier one (compared
/// case-insensitively).
pub fn postprocess_generation(text: &str) -> String {
    let collapsed = collapse_whitespace(text);
    let mut seen = std::collections::HashSet::new();
    let mut kept = Vec::new();
    for s in sentences(&collapsed) {
        if seen.insert(s.to_lowercase()) {
            kept.push(s);
        }
    }
    kept.join(" ")
}
