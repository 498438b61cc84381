//! Lexicon-based language tagging and the Code-Mixing Index (CMI).
//!
//! For an utterance with `n` tokens, `u` of them language-independent and
//! `w_i` tokens in language `i`:
//!
//! ```text
//! CMI = 100 · (1 − max_i(w_i) / (n − u))      and 0 when n = u
//! ```

use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::TokenSeq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LanguageTag {
    Lang1,
    Lang2,
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmbiguityPolicy {
    PreferLang1,
    PreferLang2,
    #[default]
    Independent,
}

impl FromStr for AmbiguityPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "preferlang1" | "lang1" => Ok(AmbiguityPolicy::PreferLang1),
            "preferlang2" | "lang2" => Ok(AmbiguityPolicy::PreferLang2),
            "independent" => Ok(AmbiguityPolicy::Independent),
            _ => Err(Error::invalid(format!(
                "unknown ambiguity policy {s:?}; expected prefer-lang1, prefer-lang2 or independent"
            ))),
        }
    }
}

impl fmt::Display for AmbiguityPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AmbiguityPolicy::PreferLang1 => "prefer-lang1",
            AmbiguityPolicy::PreferLang2 => "prefer-lang2",
            AmbiguityPolicy::Independent => "independent",
        })
    }
}

/// Word lists for the two languages (e.g. romanized Hindi and English).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    lang1: HashSet<String>,
    lang2: HashSet<String>,
}

fn normalize_word(w: &str) -> String {
    w.trim().to_lowercase()
}

impl Lexicons {
    pub fn new<I, J, S, T>(lang1: I, lang2: J) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let collect = |words: Vec<String>| -> HashSet<String> { words.into_iter().filter(|w| !w.is_empty()).collect() };
        let lang1 = collect(lang1.into_iter().map(|w| normalize_word(w.as_ref())).collect());
        let lang2 = collect(lang2.into_iter().map(|w| normalize_word(w.as_ref())).collect());
        if lang1.is_empty() || lang2.is_empty() {
            return Err(Error::invalid("both lexicons must contain at least one word"));
        }
        Ok(Lexicons { lang1, lang2 })
    }

    /// Reads two lexicon files with one word per line. Lines starting with `#` are comments.
    pub fn from_files(lang1: impl AsRef<Path>, lang2: impl AsRef<Path>) -> Result<Self> {
        let read = |p: &Path| -> Result<Vec<String>> {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(text.lines().filter(|l| !l.trim_start().starts_with('#')).map(str::to_string).collect())
        };
        Lexicons::new(read(lang1.as_ref())?, read(lang2.as_ref())?)
    }

    pub fn contains_lang1(&self, token: &str) -> bool {
        self.lang1.contains(token)
    }

    pub fn contains_lang2(&self, token: &str) -> bool {
        self.lang2.contains(token)
    }
}

/// Numerals and tokens without any letter carry no language.
fn is_language_independent(token: &str) -> bool {
    !token.chars().any(char::is_alphabetic)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageTagging {
    pub tags: Vec<LanguageTag>,
    pub n: usize,
    pub u: usize,
    pub w: [usize; 2],
}

impl LanguageTagging {
    pub fn from_tags(tags: Vec<LanguageTag>) -> Self {
        let mut w = [0usize; 2];
        let mut u = 0;
        for t in &tags {
            match t {
                LanguageTag::Lang1 => w[0] += 1,
                LanguageTag::Lang2 => w[1] += 1,
                LanguageTag::Independent => u += 1,
            }
        }
        LanguageTagging { n: tags.len(), u, w, tags }
    }
}

pub fn tag_tokens(seq: &TokenSeq, lexicons: &Lexicons, policy: AmbiguityPolicy) -> LanguageTagging {
    let tags = seq
        .tokens
        .iter()
        .map(|tok| {
            if is_language_independent(tok) {
                return LanguageTag::Independent;
            }
            match (lexicons.contains_lang1(tok), lexicons.contains_lang2(tok)) {
                (true, false) => LanguageTag::Lang1,
                (false, true) => LanguageTag::Lang2,
                (false, false) => LanguageTag::Independent,
                (true, true) => match policy {
                    AmbiguityPolicy::PreferLang1 => LanguageTag::Lang1,
                    AmbiguityPolicy::PreferLang2 => LanguageTag::Lang2,
                    AmbiguityPolicy::Independent => LanguageTag::Independent,
                },
            }
        })
        .collect();
    LanguageTagging::from_tags(tags)
}

/// Code-mixing index of a tagged utterance, in `[0, 50]` for two languages.
pub fn cmi(tagging: &LanguageTagging) -> Result<f64> {
    cmi_from_counts(tagging.n, tagging.u, &tagging.w)
}

pub fn cmi_from_counts(n: usize, u: usize, w: &[usize]) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("code-mixing index of an empty utterance is undefined"));
    }
    if u + w.iter().sum::<usize>() != n {
        return Err(Error::invalid(format!("inconsistent counts: n = {n}, u = {u}, w = {w:?}")));
    }
    if n == u {
        return Ok(0.0);
    }
    let max_w = w.iter().copied().max().unwrap_or(0);
    Ok(100.0 * (1.0 - max_w as f64 / (n - u) as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusCmi {
    pub mean_cmi: f64,
    /// `None` for records without tokens.
    pub per_record: Vec<Option<f64>>,
    pub skipped: usize,
}

/// Mean of per-record CMI; empty records are skipped and counted.
pub fn corpus_cmi(corpus: &[TokenSeq], lexicons: &Lexicons, policy: AmbiguityPolicy) -> Result<CorpusCmi> {
    let per_record: Vec<Option<f64>> = corpus
        .iter()
        .map(|seq| if seq.is_empty() { Ok(None) } else { cmi(&tag_tokens(seq, lexicons, policy)).map(Some) })
        .collect::<Result<_>>()?;
    corpus_cmi_from_values(per_record)
}

pub fn corpus_cmi_from_values(per_record: Vec<Option<f64>>) -> Result<CorpusCmi> {
    let values: Vec<f64> = per_record.iter().flatten().copied().collect();
    if values.is_empty() {
        return Err(Error::invalid("corpus CMI needs at least one non-empty record"));
    }
    let mean_cmi = values.iter().sum::<f64>() / values.len() as f64;
    Ok(CorpusCmi { mean_cmi, skipped: per_record.len() - values.len(), per_record })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::tokenize;
    use LanguageTag::*;

    fn lex() -> Lexicons {
        Lexicons::new(["hai", "mujhe", "se", "din", "ok"], ["fever", "have", "i", "ok", "pain"]).unwrap()
    }

    #[test]
    fn tagging_rules() {
        let t = tag_tokens(&tokenize("hai fever 3"), &lex(), AmbiguityPolicy::Independent);
        assert_eq!(t.tags, [Lang1, Lang2, Independent]);
        let t = tag_tokens(&tokenize("mujhe hai se"), &lex(), AmbiguityPolicy::Independent);
        assert_eq!((t.w, t.u), ([3, 0], 0));
        let ok = tokenize("ok");
        assert_eq!(tag_tokens(&ok, &lex(), AmbiguityPolicy::PreferLang2).tags, [Lang2]);
        assert_eq!(tag_tokens(&ok, &lex(), AmbiguityPolicy::PreferLang1).tags, [Lang1]);
        assert_eq!(tag_tokens(&ok, &lex(), AmbiguityPolicy::Independent).tags, [Independent]);
        assert_eq!(tag_tokens(&tokenize("unknownword"), &lex(), AmbiguityPolicy::Independent).tags, [Independent]);
    }

    #[test]
    fn cmi_examples() {
        assert_eq!(cmi_from_counts(7, 0, &[7, 0]).unwrap(), 0.0);
        assert_eq!(cmi_from_counts(10, 2, &[5, 3]).unwrap(), 37.5);
        assert_eq!(cmi_from_counts(8, 0, &[4, 4]).unwrap(), 50.0);
        assert_eq!(cmi_from_counts(3, 3, &[0, 0]).unwrap(), 0.0);
        assert!(cmi_from_counts(0, 0, &[0, 0]).is_err());
        let tagging = LanguageTagging::from_tags(vec![Lang1, Lang1, Lang1, Lang1, Lang1, Lang2, Lang2, Lang2, Independent, Independent]);
        assert_eq!(cmi(&tagging).unwrap(), 37.5);
    }

    #[test]
    fn corpus_examples() {
        let c = corpus_cmi_from_values(vec![Some(20.0), Some(40.0)]).unwrap();
        assert_eq!(c.mean_cmi, 30.0);
        let mono = corpus_cmi(&[tokenize("mujhe hai")], &lex(), AmbiguityPolicy::Independent).unwrap();
        assert_eq!(mono.mean_cmi, 0.0);
        // n = 200, u = 0, max w = 139 gives 100 · 61/200 = 30.5
        let v = cmi_from_counts(200, 0, &[139, 61]).unwrap();
        assert!((v - 30.5).abs() < 1e-12);
        let c = corpus_cmi_from_values(vec![Some(v), None, Some(v)]).unwrap();
        assert!((c.mean_cmi - 30.5).abs() < 1e-12);
        assert_eq!(c.skipped, 1);
        let empty = corpus_cmi(&[tokenize(""), tokenize("...")], &lex(), AmbiguityPolicy::Independent);
        assert!(empty.is_err());
    }

    #[test]
    fn lexicon_validation() {
        assert!(Lexicons::new(Vec::<String>::new(), ["a"]).is_err());
        assert!(Lexicons::new(["  "], ["a"]).is_err());
        let l = Lexicons::new([" Hai "], ["Fever"]).unwrap();
        assert!(l.contains_lang1("hai") && l.contains_lang2("fever"));
    }
}
