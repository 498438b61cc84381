//! Symptom-keyword curation: a token-level keyword trie with whole-word,
//! longest-match, left-to-right matching, corpus filtering, and the visual
//! cue sentence appended to queries that come with an image.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{Category, DatasetRecord};
use crate::error::{Error, Result};
use crate::textnorm::{collapse_whitespace, tokenize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymptomTerm {
    pub canonical: String,
    #[serde(default)]
    pub variants: Vec<String>,
}

/// Category code → symptom terms. Serialized as `{"SKIN": [{"canonical": .., "variants": [..]}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymptomTaxonomy {
    pub categories: BTreeMap<Category, Vec<SymptomTerm>>,
}

const DEFAULT_TAXONOMY: &str = include_str!("../data/taxonomy.json");

impl SymptomTaxonomy {
    /// An illustrative taxonomy built from commonly photographed symptoms of the
    /// four categories. Replace it with a curated file for real use.
    pub fn default_taxonomy() -> Self {
        serde_json::from_str(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: SymptomTaxonomy = serde_json::from_str(text)?;
        t.validate()?;
        Ok(t)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.categories.values().all(Vec::is_empty) {
            return Err(Error::invalid("taxonomy has no terms"));
        }
        let mut canon: HashMap<String, Category> = HashMap::new();
        for (cat, terms) in &self.categories {
            for term in terms {
                let key = collapse_whitespace(&term.canonical).to_lowercase();
                if key.is_empty() {
                    return Err(Error::invalid(format!("empty canonical term in {cat}")));
                }
                if let Some(prev) = canon.insert(key, *cat) {
                    return Err(Error::invalid(format!(
                        "canonical term {:?} appears in both {prev} and {cat}",
                        term.canonical
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn term_count(&self) -> usize {
        self.categories.values().map(Vec::len).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Payload {
    canonical: String,
    category: Category,
}

#[derive(Debug, Default, Clone)]
struct Node {
    children: HashMap<String, usize>,
    payload: Option<usize>,
}

/// Trie over normalized term tokens. Immutable once built.
#[derive(Debug, Clone)]
pub struct KeywordTrie {
    nodes: Vec<Node>,
    payloads: Vec<Payload>,
    variant_count: usize,
}

impl KeywordTrie {
    fn insert(&mut self, tokens: &[String], payload: usize) -> Result<()> {
        let mut node = 0;
        for tok in tokens {
            node = match self.nodes[node].children.get(tok) {
                Some(&next) => next,
                None => {
                    self.nodes.push(Node::default());
                    let id = self.nodes.len() - 1;
                    self.nodes[node].children.insert(tok.clone(), id);
                    id
                }
            };
        }
        match self.nodes[node].payload {
            Some(existing) if self.payloads[existing] != self.payloads[payload] => Err(Error::invalid(format!(
                "term {:?} maps to both {:?} and {:?}",
                tokens.join(" "),
                self.payloads[existing].canonical,
                self.payloads[payload].canonical
            ))),
            Some(_) => Ok(()),
            None => {
                self.nodes[node].payload = Some(payload);
                self.variant_count += 1;
                Ok(())
            }
        }
    }

    /// Number of distinct surface forms stored.
    pub fn len(&self) -> usize {
        self.variant_count
    }

    pub fn is_empty(&self) -> bool {
        self.variant_count == 0
    }

    /// Exact lookup of a (tokenized) surface form.
    pub fn lookup(&self, term: &str) -> Option<(&str, Category)> {
        let mut node = 0;
        for tok in tokenize(term).tokens {
            node = *self.nodes[node].children.get(&tok)?;
        }
        self.nodes[node].payload.map(|p| (self.payloads[p].canonical.as_str(), self.payloads[p].category))
    }
}

/// Inserts every canonical name and variant, tokenized exactly like the text it will match.
pub fn build_trie(taxonomy: &SymptomTaxonomy) -> Result<KeywordTrie> {
    taxonomy.validate()?;
    let mut trie = KeywordTrie { nodes: vec![Node::default()], payloads: Vec::new(), variant_count: 0 };
    for (cat, terms) in &taxonomy.categories {
        for term in terms {
            trie.payloads.push(Payload { canonical: collapse_whitespace(&term.canonical), category: *cat });
            let payload = trie.payloads.len() - 1;
            for surface in std::iter::once(&term.canonical).chain(&term.variants) {
                let tokens = tokenize(surface).tokens;
                if tokens.is_empty() {
                    return Err(Error::invalid(format!("term {surface:?} has no word tokens")));
                }
                trie.insert(&tokens, payload)?;
            }
        }
    }
    Ok(trie)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermMatch {
    pub canonical: String,
    pub category: Category,
    /// Byte span in the searched text.
    pub span: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    pub matches: Vec<TermMatch>,
    pub counts: BTreeMap<Category, usize>,
}

impl MatchResult {
    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    pub fn first_category(&self) -> Option<Category> {
        self.matches.first().map(|m| m.category)
    }
}

/// Scans tokens left to right taking the longest term that starts at each
/// position; matched tokens are consumed.
pub fn find_terms(text: &str, trie: &KeywordTrie) -> MatchResult {
    let seq = tokenize(text);
    let mut result = MatchResult::default();
    let mut i = 0;
    while i < seq.tokens.len() {
        let mut node = 0;
        let mut best: Option<(usize, usize)> = None;
        for (k, tok) in seq.tokens[i..].iter().enumerate() {
            match trie.nodes[node].children.get(tok) {
                Some(&next) => {
                    node = next;
                    if let Some(p) = trie.nodes[node].payload {
                        best = Some((i + k, p));
                    }
                }
                None => break,
            }
        }
        match best {
            Some((last, p)) => {
                let payload = &trie.payloads[p];
                result.matches.push(TermMatch {
                    canonical: payload.canonical.clone(),
                    category: payload.category,
                    span: (seq.source_spans[i].0, seq.source_spans[last].1),
                });
                *result.counts.entry(payload.category).or_default() += 1;
                i = last + 1;
            }
            None => i += 1,
        }
    }
    result
}

/// Which record field(s) must mention a taxonomy term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequireIn {
    #[default]
    Query,
    Summary,
    Either,
    Both,
}

impl std::str::FromStr for RequireIn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "query" => Ok(RequireIn::Query),
            "summary" => Ok(RequireIn::Summary),
            "either" => Ok(RequireIn::Either),
            "both" => Ok(RequireIn::Both),
            _ => Err(Error::invalid(format!("unknown field requirement {s:?}; expected query, summary, either or both"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub kept: Vec<DatasetRecord>,
    /// Kept records per category of their first match; sums to `kept.len()`.
    pub first_match_histogram: BTreeMap<Category, usize>,
    /// Kept records mentioning each category at least once.
    pub category_histogram: BTreeMap<Category, usize>,
}

/// Keeps records whose required field(s) mention a taxonomy term. The first
/// match is taken from the query, then the summary, among the fields that are
/// searched.
pub fn filter_corpus(records: &[DatasetRecord], trie: &KeywordTrie, require_in: RequireIn) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for r in records {
        let q = find_terms(&r.query_codemixed, trie);
        let s = find_terms(&r.golden_summary, trie);
        let keep = match require_in {
            RequireIn::Query => !q.is_empty(),
            RequireIn::Summary => !s.is_empty(),
            RequireIn::Either => !q.is_empty() || !s.is_empty(),
            RequireIn::Both => !q.is_empty() && !s.is_empty(),
        };
        if !keep {
            continue;
        }
        let searched: Vec<&MatchResult> = match require_in {
            RequireIn::Query => vec![&q],
            RequireIn::Summary => vec![&s],
            RequireIn::Either | RequireIn::Both => vec![&q, &s],
        };
        if let Some(cat) = searched.iter().find_map(|m| m.first_category()) {
            *out.first_match_histogram.entry(cat).or_default() += 1;
        }
        let mut cats: Vec<Category> = searched.iter().flat_map(|m| m.counts.keys().copied()).collect();
        cats.sort();
        cats.dedup();
        for c in cats {
            *out.category_histogram.entry(c).or_default() += 1;
        }
        out.kept.push(r.clone());
    }
    out
}

pub const DEFAULT_CUE_TEMPLATE: &str = "Please see what happened to my {region} in the image below.";

const CONDITION_WORDS: &[&str] = &[
    "swollen", "swelling", "rash", "rashes", "redness", "red", "ulcer", "ulcers", "itchy", "itching", "irritation",
    "growth", "lump", "lumps", "sores", "puffy", "pain",
];

/// Body region named in a disorder phrase: the phrase without its condition
/// words, e.g. `swollen tonsils` → `tonsils`. Falls back to the whole phrase.
pub fn body_region(disorder_phrase: &str) -> String {
    let words: Vec<&str> = disorder_phrase
        .split_whitespace()
        .filter(|w| !CONDITION_WORDS.contains(&w.to_lowercase().as_str()))
        .collect();
    if words.is_empty() {
        collapse_whitespace(disorder_phrase)
    } else {
        words.join(" ")
    }
}

/// Renders `template` for the record: `{region}` becomes the body region and
/// `{disorder}` the disorder phrase.
pub fn render_cue(template: &str, disorder_phrase: &str) -> String {
    template
        .replace("{region}", &body_region(disorder_phrase))
        .replace("{disorder}", &collapse_whitespace(disorder_phrase))
}

/// Appends the visual cue sentence to the query. Already-present cues are left alone.
pub fn inject_visual_cue(record: &DatasetRecord, template: &str) -> Result<DatasetRecord> {
    let disorder = record
        .disorder_phrase
        .as_deref()
        .filter(|d| !d.trim().is_empty())
        .ok_or_else(|| Error::invalid(format!("record {:?} has no disorder_phrase", record.id)))?;
    if record.image_ref.as_deref().is_none_or(|r| r.trim().is_empty()) {
        return Err(Error::invalid(format!("record {:?} has no image_ref", record.id)));
    }
    let cue = collapse_whitespace(&render_cue(template, disorder));
    let mut out = record.clone();
    let query = collapse_whitespace(&record.query_codemixed);
    if query.to_lowercase().contains(&cue.to_lowercase()) {
        return Ok(out);
    }
    let sep = if query.ends_with(['.', '?', '!']) { " " } else { ". " };
    out.query_codemixed = format!("{query}{sep}{cue}");
    Ok(out)
}
