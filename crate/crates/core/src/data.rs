//! Corpus records, the line-delimited corpus format, dedup and seeded splits.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::normalize_text;

/// Symptom category of a multimodal sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "ENT")]
    Ent,
    #[serde(rename = "EYE")]
    Eye,
    #[serde(rename = "LIMB")]
    Limb,
    #[serde(rename = "SKIN")]
    Skin,
}

impl Category {
    pub const ALL: [Category; 4] = [Category::Ent, Category::Eye, Category::Limb, Category::Skin];

    pub fn code(self) -> &'static str {
        match self {
            Category::Ent => "ENT",
            Category::Eye => "EYE",
            Category::Limb => "LIMB",
            Category::Skin => "SKIN",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Category::ALL
            .into_iter()
            .find(|c| c.code().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown category {s:?}; expected ENT, EYE, LIMB or SKIN")))
    }
}

/// One sample: a code-mixed query, an optional vision feature and its golden summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub query_codemixed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_english: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_feature: Option<Vec<f64>>,
    pub golden_summary: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder_phrase: Option<String>,
    #[serde(default)]
    pub gold_facts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<Category>,
}

impl DatasetRecord {
    pub fn new(id: impl Into<String>, query: impl Into<String>, golden_summary: impl Into<String>) -> Self {
        DatasetRecord {
            id: id.into(),
            query_codemixed: query.into(),
            query_english: None,
            image_ref: None,
            image_feature: None,
            golden_summary: golden_summary.into(),
            disorder_phrase: None,
            gold_facts: Vec::new(),
            category: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::invalid("record id is empty"));
        }
        if self.query_codemixed.trim().is_empty() {
            return Err(Error::invalid(format!("record {:?} has an empty query_codemixed", self.id)));
        }
        if let Some(v) = &self.image_feature {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(format!("record {:?} has a non-finite image_feature value", self.id)));
            }
        }
        Ok(())
    }
}

/// Model output: a symptom note and a summary, plus the raw decoded text.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenerationOutput {
    pub symptom_note: String,
    pub summary: String,
    pub raw: String,
    pub parse_failed: bool,
}

pub const SYMPTOM_TAG: &str = "SYMPTOM:";
pub const SUMMARY_TAG: &str = "SUMMARY:";

impl GenerationOutput {
    /// Renders the serialization contract `SYMPTOM: <T> | SUMMARY: <S>`.
    pub fn serialize_target(symptom_note: &str, summary: &str) -> String {
        format!("{SYMPTOM_TAG} {} | {SUMMARY_TAG} {}", symptom_note.trim(), summary.trim())
    }

    /// Parses raw decoder output. Anything that does not follow the contract
    /// yields empty fields and `parse_failed = true`.
    pub fn parse(raw: &str) -> Self {
        let failed = || GenerationOutput { raw: raw.to_string(), parse_failed: true, ..Default::default() };
        let Some(rest) = raw.trim().strip_prefix(SYMPTOM_TAG) else {
            return failed();
        };
        let Some((symptom, summary)) = rest.split_once('|') else {
            return failed();
        };
        let Some(summary) = summary.trim_start().strip_prefix(SUMMARY_TAG) else {
            return failed();
        };
        let symptom = symptom.trim();
        if symptom.is_empty() {
            return failed();
        }
        GenerationOutput {
            symptom_note: symptom.to_string(),
            summary: summary.trim().to_string(),
            raw: raw.to_string(),
            parse_failed: false,
        }
    }
}

/// Train/validation/test partition of corpus ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSplit {
    pub train_ids: Vec<String>,
    pub val_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub seed: u64,
    pub ratios: [f64; 3],
    #[serde(default)]
    pub stratified: bool,
}

impl CorpusSplit {
    pub fn counts(&self) -> (usize, usize, usize) {
        (self.train_ids.len(), self.val_ids.len(), self.test_ids.len())
    }
}

/// Parses corpus text (one JSON record per line). Blank lines are skipped.
/// When `feature_dim` is `None`, the first image feature fixes the dimension.
pub fn parse_corpus(text: &str, feature_dim: Option<usize>) -> Result<Vec<DatasetRecord>> {
    let mut records = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut dim = feature_dim;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(line)
            .map_err(|e| Error::MalformedLine { line: line_no, message: e.to_string() })?;
        record
            .validate()
            .map_err(|e| Error::MalformedLine { line: line_no, message: e.to_string() })?;
        if let Some(v) = &record.image_feature {
            match dim {
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        actual: v.len(),
                        context: format!("image_feature of record {:?} on line {line_no}", record.id),
                    })
                }
                Some(_) => {}
                None => dim = Some(v.len()),
            }
        }
        if let Some(&first_line) = seen.get(&record.id) {
            return Err(Error::DuplicateId { id: record.id, first_line, second_line: line_no });
        }
        seen.insert(record.id.clone(), line_no);
        records.push(record);
    }
    Ok(records)
}

pub fn load_corpus(path: impl AsRef<Path>, feature_dim: Option<usize>) -> Result<Vec<DatasetRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, feature_dim)
}

/// Canonical serialization: one compact JSON object per line, fields in declaration order.
pub fn corpus_to_string(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_corpus(path: impl AsRef<Path>, records: &[DatasetRecord]) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, corpus_to_string(records)?).map_err(|e| Error::io(path, e))
}

/// Removes records whose normalized query repeats an earlier one. Keeps the first
/// occurrence and the input order.
pub fn dedup(records: Vec<DatasetRecord>) -> (Vec<DatasetRecord>, usize) {
    let mut seen = HashSet::new();
    let before = records.len();
    let kept: Vec<_> = records
        .into_iter()
        .filter(|r| seen.insert(normalize_text(&r.query_codemixed)))
        .collect();
    let removed = before - kept.len();
    (kept, removed)
}

const RATIO_TOLERANCE: f64 = 1e-9;

fn floor_share(n: usize, ratio: f64) -> usize {
    // the tolerance absorbs products such as 0.29 * 100 = 28.999999999999996
    ((n as f64) * ratio + RATIO_TOLERANCE).floor() as usize
}

fn partition_counts(n: usize, ratios: [f64; 3]) -> (usize, usize) {
    let train = floor_share(n, ratios[0]).min(n);
    let val = floor_share(n, ratios[1]).min(n - train);
    (train, val)
}

/// Seeded shuffle followed by floor/floor/remainder allocation.
///
/// With `stratify`, each category (records without one form their own group)
/// is shuffled and allocated separately, in the fixed order ENT, EYE, LIMB,
/// SKIN, uncategorised.
pub fn split(records: &[DatasetRecord], ratios: [f64; 3], seed: u64, stratify: bool) -> Result<CorpusSplit> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) {
        return Err(Error::invalid(format!("split ratios must be non-negative, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > RATIO_TOLERANCE {
        return Err(Error::invalid(format!("split ratios must sum to 1, got {sum}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = CorpusSplit {
        train_ids: Vec::new(),
        val_ids: Vec::new(),
        test_ids: Vec::new(),
        seed,
        ratios,
        stratified: stratify,
    };
    let groups: Vec<Vec<String>> = if stratify {
        let mut by_cat: BTreeMap<Option<Category>, Vec<String>> = BTreeMap::new();
        for r in records {
            by_cat.entry(r.category).or_default().push(r.id.clone());
        }
        // BTreeMap orders None first; move it last
        let mut groups: Vec<(Option<Category>, Vec<String>)> = by_cat.into_iter().collect();
        groups.sort_by_key(|(c, _)| (c.is_none(), *c));
        groups.into_iter().map(|(_, ids)| ids).collect()
    } else {
        vec![records.iter().map(|r| r.id.clone()).collect()]
    };
    for mut ids in groups {
        ids.shuffle(&mut rng);
        let (n_train, n_val) = partition_counts(ids.len(), ratios);
        let test = ids.split_off(n_train + n_val);
        let val = ids.split_off(n_train);
        out.train_ids.extend(ids);
        out.val_ids.extend(val);
        out.test_ids.extend(test);
    }
    Ok(out)
}
