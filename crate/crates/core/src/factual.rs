//! Fact-based human-evaluation metrics and annotator agreement.
//!
//! MMFCM scores a generated summary by the gold facts it reproduces plus a
//! bonus (or penalty) for how well it names the visual disorder:
//!
//! ```text
//! correct = |gold ∩ generated| + bonus(judgment)      bonus: +2, +1, −1, 0
//! mmfcm   = tanh(correct / |gold|)
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::normalize_text;

/// Annotator verdict on the disorder phrase of a generated summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderJudgment {
    FullyCorrect,
    PartiallyCorrect,
    Incorrect,
    Absent,
}

impl DisorderJudgment {
    pub const ALL: [DisorderJudgment; 4] = [
        DisorderJudgment::FullyCorrect,
        DisorderJudgment::PartiallyCorrect,
        DisorderJudgment::Incorrect,
        DisorderJudgment::Absent,
    ];

    pub fn bonus(self) -> i64 {
        match self {
            DisorderJudgment::FullyCorrect => 2,
            DisorderJudgment::PartiallyCorrect => 1,
            DisorderJudgment::Incorrect => -1,
            DisorderJudgment::Absent => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactAnnotation {
    gold_facts: BTreeSet<String>,
    generated_facts: BTreeSet<String>,
    pub disorder_judgment: DisorderJudgment,
}

fn normalize_facts<I, S>(facts: I, side: &str) -> Result<BTreeSet<String>>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    facts
        .into_iter()
        .map(|f| {
            let n = normalize_text(f.as_ref());
            if n.is_empty() {
                Err(Error::invalid(format!("empty {side} fact string")))
            } else {
                Ok(n)
            }
        })
        .collect()
}

impl FactAnnotation {
    /// Normalizes every fact (lowercase, collapsed whitespace). Empty fact strings
    /// are rejected; an empty gold set is allowed here and rejected by the metrics.
    pub fn new<I, J, S, T>(gold: I, generated: J, disorder_judgment: DisorderJudgment) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        J: IntoIterator<Item = T>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        Ok(FactAnnotation {
            gold_facts: normalize_facts(gold, "gold")?,
            generated_facts: normalize_facts(generated, "generated")?,
            disorder_judgment,
        })
    }

    pub fn gold_facts(&self) -> &BTreeSet<String> {
        &self.gold_facts
    }

    pub fn generated_facts(&self) -> &BTreeSet<String> {
        &self.generated_facts
    }

    pub fn correct_facts(&self) -> usize {
        self.gold_facts.intersection(&self.generated_facts).count()
    }

    fn gold_len(&self) -> Result<usize> {
        match self.gold_facts.len() {
            0 => Err(Error::EmptyGoldFacts),
            n => Ok(n),
        }
    }
}

/// Multimodal fact capturing metric, in `(−1, 1)`.
pub fn mmfcm(annotation: &FactAnnotation) -> Result<f64> {
    let gold = annotation.gold_len()?;
    let correct = annotation.correct_facts() as i64 + annotation.disorder_judgment.bonus();
    Ok((correct as f64 / gold as f64).tanh())
}

pub fn factual_recall(annotation: &FactAnnotation) -> Result<f64> {
    let gold = annotation.gold_len()?;
    Ok(annotation.correct_facts() as f64 / gold as f64)
}

/// `(omission_recall, hallucination_rate)`. Hallucination is 0 for an empty generated set.
pub fn omission_and_hallucination(annotation: &FactAnnotation) -> Result<(f64, f64)> {
    let gold = annotation.gold_len()?;
    let correct = annotation.correct_facts();
    let omission = (gold - correct) as f64 / gold as f64;
    let generated = annotation.generated_facts.len();
    let hallucination = if generated == 0 { 0.0 } else { (generated - correct) as f64 / generated as f64 };
    Ok((omission, hallucination))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    ClinicalEval,
    Fluency,
    Adequacy,
    Informativeness,
    Persuasiveness,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::ClinicalEval,
        Criterion::Fluency,
        Criterion::Adequacy,
        Criterion::Informativeness,
        Criterion::Persuasiveness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::ClinicalEval => "clinical_eval",
            Criterion::Fluency => "fluency",
            Criterion::Adequacy => "adequacy",
            Criterion::Informativeness => "informativeness",
            Criterion::Persuasiveness => "persuasiveness",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown rating criterion {s:?}")))
    }
}

/// A 1..=5 Likert rating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Rating(u8);

impl Rating {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=5).contains(&value) {
            Ok(Rating(value))
        } else {
            Err(Error::invalid(format!("rating {value} outside 1..=5")))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Rating {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Rating::new(v)
    }
}

impl From<Rating> for u8 {
    fn from(r: Rating) -> u8 {
        r.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingEntry {
    pub sample_id: String,
    pub annotator: String,
    pub criterion: Criterion,
    pub rating: Rating,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRatings {
    pub entries: Vec<RatingEntry>,
}

impl HumanRatings {
    pub fn push(&mut self, sample_id: &str, annotator: &str, criterion: Criterion, rating: u8) -> Result<()> {
        self.entries.push(RatingEntry {
            sample_id: sample_id.to_string(),
            annotator: annotator.to_string(),
            criterion,
            rating: Rating::new(rating)?,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingSummary {
    pub means: BTreeMap<Criterion, f64>,
    /// Requested criteria with no ratings; left out of `means`.
    pub missing: Vec<Criterion>,
}

impl RatingSummary {
    /// Two-decimal rendering, e.g. `fluency = 4.80`.
    pub fn render(&self) -> String {
        let mut parts: Vec<String> = self.means.iter().map(|(c, m)| format!("{c} = {m:.2}")).collect();
        parts.extend(self.missing.iter().map(|c| format!("{c} = NA (no ratings)")));
        parts.join(", ")
    }
}

/// Mean rating per requested criterion over all samples and annotators.
pub fn aggregate_ratings(ratings: &HumanRatings, criteria: &[Criterion]) -> RatingSummary {
    let mut sums: HashMap<Criterion, (u64, u64)> = HashMap::new();
    for e in &ratings.entries {
        let s = sums.entry(e.criterion).or_default();
        s.0 += u64::from(e.rating.get());
        s.1 += 1;
    }
    let mut summary = RatingSummary { means: BTreeMap::new(), missing: Vec::new() };
    for &c in criteria {
        match sums.get(&c) {
            Some(&(total, count)) if count > 0 => {
                summary.means.insert(c, total as f64 / count as f64);
            }
            _ => summary.missing.push(c),
        }
    }
    summary
}

/// Cohen's kappa for two annotators over nominal labels.
pub fn cohen_kappa<T: Eq + Hash>(labels_a: &[T], labels_b: &[T]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::DimensionMismatch {
            expected: labels_a.len(),
            actual: labels_b.len(),
            context: "kappa label lists".into(),
        });
    }
    if labels_a.is_empty() {
        return Err(Error::invalid("kappa needs at least one labelled item"));
    }
    let n = labels_a.len() as f64;
    let agree = labels_a.iter().zip(labels_b).filter(|(a, b)| a == b).count() as f64;
    let mut marg_a: HashMap<&T, usize> = HashMap::new();
    let mut marg_b: HashMap<&T, usize> = HashMap::new();
    for a in labels_a {
        *marg_a.entry(a).or_default() += 1;
    }
    for b in labels_b {
        *marg_b.entry(b).or_default() += 1;
    }
    let p_o = agree / n;
    let p_e: f64 = marg_a
        .iter()
        .map(|(label, &ca)| ca as f64 * marg_b.get(label).copied().unwrap_or(0) as f64)
        .sum::<f64>()
        / (n * n);
    if p_e >= 1.0 {
        return if p_o >= 1.0 {
            Ok(1.0)
        } else {
            Err(Error::DegenerateAgreement("chance agreement is 1 but the annotators disagree".into()))
        };
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Mean pairwise Cohen's kappa across all annotator pairs.
pub fn multi_annotator_kappa<T: Eq + Hash>(label_lists: &[Vec<T>]) -> Result<f64> {
    if label_lists.len() < 2 {
        return Err(Error::invalid("multi-annotator kappa needs at least two annotators"));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..label_lists.len() {
        for j in i + 1..label_lists.len() {
            total += cohen_kappa(&label_lists[i], &label_lists[j])?;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

/// One line of an annotation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    /// Model/system label used to group rows of a report.
    #[serde(default = "default_model")]
    pub model: String,
    /// Unimodal runs have no visual input, so MMFCM does not apply to them.
    #[serde(default)]
    pub unimodal: bool,
    pub gold_facts: Vec<String>,
    pub generated_facts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder_judgment: Option<DisorderJudgment>,
    #[serde(default)]
    pub ratings: BTreeMap<Criterion, Vec<Rating>>,
}

fn default_model() -> String {
    "default".to_string()
}

impl AnnotationRecord {
    pub fn annotation(&self) -> Result<FactAnnotation> {
        FactAnnotation::new(
            &self.gold_facts,
            &self.generated_facts,
            self.disorder_judgment.unwrap_or(DisorderJudgment::Absent),
        )
    }
}

/// Parses a line-delimited annotation file. Blank lines are skipped.
pub fn parse_annotations(text: &str) -> Result<Vec<AnnotationRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: AnnotationRecord = serde_json::from_str(line)
            .map_err(|e| Error::MalformedLine { line: idx + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}
