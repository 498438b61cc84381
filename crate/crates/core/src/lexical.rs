//! Single-reference lexical overlap metrics: ROUGE-1/2, ROUGE-L, cumulative
//! BLEU-1..4 and exact-match METEOR. All scores are fractions in `[0, 1]`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::{ngrams_of, TokenSeq};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PrecisionRecallF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl PrecisionRecallF {
    /// Harmonic mean, zero when `precision + recall <= 0`.
    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
        PrecisionRecallF { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BleuScore {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub brevity_penalty: f64,
    /// Clipped (modified) n-gram precisions p1..p4.
    pub precisions: [f64; 4],
}

impl BleuScore {
    pub fn cumulative(&self) -> [f64; 4] {
        [self.b1, self.b2, self.b3, self.b4]
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Clipped overlap count and the totals on each side.
fn ngram_overlap(candidate: &[String], reference: &[String], n: usize) -> (usize, usize, usize) {
    let cand = ngrams_of(candidate, n).expect("n >= 1");
    let refs = ngrams_of(reference, n).expect("n >= 1");
    let overlap = cand.iter().map(|(g, &c)| c.min(refs.get(g).copied().unwrap_or(0))).sum();
    let cand_total = candidate.len().saturating_sub(n - 1).min(candidate.len());
    let ref_total = reference.len().saturating_sub(n - 1).min(reference.len());
    (overlap, cand_total, ref_total)
}

/// ROUGE-N for `n` in {1, 2}.
pub fn rouge_n(candidate: &TokenSeq, reference: &TokenSeq, n: usize) -> Result<PrecisionRecallF> {
    if !(1..=2).contains(&n) {
        return Err(Error::invalid(format!("ROUGE-N supports n = 1 or 2, got {n}")));
    }
    let (overlap, c, r) = ngram_overlap(&candidate.tokens, &reference.tokens, n);
    Ok(PrecisionRecallF::from_pr(ratio(overlap, c), ratio(overlap, r)))
}

/// Length of the longest common subsequence, O(|a|·|b|) time and O(|b|) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> PrecisionRecallF {
    let l = lcs_len(&candidate.tokens, &reference.tokens);
    PrecisionRecallF::from_pr(ratio(l, candidate.len()), ratio(l, reference.len()))
}

/// Cumulative BLEU-1..4 against a single reference, uniform weights, no smoothing.
pub fn bleu(candidate: &TokenSeq, reference: &TokenSeq) -> BleuScore {
    let c = candidate.len();
    let r = reference.len();
    if c == 0 {
        return BleuScore::default();
    }
    let mut precisions = [0.0; 4];
    for (k, p) in precisions.iter_mut().enumerate() {
        let (overlap, cand_total, _) = ngram_overlap(&candidate.tokens, &reference.tokens, k + 1);
        *p = ratio(overlap, cand_total);
    }
    let brevity_penalty = if c > r { 1.0 } else { (1.0 - r as f64 / c as f64).exp() };
    let mut cumulative = [0.0; 4];
    let mut log_sum = 0.0;
    for n in 0..4 {
        if precisions[..=n].iter().any(|&p| p == 0.0) {
            break;
        }
        log_sum += precisions[n].ln();
        cumulative[n] = brevity_penalty * (log_sum / (n + 1) as f64).exp();
    }
    BleuScore {
        b1: cumulative[0],
        b2: cumulative[1],
        b3: cumulative[2],
        b4: cumulative[3],
        brevity_penalty,
        precisions,
    }
}

pub const METEOR_ALPHA: f64 = 0.9;
pub const METEOR_BETA: f64 = 3.0;
pub const METEOR_GAMMA: f64 = 0.5;

/// Result of the exact-match alignment used by [`meteor`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub matches: usize,
    pub chunks: usize,
    /// `pairs[i] = Some(j)` when candidate token `i` is aligned to reference token `j`.
    pub pairs: Vec<Option<usize>>,
    /// False only when the search budget ran out before optimality was proven.
    pub exact: bool,
}

/// Node budget of the chunk-minimising search. Minimising chunks is a common
/// string partition problem; the budget is only reached on long, highly
/// repetitive inputs.
pub const ALIGNMENT_SEARCH_BUDGET: usize = 2_000_000;

struct AlignSearch {
    cand_type: Vec<usize>,
    ref_positions: Vec<Vec<usize>>,
    remaining_after: Vec<usize>,
    // bound[i]: adjacent candidate pairs (k, k+1) with k >= i whose bigram occurs in the reference
    bound: Vec<usize>,
    used: Vec<bool>,
    need: Vec<usize>,
    current: Vec<Option<usize>>,
    best: Option<(usize, Vec<Option<usize>>)>,
    nodes: usize,
    budget: usize,
}

impl AlignSearch {
    fn run(&mut self, i: usize, prev: Option<usize>, continuations: usize) {
        self.nodes += 1;
        if self.nodes > self.budget && self.best.is_some() {
            return;
        }
        if i == self.cand_type.len() {
            if self.best.as_ref().is_none_or(|(b, _)| continuations > *b) {
                self.best = Some((continuations, self.current.clone()));
            }
            return;
        }
        if let Some((best, _)) = &self.best {
            let reachable = continuations + if i == 0 { self.bound[0] } else { self.bound[i - 1] };
            if reachable <= *best {
                return;
            }
        }
        let t = self.cand_type[i];
        let can_skip = self.remaining_after[i] >= self.need[t];
        if self.need[t] > 0 {
            // the continuing position first, then the rest in order
            let next = prev.map(|p| p + 1);
            let mut order: Vec<usize> = Vec::with_capacity(self.ref_positions[t].len());
            if let Some(nx) = next {
                if self.ref_positions[t].contains(&nx) && !self.used[nx] {
                    order.push(nx);
                }
            }
            order.extend(self.ref_positions[t].iter().copied().filter(|&j| Some(j) != next && !self.used[j]));
            for j in order {
                self.used[j] = true;
                self.need[t] -= 1;
                self.current[i] = Some(j);
                let gain = usize::from(next == Some(j));
                self.run(i + 1, Some(j), continuations + gain);
                self.current[i] = None;
                self.need[t] += 1;
                self.used[j] = false;
            }
        }
        if can_skip {
            self.run(i + 1, None, continuations);
        }
    }
}

/// Maximum-match exact unigram alignment with the fewest chunks.
pub fn align(candidate: &[String], reference: &[String]) -> Alignment {
    align_with_budget(candidate, reference, ALIGNMENT_SEARCH_BUDGET)
}

pub fn align_with_budget(candidate: &[String], reference: &[String], budget: usize) -> Alignment {
    let mut type_ids: HashMap<&str, usize> = HashMap::new();
    let mut all_ids = Vec::with_capacity(candidate.len() + reference.len());
    for s in candidate.iter().chain(reference) {
        let next = type_ids.len();
        all_ids.push(*type_ids.entry(s.as_str()).or_insert(next));
    }
    let ref_type = all_ids.split_off(candidate.len());
    let cand_type = all_ids;
    let n_types = type_ids.len();
    let mut ref_positions = vec![Vec::new(); n_types];
    for (j, &t) in ref_type.iter().enumerate() {
        ref_positions[t].push(j);
    }
    let mut cand_count = vec![0usize; n_types];
    for &t in &cand_type {
        cand_count[t] += 1;
    }
    let need: Vec<usize> = (0..n_types).map(|t| cand_count[t].min(ref_positions[t].len())).collect();
    let matches: usize = need.iter().sum();

    let mut remaining_after = vec![0usize; cand_type.len()];
    let mut seen = vec![0usize; n_types];
    for i in (0..cand_type.len()).rev() {
        remaining_after[i] = seen[cand_type[i]];
        seen[cand_type[i]] += 1;
    }
    let ref_bigrams: std::collections::HashSet<(usize, usize)> =
        ref_type.windows(2).map(|w| (w[0], w[1])).collect();
    let mut bound = vec![0usize; cand_type.len() + 1];
    for k in (0..cand_type.len().saturating_sub(1)).rev() {
        bound[k] = bound[k + 1] + usize::from(ref_bigrams.contains(&(cand_type[k], cand_type[k + 1])));
    }

    let mut search = AlignSearch {
        cand_type,
        ref_positions,
        remaining_after,
        bound,
        used: vec![false; reference.len()],
        need,
        current: vec![None; candidate.len()],
        best: None,
        nodes: 0,
        budget,
    };
    search.run(0, None, 0);
    let exact = search.nodes <= budget;
    let (continuations, pairs) = search.best.expect("the search always reaches a leaf");
    Alignment { matches, chunks: matches - continuations, pairs, exact }
}

/// METEOR with exact matching only: `F_mean · (1 − γ·(chunks/m)^β)`.
pub fn meteor(candidate: &TokenSeq, reference: &TokenSeq) -> f64 {
    let a = align(&candidate.tokens, &reference.tokens);
    meteor_from_alignment(a.matches, a.chunks, candidate.len(), reference.len())
}

pub fn meteor_from_alignment(matches: usize, chunks: usize, cand_len: usize, ref_len: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let p = m / cand_len as f64;
    let r = m / ref_len as f64;
    let f_mean = p * r / (METEOR_ALPHA * p + (1.0 - METEOR_ALPHA) * r);
    let penalty = METEOR_GAMMA * (chunks as f64 / m).powf(METEOR_BETA);
    f_mean * (1.0 - penalty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textnorm::tokenize;

    fn t(s: &str) -> TokenSeq {
        tokenize(s)
    }

    #[test]
    fn rouge_examples() {
        let same = rouge_n(&t("the cat sat"), &t("the cat sat"), 1).unwrap();
        assert_eq!(same, PrecisionRecallF { precision: 1.0, recall: 1.0, f1: 1.0 });
        let r1 = rouge_n(&t("the cat"), &t("the cat sat"), 1).unwrap();
        assert_eq!(r1.precision, 1.0);
        assert!((r1.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((r1.f1 - 0.8).abs() < 1e-15);
        assert_eq!(rouge_n(&t(""), &t("the cat"), 2).unwrap(), PrecisionRecallF::default());
        assert!(rouge_n(&t("a"), &t("a"), 3).is_err());
    }

    #[test]
    fn rouge_l_examples() {
        let r = rouge_l(&t("the cat sat on mat"), &t("the cat on the mat"));
        assert!((r.precision - 0.8).abs() < 1e-15 && (r.recall - 0.8).abs() < 1e-15 && (r.f1 - 0.8).abs() < 1e-15);
        assert_eq!(rouge_l(&t("a b c"), &t("a b c")).f1, 1.0);
        assert_eq!(rouge_l(&t("a b c"), &t("x y")).f1, 0.0);
    }

    #[test]
    fn bleu_examples() {
        let b = bleu(&t("the cat sat on the mat"), &t("the cat sat on the mat"));
        assert_eq!(b.cumulative(), [1.0; 4]);
        assert_eq!(b.brevity_penalty, 1.0);
        let b = bleu(&t("the cat"), &t("the cat sat"));
        assert_eq!(b.precisions[0], 1.0);
        assert!((b.brevity_penalty - (-0.5f64).exp()).abs() < 1e-15);
        assert!((b.b1 - 0.606_530_659_712_633_4).abs() < 1e-12);
        // no trigram exists in a two-token candidate
        assert_eq!(b.b3, 0.0);
        assert_eq!(bleu(&t("x y z w"), &t("a b c d")).cumulative(), [0.0; 4]);
        assert_eq!(bleu(&t(""), &t("a b")), BleuScore::default());
    }

    #[test]
    fn meteor_examples() {
        let same = meteor(&t("the cat sat"), &t("the cat sat"));
        assert!((same - (1.0 - 0.5 / 27.0)).abs() < 1e-12);
        assert!((same - 0.981_481).abs() < 1e-6);
        assert_eq!(meteor(&t("a b"), &t("c d")), 0.0);
        let a = align(&t("cat the sat").tokens, &t("the cat sat").tokens);
        assert_eq!((a.matches, a.chunks), (3, 3));
        assert!(meteor(&t("cat the sat"), &t("the cat sat")) < same);
    }

    #[test]
    fn alignment_prefers_fewer_chunks_with_repeats() {
        // greedy left-to-right pairing of "the" would break the "the mat" chunk
        let a = align(&t("the mat the cat").tokens, &t("the cat the mat").tokens);
        assert_eq!(a.matches, 4);
        assert_eq!(a.chunks, 2);
        assert!(a.exact);
    }
}
