//! Independent reference implementations used as test oracles. Each one is
//! written the slow, obvious way and shares no code with the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const ALPHABET: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Random token list over the first `alphabet` letters, length in `0..=max_len`.
pub fn random_tokens(rng: &mut ChaCha8Rng, alphabet: usize, max_len: usize) -> Vec<String> {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| ALPHABET[rng.random_range(0..alphabet)].to_string()).collect()
}

/// Clipped n-gram overlap by explicit matching: each candidate n-gram takes an
/// unused equal reference n-gram if one is left.
pub fn clipped_overlap(cand: &[String], reference: &[String], n: usize) -> (usize, usize, usize) {
    let grams = |s: &[String]| -> Vec<Vec<String>> {
        if s.len() < n {
            Vec::new()
        } else {
            (0..=s.len() - n).map(|i| s[i..i + n].to_vec()).collect()
        }
    };
    let c = grams(cand);
    let r = grams(reference);
    let mut used = vec![false; r.len()];
    let mut overlap = 0;
    for g in &c {
        if let Some(k) = (0..r.len()).find(|&k| !used[k] && &r[k] == g) {
            used[k] = true;
            overlap += 1;
        }
    }
    (overlap, c.len(), r.len())
}

pub fn frac(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Textbook full-table LCS.
pub fn lcs_table(a: &[String], b: &[String]) -> usize {
    let mut t = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            t[i][j] = if a[i - 1] == b[j - 1] { t[i - 1][j - 1] + 1 } else { t[i - 1][j].max(t[i][j - 1]) };
        }
    }
    t[a.len()][b.len()]
}

/// Enumerates every one-to-one exact alignment and returns
/// `(max matches, min chunks among maximal alignments)`.
pub fn brute_alignment(cand: &[String], reference: &[String]) -> (usize, usize) {
    fn chunks(pairs: &[(usize, usize)]) -> usize {
        let mut sorted = pairs.to_vec();
        sorted.sort();
        let mut c = 0;
        for (k, &(i, j)) in sorted.iter().enumerate() {
            if k == 0 || !(sorted[k - 1].0 + 1 == i && sorted[k - 1].1 + 1 == j) {
                c += 1;
            }
        }
        c
    }
    fn go(
        i: usize,
        cand: &[String],
        reference: &[String],
        used: &mut Vec<bool>,
        pairs: &mut Vec<(usize, usize)>,
        best: &mut (usize, usize),
    ) {
        if i == cand.len() {
            let m = pairs.len();
            let ch = chunks(pairs);
            if m > best.0 || (m == best.0 && ch < best.1) {
                *best = (m, ch);
            }
            return;
        }
        go(i + 1, cand, reference, used, pairs, best);
        for j in 0..reference.len() {
            if !used[j] && cand[i] == reference[j] {
                used[j] = true;
                pairs.push((i, j));
                go(i + 1, cand, reference, used, pairs, best);
                pairs.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (0, usize::MAX);
    go(0, cand, reference, &mut vec![false; reference.len()], &mut Vec::new(), &mut best);
    if best.0 == 0 {
        (0, 0)
    } else {
        best
    }
}

pub fn meteor_direct(cand_len: usize, ref_len: usize, matches: usize, chunks: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let p = matches as f64 / cand_len as f64;
    let r = matches as f64 / ref_len as f64;
    let f_mean = p * r / (0.9 * p + 0.1 * r);
    let penalty = 0.5 * (chunks as f64 / matches as f64).powi(3);
    f_mean * (1.0 - penalty)
}

/// Line-by-line transcription of the fact capturing algorithm. `judgment` is
/// one of "fully", "partially", "incorrect", "absent".
pub fn mmfcm_direct(gold: &[&str], generated: &[&str], judgment: &str) -> f64 {
    let mut correct_facts = 0.0;
    for fact in generated {
        if gold.contains(fact) {
            correct_facts += 1.0;
        }
    }
    if judgment == "fully" {
        correct_facts += 2.0;
    } else if judgment == "partially" {
        correct_facts += 1.0;
    } else if judgment == "incorrect" {
        correct_facts -= 1.0;
    }
    (correct_facts / gold.len() as f64).tanh()
}

/// Kappa from a square confusion matrix of counts.
pub fn kappa_from_confusion(m: &[Vec<usize>]) -> f64 {
    let k = m.len();
    let n: usize = m.iter().flatten().sum();
    let n = n as f64;
    let p_o = (0..k).map(|i| m[i][i]).sum::<usize>() as f64 / n;
    let p_e = (0..k)
        .map(|i| {
            let row: usize = m[i].iter().sum();
            let col: usize = (0..k).map(|r| m[r][i]).sum();
            row as f64 * col as f64
        })
        .sum::<f64>()
        / (n * n);
    (p_o - p_e) / (1.0 - p_e)
}

pub fn confusion(a: &[usize], b: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; k]; k];
    for (&x, &y) in a.iter().zip(b) {
        m[x][y] += 1;
    }
    m
}

/// CMI straight from a tag list: 0 = lang1, 1 = lang2, 2 = independent.
pub fn cmi_direct(tags: &[u8]) -> f64 {
    let n = tags.len();
    let u = tags.iter().filter(|&&t| t == 2).count();
    if n == u {
        return 0.0;
    }
    let w1 = tags.iter().filter(|&&t| t == 0).count();
    let w2 = tags.iter().filter(|&&t| t == 1).count();
    100.0 * (1.0 - w1.max(w2) as f64 / (n - u) as f64)
}

/// Longest-match scanner that tries every term at every position.
/// Returns `(start token, end token exclusive, term index)`.
pub fn naive_scan(tokens: &[String], terms: &[Vec<String>]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<(usize, usize)> = None;
        for (t, term) in terms.iter().enumerate() {
            let fits = i + term.len() <= tokens.len() && tokens[i..i + term.len()] == term[..];
            if fits && best.is_none_or(|(len, _)| term.len() > len) {
                best = Some((term.len(), t));
            }
        }
        match best {
            Some((len, t)) => {
                out.push((i, i + len, t));
                i += len;
            }
            None => i += 1,
        }
    }
    out
}

pub type Mat = Vec<Vec<f64>>;

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a[i][t] * b[t][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

fn add_scaled(a: &Mat, b: &Mat, s: f64) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + s * q).collect()).collect()
}

/// Dense weights of the fusion model, already dequantized.
pub struct DenseFusion {
    pub embedding: Mat,
    pub positions: Mat,
    pub w_q: Mat,
    pub w_k: Mat,
    pub w_v: Mat,
    pub w_o: Mat,
    pub head: Mat,
    pub projection: Mat,
    pub q_b: Mat,
    pub q_a: Mat,
    pub v_b: Mat,
    pub v_a: Mat,
    pub scaling: f64,
}

impl DenseFusion {
    /// Straightforward forward pass: materialized effective weights, explicit
    /// masked attention loops.
    pub fn logits(&self, vision: Option<&[f64]>, tokens: &[usize]) -> Mat {
        let d = self.w_q.len();
        let mut x: Mat = Vec::new();
        if let Some(v) = vision {
            x.push((0..d).map(|i| (0..v.len()).map(|j| self.projection[i][j] * v[j]).sum()).collect());
        }
        for &t in tokens {
            x.push(self.embedding[t].clone());
        }
        for (p, row) in x.iter_mut().enumerate() {
            for i in 0..d {
                row[i] += self.positions[p][i];
            }
        }
        let wq = add_scaled(&self.w_q, &matmul(&self.q_b, &self.q_a), self.scaling);
        let wv = add_scaled(&self.w_v, &matmul(&self.v_b, &self.v_a), self.scaling);
        let q = matmul(&x, &transpose(&wq));
        let k = matmul(&x, &transpose(&self.w_k));
        let v = matmul(&x, &transpose(&wv));
        let n = x.len();
        let mut ctx = vec![vec![0.0; d]; n];
        for t in 0..n {
            let scores: Vec<f64> =
                (0..=t).map(|j| (0..d).map(|i| q[t][i] * k[j][i]).sum::<f64>() / (d as f64).sqrt()).collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            for j in 0..=t {
                for i in 0..d {
                    ctx[t][i] += exps[j] / z * v[j][i];
                }
            }
        }
        let out = matmul(&ctx, &transpose(&self.w_o));
        let h = add_scaled(&x, &out, 1.0);
        matmul(&h, &transpose(&self.head))
    }
}
