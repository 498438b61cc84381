//! Greedy cosine matching over externally supplied token embeddings
//! (BERTScore-style precision, recall and F1, uniform token weights).

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexical::PrecisionRecallF;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedText {
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

impl EmbeddedText {
    pub fn new(tokens: Vec<String>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        let e = EmbeddedText { tokens, vectors };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tokens.len() != self.vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: self.tokens.len(),
                actual: self.vectors.len(),
                context: "one vector per token".into(),
            });
        }
        let dim = self.dim();
        for (i, v) in self.vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: v.len(), context: format!("vector {i}") });
            }
            let norm = norm(v);
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::invalid(format!("vector {i} must have a positive finite norm")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm(v);
    v.iter().map(|x| x / n).collect()
}

/// Precision averages, over candidate tokens, the best cosine against any
/// reference token; recall does the same from the reference side.
pub fn embedding_score(candidate: &EmbeddedText, reference: &EmbeddedText) -> Result<PrecisionRecallF> {
    candidate.validate()?;
    reference.validate()?;
    if candidate.is_empty() || reference.is_empty() {
        return Err(Error::invalid("embedding score needs at least one token on each side"));
    }
    if candidate.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            expected: reference.dim(),
            actual: candidate.dim(),
            context: "candidate vs reference embedding dimension".into(),
        });
    }
    let cand: Vec<Vec<f64>> = candidate.vectors.iter().map(|v| unit(v)).collect();
    let refs: Vec<Vec<f64>> = reference.vectors.iter().map(|v| unit(v)).collect();
    let mut row_max = vec![f64::NEG_INFINITY; cand.len()];
    let mut col_max = vec![f64::NEG_INFINITY; refs.len()];
    for (i, c) in cand.iter().enumerate() {
        for (j, r) in refs.iter().enumerate() {
            let sim = c.iter().zip(r).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            row_max[i] = row_max[i].max(sim);
            col_max[j] = col_max[j].max(sim);
        }
    }
    let precision = row_max.iter().sum::<f64>() / cand.len() as f64;
    let recall = col_max.iter().sum::<f64>() / refs.len() as f64;
    Ok(PrecisionRecallF::from_pr(precision, recall))
}

/// One line of an embedding file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub vectors: Vec<Vec<f64>>,
}

/// Reads a line-delimited embedding file keyed by record id.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<HashMap<String, EmbeddedText>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text)
}

pub fn parse_embeddings(text: &str) -> Result<HashMap<String, EmbeddedText>> {
    let mut out = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::MalformedLine { line: idx + 1, message };
        let rec: EmbeddingRecord = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let emb = EmbeddedText::new(rec.tokens, rec.vectors).map_err(|e| malformed(e.to_string()))?;
        if out.insert(rec.id.clone(), emb).is_some() {
            return Err(malformed(format!("duplicate embedding id {:?}", rec.id)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn emb(vectors: Vec<Vec<f64>>) -> EmbeddedText {
        let tokens = (0..vectors.len()).map(|i| format!("t{i}")).collect();
        EmbeddedText::new(tokens, vectors).unwrap()
    }

    #[test]
    fn identical_vectors_score_one() {
        let v = vec![vec![1.0, 2.0, 0.5], vec![-0.3, 0.1, 4.0]];
        let s = embedding_score(&emb(v.clone()), &emb(v)).unwrap();
        assert!((s.precision - 1.0).abs() < 1e-12 && (s.recall - 1.0).abs() < 1e-12 && (s.f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_vectors_score_zero() {
        let s = embedding_score(&emb(vec![vec![1.0, 0.0, 0.0]]), &emb(vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]))
            .unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn hand_max_mean_case() {
        // unit reference axes; candidate rows give similarity rows (1, 0) and (0.5, 0.5)
        let h = 0.5f64;
        let refs = emb(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let c2 = vec![h, h, (1.0 - 2.0 * h * h).sqrt()];
        let cand = emb(vec![vec![1.0, 0.0, 0.0], c2]);
        let s = embedding_score(&cand, &refs).unwrap();
        assert!((s.precision - 0.75).abs() < 1e-12);
        assert!((s.recall - 0.75).abs() < 1e-12);
        assert!((s.f1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let a = emb(vec![vec![1.0, 0.0]]);
        let b = emb(vec![vec![1.0, 0.0, 0.0]]);
        assert!(matches!(embedding_score(&a, &b), Err(Error::DimensionMismatch { .. })));
        let empty = EmbeddedText { tokens: vec![], vectors: vec![] };
        assert!(embedding_score(&empty, &a).is_err());
        assert!(EmbeddedText::new(vec!["x".into()], vec![vec![0.0, 0.0]]).is_err());
        assert!(EmbeddedText::new(vec!["x".into(), "y".into()], vec![vec![1.0]]).is_err());
    }

    #[test]
    fn negative_cosines_keep_f_nonnegative() {
        let s = embedding_score(&emb(vec![vec![-1.0, 0.0]]), &emb(vec![vec![1.0, 0.0]])).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (-1.0, -1.0, 0.0));
    }

    #[test]
    fn parse_embedding_file() {
        let text = "{\"id\":\"q1\",\"tokens\":[\"a\"],\"vectors\":[[1.0,0.0]]}\n\n{\"id\":\"q2\",\"tokens\":[\"b\"],\"vectors\":[[0.0,1.0]]}\n";
        let m = parse_embeddings(text).unwrap();
        assert_eq!(m.len(), 2);
        let bad = "{\"id\":\"q1\",\"tokens\":[\"a\"],\"vectors\":[[0.0,0.0]]}\n";
        assert!(matches!(parse_embeddings(bad), Err(Error::MalformedLine { line: 1, .. })));
    }
}
