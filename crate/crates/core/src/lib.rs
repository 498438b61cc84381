//! Measurement, curation and modelling kernels for multimodal summarization of
//! code-mixed (Hindi-English) medical queries.
//!
//! The crate is organised by concern:
//!
//! * [`data`]: corpus records, line-delimited corpus IO, dedup and seeded splits.
//! * [`textnorm`]: tokenization, n-grams and post-processing of generated text.
//! * [`lexical`]: ROUGE-1/2/L, cumulative BLEU-1..4 and exact-match METEOR.
//! * [`embedding`]: greedy cosine matching over supplied token embeddings.
//! * [`factual`]: the multimodal fact capturing metric (MMFCM), factual recall,
//!   hallucination rate, rating aggregation and Cohen's kappa.
//! * [`codemix`]: lexicon-driven language tagging and the code-mixing index.
//! * [`curation`]: symptom taxonomy, token trie matching, corpus filtering and
//!   visual-cue injection.
//! * [`fusion`]: a desk-scale fusion model: projected vision slot, frozen 4-bit
//!   base, low-rank adapters, next-token training and greedy decoding.

pub mod codemix;
pub mod curation;
pub mod data;
pub mod embedding;
mod error;
pub mod factual;
pub mod fusion;
pub mod lexical;
pub mod textnorm;

pub use codemix::{cmi, corpus_cmi, tag_tokens, AmbiguityPolicy, LanguageTag, LanguageTagging, Lexicons};
pub use curation::{
    build_trie, filter_corpus, find_terms, inject_visual_cue, KeywordTrie, MatchResult, RequireIn,
    SymptomTaxonomy,
};
pub use data::{dedup, load_corpus, split, write_corpus, Category, CorpusSplit, DatasetRecord, GenerationOutput};
pub use embedding::{embedding_score, EmbeddedText};
pub use error::{Error, Result};
pub use factual::{
    aggregate_ratings, cohen_kappa, factual_recall, mmfcm, multi_annotator_kappa, omission_and_hallucination,
    DisorderJudgment, FactAnnotation, HumanRatings,
};
pub use lexical::{bleu, meteor, rouge_l, rouge_n, BleuScore, PrecisionRecallF};
pub use textnorm::{ngrams, postprocess_generation, tokenize, TokenSeq};
