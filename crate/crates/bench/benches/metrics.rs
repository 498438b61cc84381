use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use medsumm_bench::sentence;
use medsumm_core::{bleu, build_trie, find_terms, meteor, rouge_l, rouge_n, SymptomTaxonomy};

fn lexical(c: &mut Criterion) {
    let mut group = c.benchmark_group("lexical");
    for len in [16, 64, 256] {
        let (cand, reference) = (sentence(1, len), sentence(2, len));
        group.bench_with_input(BenchmarkId::new("rouge2", len), &len, |b, _| {
            b.iter(|| rouge_n(black_box(&cand), black_box(&reference), 2).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rougeL", len), &len, |b, _| {
            b.iter(|| rouge_l(black_box(&cand), black_box(&reference)))
        });
        group.bench_with_input(BenchmarkId::new("bleu", len), &len, |b, _| {
            b.iter(|| bleu(black_box(&cand), black_box(&reference)))
        });
        group.bench_with_input(BenchmarkId::new("meteor", len), &len, |b, _| {
            b.iter(|| meteor(black_box(&cand), black_box(&reference)))
        });
    }
    group.finish();
}

fn keyword_scan(c: &mut Criterion) {
    let trie = build_trie(&SymptomTaxonomy::default_taxonomy()).unwrap();
    let text = sentence(3, 512).joined();
    c.bench_function("find_terms/512", |b| b.iter(|| find_terms(black_box(&text), &trie)));
}

criterion_group!(benches, lexical, keyword_scan);
criterion_main!(benches);
