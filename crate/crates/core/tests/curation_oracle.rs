mod oracles;

use std::collections::BTreeMap;

use medsumm_core::curation::SymptomTerm;
use medsumm_core::{build_trie, filter_corpus, find_terms, tokenize, Category, DatasetRecord, RequireIn, SymptomTaxonomy};
use oracles::*;
use rand::seq::IndexedRandom;
use rand::Rng;

const POOL: [&str; 10] = ["skin", "rash", "eye", "red", "knee", "swelling", "mujhe", "hai", "lip", "ulcer"];

/// 50 distinct terms of one to three pool words, each in a random category.
fn random_taxonomy(rng: &mut rand_chacha::ChaCha8Rng) -> (SymptomTaxonomy, Vec<Vec<String>>) {
    let mut terms: Vec<Vec<String>> = Vec::new();
    while terms.len() < 50 {
        let len = rng.random_range(1..=3);
        let term: Vec<String> = (0..len).map(|_| POOL.choose(rng).unwrap().to_string()).collect();
        if !terms.contains(&term) {
            terms.push(term);
        }
    }
    let mut categories: BTreeMap<Category, Vec<SymptomTerm>> = BTreeMap::new();
    for t in &terms {
        let cat = *Category::ALL.choose(rng).unwrap();
        categories.entry(cat).or_default().push(SymptomTerm { canonical: t.join(" "), variants: Vec::new() });
    }
    (SymptomTaxonomy { categories }, terms)
}

fn random_text(rng: &mut rand_chacha::ChaCha8Rng) -> String {
    let len = rng.random_range(0..25);
    let mut out = String::new();
    for _ in 0..len {
        let w = if rng.random_bool(0.1) { "FEVER" } else { POOL.choose(rng).unwrap() };
        let w = if rng.random_bool(0.2) { w.to_uppercase() } else { w.to_string() };
        out.push_str(&w);
        out.push_str([" ", "  ", ", ", "\t"].choose(rng).unwrap());
    }
    out
}

#[test]
fn trie_agrees_with_naive_scanner() {
    let mut rng = rng(5150);
    for round in 0..20 {
        let (taxonomy, terms) = random_taxonomy(&mut rng);
        let trie = build_trie(&taxonomy).unwrap();
        for _ in 0..50 {
            let text = random_text(&mut rng);
            let seq = tokenize(&text);
            let want: Vec<(String, (usize, usize))> = naive_scan(&seq.tokens, &terms)
                .into_iter()
                .map(|(s, e, t)| (terms[t].join(" "), (seq.source_spans[s].0, seq.source_spans[e - 1].1)))
                .collect();
            let got: Vec<(String, (usize, usize))> =
                find_terms(&text, &trie).matches.into_iter().map(|m| (m.canonical, m.span)).collect();
            assert_eq!(got, want, "round {round}, text {text:?}");
        }
    }
}

#[test]
fn longer_term_wins() {
    let mut categories = BTreeMap::new();
    categories.insert(Category::Skin, vec![
        SymptomTerm { canonical: "skin".into(), variants: vec![] },
        SymptomTerm { canonical: "skin rash".into(), variants: vec![] },
    ]);
    let trie = build_trie(&SymptomTaxonomy { categories }).unwrap();
    let m = find_terms("mujhe skin rash hai", &trie);
    assert_eq!(m.matches.len(), 1);
    assert_eq!(m.matches[0].canonical, "skin rash");
}

#[test]
fn whitespace_and_case_do_not_change_matches() {
    let mut rng = rng(77);
    let (taxonomy, _) = random_taxonomy(&mut rng);
    let trie = build_trie(&taxonomy).unwrap();
    for _ in 0..200 {
        let text = random_text(&mut rng);
        let squeezed = text.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
        let a: Vec<String> = find_terms(&text, &trie).matches.into_iter().map(|m| m.canonical).collect();
        let b: Vec<String> = find_terms(&squeezed, &trie).matches.into_iter().map(|m| m.canonical).collect();
        assert_eq!(a, b);
    }
}

#[test]
fn filtering_is_idempotent_and_histograms_add_up() {
    let mut rng = rng(31);
    let trie = build_trie(&SymptomTaxonomy::default_taxonomy()).unwrap();
    let phrases = ["mere tonsils swollen hai", "skin rash since 2 din", "knee swelling and red eyes", "sar dard hai", "fever"];
    let records: Vec<DatasetRecord> = (0..200)
        .map(|i| {
            DatasetRecord::new(format!("r{i}"), *phrases.choose(&mut rng).unwrap(), *phrases.choose(&mut rng).unwrap())
        })
        .collect();
    for req in [RequireIn::Query, RequireIn::Summary, RequireIn::Either, RequireIn::Both] {
        let once = filter_corpus(&records, &trie, req);
        let twice = filter_corpus(&once.kept, &trie, req);
        assert_eq!(once.kept, twice.kept);
        assert_eq!(once.first_match_histogram.values().sum::<usize>(), once.kept.len());
        assert!(once.category_histogram.values().sum::<usize>() >= once.kept.len());
    }
}
