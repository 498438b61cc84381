use medsumm_core::{ngrams, postprocess_generation, tokenize, TokenSeq};
use proptest::prelude::*;

fn text_strategy() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![
            "[a-zA-Z]{1,6}",
            "[0-9]{1,3}",
            Just("मुझे".to_string()),
            Just("dard,".to_string()),
            Just("...".to_string()),
            Just("?!".to_string()),
        ],
        0..20,
    )
    .prop_map(|words| words.join(" "))
}

fn sentence_list() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        (prop_oneof![Just("Take rest"), Just("take  REST"), Just("Drink water"), Just("See a doctor"), Just("ok")], prop_oneof![Just("."), Just("!"), Just("?"), Just("")]),
        0..8,
    )
    .prop_map(|parts| parts.into_iter().map(|(s, p)| format!("{s}{p}")).collect::<Vec<_>>().join("  "))
}

proptest! {
    #[test]
    fn tokenize_is_idempotent_on_joined_output(text in text_strategy()) {
        let once = tokenize(&text);
        let twice = tokenize(&once.joined());
        prop_assert_eq!(once.tokens, twice.tokens);
    }

    #[test]
    fn ngram_multiplicities_sum_to_window_count(tokens in proptest::collection::vec("[a-c]", 0..15), n in 1usize..6) {
        let seq = TokenSeq::from_tokens(tokens.iter().map(String::as_str));
        let total: usize = ngrams(&seq, n).unwrap().values().sum();
        prop_assert_eq!(total, (seq.len() + 1).saturating_sub(n));
    }

    #[test]
    fn postprocess_is_idempotent(text in sentence_list()) {
        let once = postprocess_generation(&text);
        prop_assert_eq!(postprocess_generation(&once), once.clone());
    }
}

#[test]
fn repeated_sentence_is_dropped() {
    assert_eq!(postprocess_generation("Take  rest.  Take rest."), "Take rest.");
}

#[test]
fn zero_order_ngrams_are_rejected() {
    assert!(ngrams(&tokenize("a b"), 0).is_err());
}
