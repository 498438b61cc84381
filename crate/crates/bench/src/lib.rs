//! Deterministic inputs shared by the benchmarks.

use medsumm_core::{tokenize, TokenSeq};

const WORDS: [&str; 16] = [
    "mujhe", "pain", "hai", "tonsils", "swollen", "eye", "redness", "since", "do", "din", "se", "skin", "rash", "knee",
    "swelling", "fever",
];

/// A pseudo-random sentence of `len` words from a fixed 16-word pool.
pub fn sentence(seed: u64, len: usize) -> TokenSeq {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let words: Vec<&str> = (0..len)
        .map(|_| {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            WORDS[(state >> 60) as usize]
        })
        .collect();
    tokenize(&words.join(" "))
}
