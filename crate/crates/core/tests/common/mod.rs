#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Words from a small vocabulary so that n-grams repeat often.
pub fn random_sentence(rng: &mut StdRng, vocab: &[&str], max_len: usize) -> String {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| *vocab.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn random_corpus(rng: &mut StdRng, vocab: &[&str], sentences: usize, max_len: usize) -> Vec<String> {
    (0..sentences).map(|_| random_sentence(rng, vocab, max_len)).collect()
}

pub const LATIN: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];
pub const HINDI: [&str; 8] = ["जिम", "पार्क", "भारत", "में", "है", "बाघ", "उद्यान", "।"];
