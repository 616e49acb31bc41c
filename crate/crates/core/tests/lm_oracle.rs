//! Model counts and probabilities against the brute-force oracle.

mod common;

use std::collections::BTreeMap;

use mtrank_core::corpus::{read_corpus, tokenize, TokenSequence};
use mtrank_core::{Ngram, NgramModel, UnigramDenominator};
use mtrank_oracle::{oracle_conditional, oracle_counts, oracle_tokenize, oracle_unigram};
use num::{BigInt, BigRational, One, ToPrimitive, Zero};

fn train(lines: &[String]) -> (NgramModel, Vec<Vec<String>>) {
    let seqs: Vec<TokenSequence> = lines.iter().map(|l| tokenize(l)).collect();
    let oracle_corpus = lines.iter().map(|l| oracle_tokenize(l)).collect();
    (NgramModel::train("x", &seqs), oracle_corpus)
}

fn production_counts(model: &NgramModel, order: usize) -> BTreeMap<Vec<String>, u64> {
    model
        .counts(order)
        .unwrap()
        .iter()
        .map(|(k, &c)| (k.split(' ').map(str::to_string).collect(), c))
        .collect()
}

fn exact(p: mtrank_core::Probability) -> BigRational {
    if p.numerator == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(p.numerator), BigInt::from(p.denominator))
    }
}

#[test]
fn thousand_sentence_counts_match_oracle() {
    let mut rng = common::rng(7);
    let lines = common::random_corpus(&mut rng, &common::HINDI, 1000, 12);
    let (model, corpus) = train(&lines);
    let oracle = oracle_counts(&corpus);
    for order in 1..=3 {
        assert_eq!(production_counts(&model, order), oracle[order - 1], "order {order}");
    }
    assert_eq!(model.total_tokens(), corpus.iter().map(Vec::len).sum::<usize>() as u64);
}

#[test]
fn probabilities_match_oracle_and_normalize() {
    for seed in 0..10 {
        let mut rng = common::rng(100 + seed);
        let lines = common::random_corpus(&mut rng, &common::LATIN[..5], 20, 12);
        let (model, corpus) = train(&lines);
        if model.is_empty() {
            continue;
        }
        let vocab: Vec<String> = production_counts(&model, 1).into_keys().map(|k| k[0].clone()).collect();

        let mut unigram_total = BigRational::zero();
        for w in &vocab {
            let p = exact(model.prob_unigram(w).unwrap());
            assert_eq!(p, oracle_unigram(&corpus, w, false));
            unigram_total += p;
        }
        assert!(unigram_total.is_one());

        let vocab_model = model.clone().with_denominator(UnigramDenominator::Vocab);
        for w in &vocab {
            assert_eq!(exact(vocab_model.prob_unigram(w).unwrap()), oracle_unigram(&corpus, w, true));
        }

        // Every observed continuation context defines a distribution summing to one.
        for a in &vocab {
            let mut sum = BigRational::zero();
            for b in &vocab {
                let p = exact(model.prob_bigram(a, b).unwrap());
                assert_eq!(p, oracle_conditional(&corpus, &[a.clone(), b.clone()]));
                sum += p;
            }
            if model.continuation_count(1, a) > 0 {
                assert!(sum.is_one(), "P(.|{a}) sums to {sum}");
                let float: f64 = vocab.iter().map(|b| model.prob_bigram(a, b).unwrap().value()).sum();
                assert!((float - 1.0).abs() < 1e-9);
            } else {
                assert!(sum.is_zero());
            }
            for b in &vocab {
                let mut sum = BigRational::zero();
                for c in &vocab {
                    let p = exact(model.prob_trigram(a, b, c).unwrap());
                    assert_eq!(p, oracle_conditional(&corpus, &[a.clone(), b.clone(), c.clone()]));
                    sum += p;
                }
                let has_context = model.continuation_count(2, &format!("{a} {b}")) > 0;
                assert_eq!(sum.is_one(), has_context, "P(.|{a} {b}) sums to {}", sum.to_f64().unwrap());
            }
        }
    }
}

#[test]
fn contains_equals_oracle_membership() {
    let mut rng = common::rng(3);
    let lines = common::random_corpus(&mut rng, &common::LATIN[..4], 15, 8);
    let (model, corpus) = train(&lines);
    let oracle = oracle_counts(&corpus);
    let vocab = &common::LATIN[..4];
    for a in vocab {
        for b in vocab {
            for c in vocab {
                let g = Ngram::new(&[*a, *b, *c]).unwrap();
                let key: Vec<String> = [a, b, c].iter().map(|s| s.to_string()).collect();
                assert_eq!(model.contains(&g), oracle[2].get(&key).copied().unwrap_or(0) > 0);
            }
        }
    }
}

#[test]
fn stats_on_35k_lines_match_oracle() {
    let mut rng = common::rng(35);
    let vocab: Vec<String> = (0..400).map(|i| format!("w{i}")).collect();
    let vocab: Vec<&str> = vocab.iter().map(String::as_str).collect();
    let text = common::random_corpus(&mut rng, &vocab, 35_000, 14).join("\n");
    let seqs = read_corpus(text.as_bytes()).unwrap();
    let model = NgramModel::train_parallel("en", &seqs);
    let stats = model.stats();
    let corpus: Vec<Vec<String>> = text.split('\n').map(oracle_tokenize).collect();
    let oracle = oracle_counts(&corpus);
    assert_eq!(stats.sentence_count, 35_000);
    assert_eq!(stats.distinct_unigrams, oracle[0].len() as u64);
    assert_eq!(stats.distinct_bigrams, oracle[1].len() as u64);
    assert_eq!(stats.distinct_trigrams, oracle[2].len() as u64);
    assert_eq!(stats.total_tokens, oracle[0].values().sum::<u64>());
    assert_eq!(stats.trigram_tokens, oracle[2].values().sum::<u64>());
}

#[test]
fn parallel_training_equals_sequential() {
    let mut rng = common::rng(11);
    let lines = common::random_corpus(&mut rng, &common::LATIN, 10_000, 10);
    let seqs: Vec<TokenSequence> = lines.iter().map(|l| tokenize(l)).collect();
    assert_eq!(NgramModel::train_parallel("x", &seqs), NgramModel::train("x", &seqs));
}
