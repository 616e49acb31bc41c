//! Lexicon projection, scoring and ranking against the brute-force oracle.

mod common;

use std::collections::BTreeMap;

use mtrank_core::corpus::{extract_ngrams, tokenize, tokenize_sentence};
use mtrank_core::ranker::{retain_source_trigrams, score_candidate};
use mtrank_core::{rank, Candidate, Coverage, NgramModel, ParallelLexicon, RegisteredWords};
use mtrank_oracle::{oracle_count, oracle_project, oracle_rank, oracle_tokenize, OracleScenario};
use rand::seq::SliceRandom;
use rand::Rng;

fn model(tag: &str, lines: &[String]) -> NgramModel {
    let seqs: Vec<_> = lines.iter().map(|l| tokenize(l)).collect();
    NgramModel::train(tag, &seqs)
}

fn lexicon_text(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect()
}

#[test]
fn hand_computed_score_on_five_sentences() {
    let target: Vec<String> = [
        "जिम पार्क भारत में है",
        "पार्क भारत में सबसे पुराना है",
        "भारत में बाघ है",
        "जिम पार्क भारत का है",
        "बाघ भारत में है",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let lm = model("hi", &target);
    let candidate = Candidate::new("1", "E1", "जिम पार्क भारत में है");
    let registered: RegisteredWords = candidate.tokens.words().map(str::to_string).collect();
    let score = score_candidate(&candidate, &registered, &lm, Coverage::Any);
    // P(भारत | जिम पार्क) = 2/2, P(में | पार्क भारत) = 2/3, P(है | भारत में) = 2/4
    let expected = 1.0 + 2.0 / 3.0 + 2.0 / 4.0;
    assert!((score.prob_sum - expected).abs() < 1e-12);
    assert_eq!(score.matched_trigram_count, 3);
    assert_eq!((score.unigram_count, score.bigram_count, score.trigram_count), (5, 4, 3));
}

#[test]
fn ten_thousand_pair_lexicon_matches_line_scan() {
    let mut rng = common::rng(10);
    let mut text = String::from("# generated\n");
    let mut pairs = Vec::new();
    for _ in 0..10_000 {
        let s = format!("s{}", rng.gen_range(0..2000));
        let t = format!("t{}", rng.gen_range(0..50));
        text.push_str(&format!("{s}\t{t}\t{:.3}\n", rng.gen::<f64>()));
        pairs.push((s, t));
    }
    let lex = ParallelLexicon::load(text.as_bytes()).unwrap();

    // Line-scan oracle: distinct targets per source, then histogram of multiplicities.
    let mut oracle: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (s, t) in &pairs {
        let targets = oracle.entry(s.clone()).or_default();
        if !targets.contains(t) {
            targets.push(t.clone());
        }
    }
    let histogram = |sizes: Vec<usize>| {
        let mut h: BTreeMap<usize, usize> = BTreeMap::new();
        for n in sizes {
            *h.entry(n).or_default() += 1;
        }
        h
    };
    assert_eq!(lex.len(), oracle.len());
    assert_eq!(
        histogram(lex.sources().map(|s| lex.lookup(s).count()).collect()),
        histogram(oracle.values().map(Vec::len).collect())
    );
    for (s, targets) in &oracle {
        assert_eq!(lex.lookup(s).collect::<Vec<_>>(), *targets);
    }
}

#[test]
fn projection_matches_nested_loops() {
    let mut rng = common::rng(21);
    for _ in 0..200 {
        let pairs: Vec<(String, String)> = (0..rng.gen_range(0..15))
            .map(|_| {
                (
                    common::LATIN.choose(&mut rng).unwrap().to_string(),
                    common::HINDI.choose(&mut rng).unwrap().to_string(),
                )
            })
            .collect();
        let lex = ParallelLexicon::load(lexicon_text(&pairs).as_bytes()).unwrap();
        let sentence = tokenize(&common::random_sentence(&mut rng, &common::LATIN, 10));
        let retained = extract_ngrams(&sentence, 3).unwrap();
        let words: Vec<Vec<String>> = retained.iter().map(|g| g.words().to_vec()).collect();
        let got: Vec<String> = lex.project(&retained).into_iter().collect();
        assert_eq!(got, oracle_project(&pairs, &words));
    }
}

#[test]
fn retained_trigrams_match_brute_force_filter() {
    let mut rng = common::rng(22);
    for _ in 0..100 {
        let corpus = common::random_corpus(&mut rng, &common::LATIN[..4], 10, 8);
        let lm = model("en", &corpus);
        let oracle_corpus: Vec<Vec<String>> = corpus.iter().map(|l| oracle_tokenize(l)).collect();
        let src = common::random_sentence(&mut rng, &common::LATIN[..4], 12);
        let got: Vec<Vec<String>> = retain_source_trigrams(&tokenize(&src), &lm)
            .iter()
            .map(|g| g.words().to_vec())
            .collect();
        let toks = oracle_tokenize(&src);
        let expected: Vec<Vec<String>> = toks
            .windows(3)
            .filter(|w| oracle_count(&oracle_corpus, w) > 0)
            .map(<[String]>::to_vec)
            .collect();
        assert_eq!(got, expected);
    }
}

#[test]
fn rank_matches_oracle_for_every_coverage_mode() {
    let mut rng = common::rng(23);
    for round in 0..150 {
        let (n_src, n_tgt) = (rng.gen_range(1..=30), rng.gen_range(1..=30));
        let source_corpus = common::random_corpus(&mut rng, &common::LATIN[..5], n_src, 10);
        let target_corpus = common::random_corpus(&mut rng, &common::HINDI[..6], n_tgt, 10);
        let pairs: Vec<(String, String)> = (0..rng.gen_range(0..12))
            .map(|_| {
                (
                    common::LATIN[..5].choose(&mut rng).unwrap().to_string(),
                    common::HINDI[..6].choose(&mut rng).unwrap().to_string(),
                )
            })
            .collect();
        let source_text = common::random_sentence(&mut rng, &common::LATIN[..5], 12);
        let cands: Vec<(String, String)> = (0..rng.gen_range(1..=6))
            .map(|i| (format!("E{i}"), common::random_sentence(&mut rng, &common::HINDI[..6], 12)))
            .collect();

        let source_lm = model("en", &source_corpus);
        let target_lm = model("hi", &target_corpus);
        let lex = ParallelLexicon::load(lexicon_text(&pairs).as_bytes()).unwrap();
        let candidates: Vec<Candidate> = cands.iter().map(|(e, t)| Candidate::new("s", e, t)).collect();
        let source = tokenize_sentence("s", &source_text);

        for (coverage, min_covered) in [(Coverage::Any, 1), (Coverage::Majority, 2), (Coverage::All, 3)] {
            let got = rank(&source, &candidates, &source_lm, &target_lm, &lex, coverage).unwrap();
            let expected = oracle_rank(&OracleScenario {
                source_text: &source_text,
                candidates: &cands,
                source_corpus: &source_corpus,
                target_corpus: &target_corpus,
                lexicon: &pairs,
                min_covered,
            });
            assert_eq!(got.entries.len(), expected.len());
            for (g, (r, e)) in got.entries.iter().zip(&expected) {
                assert_eq!(g.rank, *r, "round {round}");
                assert_eq!(g.score.engine_id, e.engine_id, "round {round} {coverage}");
                assert_eq!(g.score.unigram_count, e.unigrams);
                assert_eq!(g.score.bigram_count, e.bigrams);
                assert_eq!(g.score.trigram_count, e.trigrams);
                assert_eq!(g.score.matched_trigram_count, e.matched);
                assert!((g.score.prob_sum - e.prob_sum_f64()).abs() < 1e-9);
            }
        }
    }
}
