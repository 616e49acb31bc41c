//! Brute-force reference implementations for the test suites.
//!
//! Nothing here depends on `mtrank-core`. Every quantity is recomputed from
//! raw strings with exact rational arithmetic, trading speed for obviousness.

use std::collections::BTreeMap;

use num::{BigInt, BigRational, ToPrimitive, Zero};
use unicode_normalization::UnicodeNormalization;

pub type Counts = BTreeMap<Vec<String>, u64>;

/// Whitespace split after NFC; trailing `. ! ? । ,` characters become separate tokens.
pub fn oracle_tokenize(raw: &str) -> Vec<String> {
    let text: String = raw.nfc().collect();
    let mut out = Vec::new();
    let mut current: Vec<char> = Vec::new();
    let flush = |current: &mut Vec<char>, out: &mut Vec<String>| {
        if current.is_empty() {
            return;
        }
        let mut cut = current.len();
        while cut > 0 && matches!(current[cut - 1], '.' | '!' | '?' | '\u{0964}' | ',') {
            cut -= 1;
        }
        if cut > 0 {
            out.push(current[..cut].iter().collect());
        }
        for c in &current[cut..] {
            out.push(c.to_string());
        }
        current.clear();
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut current, &mut out);
        } else {
            current.push(c);
        }
    }
    flush(&mut current, &mut out);
    out
}

fn windows(corpus: &[Vec<String>], order: usize) -> Vec<Vec<String>> {
    let mut all = Vec::new();
    for sentence in corpus {
        let mut start = 0;
        while start + order <= sentence.len() {
            all.push(sentence[start..start + order].to_vec());
            start += 1;
        }
    }
    all
}

/// Exact n-gram counts for orders 1..=3 by sorting all windows and counting runs.
pub fn oracle_counts(corpus: &[Vec<String>]) -> [Counts; 3] {
    let mut result: [Counts; 3] = Default::default();
    for order in 1..=3 {
        let mut all = windows(corpus, order);
        all.sort();
        let mut i = 0;
        while i < all.len() {
            let mut j = i;
            while j < all.len() && all[j] == all[i] {
                j += 1;
            }
            result[order - 1].insert(all[i].clone(), (j - i) as u64);
            i = j;
        }
    }
    result
}

/// Occurrences of `words` counted by scanning every position of every sentence.
pub fn oracle_count(corpus: &[Vec<String>], words: &[String]) -> u64 {
    let mut n = 0;
    for sentence in corpus {
        for start in 0..sentence.len() {
            if sentence[start..].starts_with(words) {
                n += 1;
            }
        }
    }
    n
}

/// Occurrences of `prefix` that have a following word in the same sentence.
pub fn oracle_context(corpus: &[Vec<String>], prefix: &[String]) -> u64 {
    let mut n = 0;
    for sentence in corpus {
        for start in 0..sentence.len() {
            if start + prefix.len() < sentence.len() && sentence[start..].starts_with(prefix) {
                n += 1;
            }
        }
    }
    n
}

fn ratio(num: u64, den: u64) -> BigRational {
    if den == 0 || num == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// count(w) / total tokens, or / distinct words when `vocab_denominator`.
pub fn oracle_unigram(corpus: &[Vec<String>], w: &str, vocab_denominator: bool) -> BigRational {
    let total: usize = corpus.iter().map(Vec::len).sum();
    let mut vocab: Vec<&String> = corpus.iter().flatten().collect();
    vocab.sort();
    vocab.dedup();
    let den = if vocab_denominator { vocab.len() } else { total };
    ratio(oracle_count(corpus, &[w.to_string()]), den as u64)
}

/// P(last word | preceding words) for a bigram or trigram.
pub fn oracle_conditional(corpus: &[Vec<String>], words: &[String]) -> BigRational {
    assert!((2..=3).contains(&words.len()));
    let prefix = &words[..words.len() - 1];
    ratio(oracle_count(corpus, words), oracle_context(corpus, prefix))
}

/// Union of translations of every word of every retained n-gram, by nested loops.
pub fn oracle_project(lexicon: &[(String, String)], retained: &[Vec<String>]) -> Vec<String> {
    let mut registered: Vec<String> = Vec::new();
    for ngram in retained {
        for word in ngram {
            for (source, target) in lexicon {
                if source == word && !registered.contains(target) {
                    registered.push(target.clone());
                }
            }
        }
    }
    registered
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScore {
    pub engine_id: String,
    pub unigrams: usize,
    pub bigrams: usize,
    pub trigrams: usize,
    pub matched: usize,
    pub prob_sum: BigRational,
}

impl OracleScore {
    pub fn prob_sum_f64(&self) -> f64 {
        self.prob_sum.to_f64().expect("finite")
    }
}

/// Everything the ranking needs, as raw text.
pub struct OracleScenario<'a> {
    pub source_text: &'a str,
    /// (engine_id, translation text)
    pub candidates: &'a [(String, String)],
    pub source_corpus: &'a [String],
    pub target_corpus: &'a [String],
    pub lexicon: &'a [(String, String)],
    /// Number of registered words a trigram needs: 1 = any, 2 = majority, 3 = all.
    pub min_covered: usize,
}

/// Ranked (rank, score) list, best first, ties in input order.
pub fn oracle_rank(s: &OracleScenario<'_>) -> Vec<(usize, OracleScore)> {
    let source_corpus: Vec<Vec<String>> = s.source_corpus.iter().map(|l| oracle_tokenize(l)).collect();
    let target_corpus: Vec<Vec<String>> = s.target_corpus.iter().map(|l| oracle_tokenize(l)).collect();
    let source = oracle_tokenize(s.source_text);

    let retained: Vec<Vec<String>> = windows(&[source], 3)
        .into_iter()
        .filter(|g| oracle_count(&source_corpus, g) > 0)
        .collect();
    let registered = oracle_project(s.lexicon, &retained);

    let mut scores: Vec<OracleScore> = Vec::new();
    for (engine_id, text) in s.candidates {
        let tokens = oracle_tokenize(text);
        let trigrams = windows(&[tokens.clone()], 3);
        let mut matched = 0;
        let mut prob_sum = BigRational::zero();
        for g in &trigrams {
            let covered = g.iter().filter(|w| registered.contains(w)).count();
            if covered >= s.min_covered && oracle_count(&target_corpus, g) > 0 {
                matched += 1;
                prob_sum += oracle_conditional(&target_corpus, g);
            }
        }
        scores.push(OracleScore {
            engine_id: engine_id.clone(),
            unigrams: windows(&[tokens.clone()], 1).len(),
            bigrams: windows(&[tokens.clone()], 2).len(),
            trigrams: trigrams.len(),
            matched,
            prob_sum,
        });
    }
    // Insertion sort: stable, descending.
    let mut ranked: Vec<OracleScore> = Vec::new();
    for score in scores {
        let pos = ranked
            .iter()
            .position(|r| r.prob_sum < score.prob_sum)
            .unwrap_or(ranked.len());
        ranked.insert(pos, score);
    }
    ranked.into_iter().enumerate().map(|(i, s)| (i + 1, s)).collect()
}

/// Exact mean of integer scores.
pub fn oracle_mean(scores: &[i64]) -> BigRational {
    let sum: i64 = scores.iter().sum();
    BigRational::new(BigInt::from(sum), BigInt::from(scores.len() as i64))
}

/// Spearman's rho from two rank vectors (average ranks for ties).
///
/// Uses `1 - 6 Σd² / (n(n² - 1))` when neither side has ties, and the
/// raw-sum Pearson form otherwise.
pub fn oracle_spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let distinct = |v: &[f64]| {
        let mut s: Vec<f64> = v.to_vec();
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s.dedup();
        s.len()
    };
    if distinct(x) == n && distinct(y) == n {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let nf = n as f64;
        return Some(1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0)));
    }
    let nf = n as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let num = nf * sxy - sx * sy;
    let den = ((nf * sxx - sx * sx) * (nf * syy - sy * sy)).sqrt();
    if den.abs() < 1e-12 {
        None
    } else {
        Some(num / den)
    }
}

/// Ranks by position for a strict order, averaging positions over groups of equal keys.
pub fn oracle_average_ranks(keys_in_rank_order: &[f64]) -> Vec<f64> {
    let n = keys_in_rank_order.len();
    let mut ranks = vec![0.0; n];
    for i in 0..n {
        let tied: Vec<usize> = (0..n).filter(|&j| keys_in_rank_order[j] == keys_in_rank_order[i]).collect();
        ranks[i] = tied.iter().map(|&j| (j + 1) as f64).sum::<f64>() / tied.len() as f64;
    }
    ranks
}
