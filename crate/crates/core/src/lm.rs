//! Maximum-likelihood n-gram models of order one to three.
//!
//! Counts are the source of truth. Probabilities are computed on demand as
//! exact ratios of counts; nothing is smoothed and unseen events get zero.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{check_order, window_keys, CorpusError, Ngram, TokenSequence, MAX_ORDER};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LmError {
    #[error("model {0:?} is empty")]
    EmptyModel(String),
    #[error("cannot merge model {theirs:?} into model {ours:?}")]
    LanguageMismatch { ours: String, theirs: String },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Denominator used for unigram probabilities.
///
/// `Tokens` is the normalized MLE estimate. `Vocab` divides by the number of
/// distinct words, which does not sum to one but is kept for comparison.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnigramDenominator {
    #[default]
    Tokens,
    Vocab,
}

impl fmt::Display for UnigramDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnigramDenominator::Tokens => "tokens",
            UnigramDenominator::Vocab => "vocab",
        })
    }
}

impl FromStr for UnigramDenominator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tokens" => Ok(UnigramDenominator::Tokens),
            "vocab" => Ok(UnigramDenominator::Vocab),
            other => Err(format!("unknown unigram denominator {other:?} (expected tokens|vocab)")),
        }
    }
}

/// An exact count ratio. A zero denominator means "no evidence" and evaluates to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probability {
    pub numerator: u64,
    pub denominator: u64,
}

impl Probability {
    pub const ZERO: Probability = Probability {
        numerator: 0,
        denominator: 1,
    };

    fn ratio(numerator: u64, denominator: u64) -> Self {
        if denominator == 0 {
            Probability::ZERO
        } else {
            Probability {
                numerator,
                denominator,
            }
        }
    }

    pub fn value(self) -> f64 {
        if self.numerator == 0 {
            0.0
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }
}

/// Type and token counts per order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub sentence_count: u64,
    pub distinct_unigrams: u64,
    pub distinct_bigrams: u64,
    pub distinct_trigrams: u64,
    pub total_tokens: u64,
    pub bigram_tokens: u64,
    pub trigram_tokens: u64,
}

type CountMap = HashMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramModel {
    language_tag: String,
    denominator: UnigramDenominator,
    sentence_count: u64,
    /// counts[n - 1] maps canonical keys of order n to occurrence counts.
    counts: [CountMap; MAX_ORDER],
    /// contexts[n - 1] maps an order-n key to how often it is followed by another
    /// word in the same sentence, i.e. the mass of its successor distribution.
    contexts: [CountMap; MAX_ORDER - 1],
}

impl NgramModel {
    pub fn new(language_tag: impl Into<String>) -> Self {
        NgramModel {
            language_tag: language_tag.into(),
            denominator: UnigramDenominator::default(),
            sentence_count: 0,
            counts: Default::default(),
            contexts: Default::default(),
        }
    }

    pub fn train<'a, I>(language_tag: impl Into<String>, sentences: I) -> Self
    where
        I: IntoIterator<Item = &'a TokenSequence>,
    {
        let mut model = NgramModel::new(language_tag);
        for sentence in sentences {
            model.add_sentence(sentence);
        }
        model
    }

    /// Trains shards in parallel and sums them; the result equals [`NgramModel::train`].
    pub fn train_parallel(language_tag: impl Into<String>, sentences: &[TokenSequence]) -> Self {
        let tag = language_tag.into();
        sentences
            .par_chunks(4096)
            .map(|shard| NgramModel::train(tag.clone(), shard))
            .reduce(
                || NgramModel::new(tag.clone()),
                |mut a, b| {
                    a.absorb(b);
                    a
                },
            )
    }

    pub fn add_sentence(&mut self, sentence: &TokenSequence) {
        self.sentence_count += 1;
        let tokens = &sentence.tokens;
        for order in 1..=MAX_ORDER {
            for key in window_keys(tokens, order) {
                *self.counts[order - 1].entry(key).or_insert(0) += 1;
            }
        }
        // Every window of order n + 1 is one observed continuation of its order-n prefix.
        for order in 1..MAX_ORDER {
            for key in window_keys(&tokens[..tokens.len().saturating_sub(1)], order) {
                *self.contexts[order - 1].entry(key).or_insert(0) += 1;
            }
        }
    }

    /// Adds the counts of `other`, which must describe the same language.
    pub fn merge(&mut self, other: NgramModel) -> Result<(), LmError> {
        if other.language_tag != self.language_tag {
            return Err(LmError::LanguageMismatch {
                ours: self.language_tag.clone(),
                theirs: other.language_tag,
            });
        }
        self.absorb(other);
        Ok(())
    }

    fn absorb(&mut self, other: NgramModel) {
        self.sentence_count += other.sentence_count;
        for (mine, theirs) in self.counts.iter_mut().zip(other.counts) {
            add_counts(mine, theirs);
        }
        for (mine, theirs) in self.contexts.iter_mut().zip(other.contexts) {
            add_counts(mine, theirs);
        }
    }

    /// Rebuilds a model from stored counts; continuation masses are derived.
    pub(crate) fn from_counts(
        language_tag: String,
        denominator: UnigramDenominator,
        sentence_count: u64,
        counts: [CountMap; MAX_ORDER],
    ) -> Self {
        let mut contexts: [CountMap; MAX_ORDER - 1] = Default::default();
        for order in 2..=MAX_ORDER {
            for (key, &count) in &counts[order - 1] {
                let prefix = &key[..key.rfind(' ').expect("multi-word key")];
                *contexts[order - 2].entry(prefix.to_string()).or_insert(0) += count;
            }
        }
        NgramModel {
            language_tag,
            denominator,
            sentence_count,
            counts,
            contexts,
        }
    }

    pub fn with_denominator(mut self, denominator: UnigramDenominator) -> Self {
        self.denominator = denominator;
        self
    }

    pub fn set_denominator(&mut self, denominator: UnigramDenominator) {
        self.denominator = denominator;
    }

    pub fn denominator(&self) -> UnigramDenominator {
        self.denominator
    }

    pub fn language_tag(&self) -> &str {
        &self.language_tag
    }

    pub fn sentence_count(&self) -> u64 {
        self.sentence_count
    }

    pub fn total_tokens(&self) -> u64 {
        self.counts[0].values().sum()
    }

    pub fn vocab_size(&self) -> u64 {
        self.counts[0].len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.counts[0].is_empty()
    }

    /// Raw count map for one order, keyed by canonical n-gram key.
    pub fn counts(&self, order: usize) -> Result<&HashMap<String, u64>, CorpusError> {
        check_order(order)?;
        Ok(&self.counts[order - 1])
    }

    pub fn count(&self, ngram: &Ngram) -> u64 {
        self.count_key(ngram.order(), &ngram.key())
    }

    pub fn count_key(&self, order: usize, key: &str) -> u64 {
        self.counts
            .get(order.wrapping_sub(1))
            .and_then(|m| m.get(key))
            .copied()
            .unwrap_or(0)
    }

    /// How often `key` (of `order` 1 or 2) is followed by another word.
    pub fn continuation_count(&self, order: usize, key: &str) -> u64 {
        self.contexts
            .get(order.wrapping_sub(1))
            .and_then(|m| m.get(key))
            .copied()
            .unwrap_or(0)
    }

    pub fn contains(&self, ngram: &Ngram) -> bool {
        self.count(ngram) > 0
    }

    pub fn contains_key(&self, order: usize, key: &str) -> bool {
        self.count_key(order, key) > 0
    }

    fn ensure_non_empty(&self) -> Result<(), LmError> {
        if self.is_empty() {
            Err(LmError::EmptyModel(self.language_tag.clone()))
        } else {
            Ok(())
        }
    }

    /// count(w) over the configured denominator.
    pub fn prob_unigram(&self, w: &str) -> Result<Probability, LmError> {
        self.ensure_non_empty()?;
        Ok(self.unigram_ratio(w))
    }

    fn unigram_ratio(&self, w: &str) -> Probability {
        let denominator = match self.denominator {
            UnigramDenominator::Tokens => self.total_tokens(),
            UnigramDenominator::Vocab => self.vocab_size(),
        };
        Probability::ratio(self.count_key(1, w), denominator)
    }

    /// P(w2 | w1).
    pub fn prob_bigram(&self, w1: &str, w2: &str) -> Result<Probability, LmError> {
        self.ensure_non_empty()?;
        Ok(self.conditional(1, w1, w2))
    }

    /// P(w3 | w1 w2).
    pub fn prob_trigram(&self, w1: &str, w2: &str, w3: &str) -> Result<Probability, LmError> {
        self.ensure_non_empty()?;
        Ok(self.conditional(2, &format!("{w1} {w2}"), w3))
    }

    /// Probability of the last word of an order 2 or 3 key given the words before it.
    pub fn prob_key(&self, order: usize, key: &str) -> Result<Probability, LmError> {
        check_order(order)?;
        self.ensure_non_empty()?;
        if order == 1 {
            return Ok(self.unigram_ratio(key));
        }
        Ok(match key.rsplit_once(' ') {
            Some((prefix, last)) => self.conditional(order - 1, prefix, last),
            None => Probability::ZERO,
        })
    }

    fn conditional(&self, prefix_order: usize, prefix: &str, next: &str) -> Probability {
        let context = self.continuation_count(prefix_order, prefix);
        if context == 0 {
            return Probability::ZERO;
        }
        let joint = self.count_key(prefix_order + 1, &format!("{prefix} {next}"));
        Probability::ratio(joint, context)
    }

    pub fn stats(&self) -> CorpusStats {
        CorpusStats {
            sentence_count: self.sentence_count,
            distinct_unigrams: self.counts[0].len() as u64,
            distinct_bigrams: self.counts[1].len() as u64,
            distinct_trigrams: self.counts[2].len() as u64,
            total_tokens: self.total_tokens(),
            bigram_tokens: self.counts[1].values().sum(),
            trigram_tokens: self.counts[2].values().sum(),
        }
    }

    /// Entries of one order by descending count, ties by ascending key.
    pub fn sorted_entries(&self, order: usize) -> Result<Vec<(&str, u64)>, CorpusError> {
        let mut entries: Vec<(&str, u64)> = self
            .counts(order)?
            .iter()
            .map(|(k, &c)| (k.as_str(), c))
            .collect();
        entries.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(entries)
    }
}

fn add_counts(into: &mut CountMap, from: CountMap) {
    if into.is_empty() {
        *into = from;
        return;
    }
    for (key, count) in from {
        *into.entry(key).or_insert(0) += count;
    }
}
