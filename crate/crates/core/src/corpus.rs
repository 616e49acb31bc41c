//! Text normalization, tokenization and n-gram extraction.
//!
//! Every other module sees text only through [`tokenize`], so the policy here
//! (NFC, no case folding, trailing terminal punctuation and commas split off,
//! no sentence boundary markers) decides what counts as the same word.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Highest n-gram order handled anywhere in the toolkit (a second-order Markov chain).
pub const MAX_ORDER: usize = 3;

/// Characters detached from the end of a whitespace-delimited fragment.
pub const DETACHED_PUNCTUATION: [char; 5] = ['.', '!', '?', '\u{0964}', ','];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("invalid n-gram order {0}, expected 1, 2 or 3")]
    InvalidOrder(usize),
    #[error("invalid token {0:?}: tokens must be non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

/// A single normalized word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    /// NFC-normalizes `surface` and checks it is a single non-empty word.
    pub fn new(surface: &str) -> Result<Self, CorpusError> {
        let normalized: String = surface.nfc().collect();
        if normalized.is_empty() || normalized.chars().any(char::is_whitespace) {
            return Err(CorpusError::InvalidToken(surface.to_string()));
        }
        Ok(Token(normalized))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = CorpusError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(&value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Tokens of one sentence, in surface order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSequence {
    pub sentence_id: String,
    pub tokens: Vec<Token>,
}

impl TokenSequence {
    pub fn new(sentence_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        TokenSequence {
            sentence_id: sentence_id.into(),
            tokens,
        }
    }

    /// Builds a sequence from already-split words, validating each one.
    pub fn from_words<S: AsRef<str>>(
        sentence_id: impl Into<String>,
        words: &[S],
    ) -> Result<Self, CorpusError> {
        let tokens = words
            .iter()
            .map(|w| Token::new(w.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TokenSequence::new(sentence_id, tokens))
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(Token::as_str)
    }

    /// Space-joined surface form; tokenizing it again yields the same tokens.
    pub fn detokenize(&self) -> String {
        self.words().collect::<Vec<_>>().join(" ")
    }
}

/// A contiguous run of one to three words.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ngram {
    words: Vec<String>,
}

impl Ngram {
    pub fn new<S: AsRef<str>>(words: &[S]) -> Result<Self, CorpusError> {
        check_order(words.len())?;
        let words = words
            .iter()
            .map(|w| Token::new(w.as_ref()).map(String::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ngram { words })
    }

    fn from_tokens(tokens: &[Token]) -> Self {
        Ngram {
            words: tokens.iter().map(|t| t.0.clone()).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Canonical key: the words joined by a single ASCII space.
    pub fn key(&self) -> String {
        self.words.join(" ")
    }
}

impl fmt::Display for Ngram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

pub(crate) fn check_order(order: usize) -> Result<(), CorpusError> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(CorpusError::InvalidOrder(order))
    }
}

/// Splits raw text into normalized tokens with an empty sentence id.
pub fn tokenize(raw: &str) -> TokenSequence {
    tokenize_sentence("", raw)
}

pub fn tokenize_sentence(sentence_id: impl Into<String>, raw: &str) -> TokenSequence {
    let normalized: String = raw.nfc().collect();
    let mut tokens = Vec::new();
    for fragment in normalized.split(char::is_whitespace) {
        let stem = fragment.trim_end_matches(DETACHED_PUNCTUATION);
        if !stem.is_empty() {
            tokens.push(Token(stem.to_string()));
        }
        for punct in fragment[stem.len()..].chars() {
            tokens.push(Token(punct.to_string()));
        }
    }
    TokenSequence::new(sentence_id, tokens)
}

/// All n-grams of `order` in source order, sliding by one with no padding.
pub fn extract_ngrams(seq: &TokenSequence, order: usize) -> Result<Vec<Ngram>, CorpusError> {
    check_order(order)?;
    Ok(seq.tokens.windows(order).map(Ngram::from_tokens).collect())
}

/// Canonical keys of every window of `order`; avoids building `Ngram` values in hot loops.
pub(crate) fn window_keys(tokens: &[Token], order: usize) -> impl Iterator<Item = String> + '_ {
    tokens.windows(order).map(|w| {
        let mut key = String::with_capacity(w.iter().map(|t| t.0.len() + 1).sum());
        for (i, t) in w.iter().enumerate() {
            if i > 0 {
                key.push(' ');
            }
            key.push_str(&t.0);
        }
        key
    })
}

/// Total order on sentence ids: numeric ids numerically, then all other ids as strings.
pub fn compare_sentence_ids(a: &str, b: &str) -> std::cmp::Ordering {
    match (a.parse::<u64>(), b.parse::<u64>()) {
        (Ok(x), Ok(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Ok(_), Err(_)) => std::cmp::Ordering::Less,
        (Err(_), Ok(_)) => std::cmp::Ordering::Greater,
        (Err(_), Err(_)) => a.cmp(b),
    }
}

/// Reads a one-sentence-per-line corpus; the 1-based line number is the sentence id.
pub fn read_corpus<R: BufRead>(mut reader: R) -> Result<Vec<TokenSequence>, CorpusError> {
    let mut sentences = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|e| CorpusError::Io(e.to_string()))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf).map_err(|_| CorpusError::InvalidUtf8 { line: line_no })?;
        let line = line.strip_suffix('\n').unwrap_or(line);
        let line = line.strip_suffix('\r').unwrap_or(line);
        sentences.push(tokenize_sentence(line_no.to_string(), line));
    }
    Ok(sentences)
}
