//! Ranking of candidate translations of one source sentence.
//!
//! The source sentence's trigrams are filtered through the source model, the
//! surviving words are projected through the lexicon, and each candidate is
//! scored by summing target-model trigram probabilities over its trigrams that
//! are known to the target model and touch the projected words.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, BufRead};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{extract_ngrams, tokenize_sentence, window_keys, Ngram, TokenSequence};
use crate::lexicon::{ParallelLexicon, RegisteredWords};
use crate::lm::NgramModel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankError {
    #[error("sentence {0:?} has no candidates")]
    NoCandidates(String),
    #[error("sentence {sentence_id:?} has engine {engine_id:?} more than once")]
    DuplicateEngine { sentence_id: String, engine_id: String },
}

/// How many words of a candidate trigram must be registered for it to count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coverage {
    /// at least one of three
    #[default]
    Any,
    /// at least two of three
    Majority,
    /// all three
    All,
}

impl Coverage {
    pub fn required(self) -> usize {
        match self {
            Coverage::Any => 1,
            Coverage::Majority => 2,
            Coverage::All => 3,
        }
    }
}

impl fmt::Display for Coverage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coverage::Any => "any",
            Coverage::Majority => "majority",
            Coverage::All => "all",
        })
    }
}

impl FromStr for Coverage {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Coverage::Any),
            "majority" => Ok(Coverage::Majority),
            "all" => Ok(Coverage::All),
            other => Err(format!("unknown coverage {other:?} (expected any|all|majority)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub engine_id: String,
    pub sentence_id: String,
    pub text: String,
    pub tokens: TokenSequence,
}

impl Candidate {
    pub fn new(sentence_id: impl Into<String>, engine_id: impl Into<String>, text: impl Into<String>) -> Self {
        let sentence_id = sentence_id.into();
        let text = text.into();
        let tokens = tokenize_sentence(sentence_id.clone(), &text);
        Candidate {
            engine_id: engine_id.into(),
            sentence_id,
            text,
            tokens,
        }
    }
}

/// Per-candidate diagnostics: n-gram counts and the cumulative probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub engine_id: String,
    pub unigram_count: usize,
    pub bigram_count: usize,
    pub trigram_count: usize,
    pub matched_trigram_count: usize,
    pub prob_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedCandidate {
    /// 1-based position in the list.
    pub rank: usize,
    #[serde(flatten)]
    pub score: CandidateScore,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub sentence_id: String,
    pub retained_trigrams: usize,
    pub registered: RegisteredWords,
    /// Best first.
    pub entries: Vec<RankedCandidate>,
}

impl RankedList {
    pub fn engine_order(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.score.engine_id.as_str()).collect()
    }

    pub fn rank_of(&self, engine_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.score.engine_id == engine_id)
            .map(|e| e.rank)
    }

    /// Flattened output records, one per candidate, in rank order.
    pub fn records(&self) -> Vec<ScoreRecord> {
        self.entries
            .iter()
            .map(|e| ScoreRecord {
                sentence_id: self.sentence_id.clone(),
                rank: e.rank,
                score: e.score.clone(),
            })
            .collect()
    }
}

/// One line of ranked output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub sentence_id: String,
    pub rank: usize,
    #[serde(flatten)]
    pub score: CandidateScore,
}

/// Source trigrams present in the source model, in order, duplicates kept.
pub fn retain_source_trigrams(source: &TokenSequence, source_lm: &NgramModel) -> Vec<Ngram> {
    extract_ngrams(source, 3)
        .expect("order 3 is valid")
        .into_iter()
        .filter(|g| source_lm.contains(g))
        .collect()
}

pub fn score_candidate(
    candidate: &Candidate,
    registered: &RegisteredWords,
    target_lm: &NgramModel,
    coverage: Coverage,
) -> CandidateScore {
    let tokens = &candidate.tokens.tokens;
    let len = tokens.len();
    let mut matched = 0;
    let mut prob_sum = 0.0;
    for (window, key) in tokens.windows(3).zip(window_keys(tokens, 3)) {
        let covered = window
            .iter()
            .filter(|t| registered.contains(t.as_str()))
            .count();
        if covered < coverage.required() || !target_lm.contains_key(3, &key) {
            continue;
        }
        matched += 1;
        prob_sum += target_lm
            .prob_key(3, &key)
            .map(|p| p.value())
            .unwrap_or(0.0);
    }
    CandidateScore {
        engine_id: candidate.engine_id.clone(),
        unigram_count: len,
        bigram_count: len.saturating_sub(1),
        trigram_count: len.saturating_sub(2),
        matched_trigram_count: matched,
        prob_sum,
    }
}

/// Orders scores by descending `prob_sum`; equal scores keep their input order.
pub fn sort_scores(sentence_id: impl Into<String>, mut scores: Vec<CandidateScore>) -> RankedList {
    scores.sort_by(|a, b| b.prob_sum.total_cmp(&a.prob_sum));
    RankedList {
        sentence_id: sentence_id.into(),
        retained_trigrams: 0,
        registered: RegisteredWords::new(),
        entries: scores
            .into_iter()
            .enumerate()
            .map(|(i, score)| RankedCandidate { rank: i + 1, score })
            .collect(),
    }
}

/// Ranks every candidate translation of `source`.
pub fn rank(
    source: &TokenSequence,
    candidates: &[Candidate],
    source_lm: &NgramModel,
    target_lm: &NgramModel,
    lexicon: &ParallelLexicon,
    coverage: Coverage,
) -> Result<RankedList, RankError> {
    if candidates.is_empty() {
        return Err(RankError::NoCandidates(source.sentence_id.clone()));
    }
    let mut seen = HashSet::new();
    for c in candidates {
        if !seen.insert(c.engine_id.as_str()) {
            return Err(RankError::DuplicateEngine {
                sentence_id: source.sentence_id.clone(),
                engine_id: c.engine_id.clone(),
            });
        }
    }
    let retained = retain_source_trigrams(source, source_lm);
    let registered = lexicon.project(&retained);
    let scores = candidates
        .iter()
        .map(|c| score_candidate(c, &registered, target_lm, coverage))
        .collect();
    let mut ranked = sort_scores(source.sentence_id.clone(), scores);
    ranked.retained_trigrams = retained.len();
    ranked.registered = registered;
    Ok(ranked)
}

#[derive(Debug, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn input_err(line: usize, message: impl Into<String>) -> InputError {
    InputError::Parse {
        line,
        message: message.into(),
    }
}

fn tsv_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), InputError>> {
    reader.lines().enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        match line {
            Ok(l) => {
                let l = l.strip_suffix('\r').map(str::to_string).unwrap_or(l);
                (!l.trim().is_empty()).then_some(Ok((line_no, l)))
            }
            Err(e) if e.kind() == io::ErrorKind::InvalidData => Some(Err(input_err(line_no, "invalid UTF-8"))),
            Err(e) => Some(Err(InputError::Io(e))),
        }
    })
}

/// Reads `sentence_id<TAB>source-text` lines, keeping file order.
pub fn read_sources<R: BufRead>(reader: R) -> Result<IndexMap<String, String>, InputError> {
    let mut sources = IndexMap::new();
    for line in tsv_lines(reader) {
        let (line_no, line) = line?;
        let (id, text) = line
            .split_once('\t')
            .ok_or_else(|| input_err(line_no, "expected sentence_id<TAB>text"))?;
        if id.is_empty() {
            return Err(input_err(line_no, "empty sentence id"));
        }
        if sources.insert(id.to_string(), text.to_string()).is_some() {
            return Err(input_err(line_no, format!("duplicate sentence id {id:?}")));
        }
    }
    Ok(sources)
}

/// Reads `sentence_id<TAB>engine_id<TAB>translation` lines.
pub fn read_candidates<R: BufRead>(reader: R) -> Result<Vec<Candidate>, InputError> {
    let mut candidates = Vec::new();
    for line in tsv_lines(reader) {
        let (line_no, line) = line?;
        let mut fields = line.splitn(3, '\t');
        let (Some(sid), Some(eid), Some(text)) = (fields.next(), fields.next(), fields.next()) else {
            return Err(input_err(line_no, "expected sentence_id<TAB>engine_id<TAB>text"));
        };
        if sid.is_empty() || eid.is_empty() {
            return Err(input_err(line_no, "empty sentence or engine id"));
        }
        candidates.push(Candidate::new(sid, eid, text));
    }
    Ok(candidates)
}

/// Reads ranked output written as one JSON record per line; `#` lines are comments.
pub fn read_score_records<R: BufRead>(reader: R) -> Result<Vec<ScoreRecord>, InputError> {
    let mut records = Vec::new();
    for line in tsv_lines(reader) {
        let (line_no, line) = line?;
        if line.starts_with('#') {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| input_err(line_no, e.to_string()))?;
        records.push(record);
    }
    Ok(records)
}
