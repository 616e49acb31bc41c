//! Word-level source→target parallel lexicon.
//!
//! File format is UTF-8 TSV `source<TAB>target[<TAB>weight]`, one pair per
//! line. Lines starting with `#` are comments, except an optional directive
//! `#@ source=<tag> target=<tag>` naming the two languages.

use std::io::{self, BufRead, Write};

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::corpus::{Ngram, Token};

const DIRECTIVE: &str = "#@";

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Target words registered for a sentence, duplicate-free, in first-registration order.
pub type RegisteredWords = IndexSet<String>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParallelLexicon {
    pub source_language: String,
    pub target_language: String,
    /// source word -> (target word -> optional weight), both in file order.
    entries: IndexMap<String, IndexMap<String, Option<f64>>>,
}

impl ParallelLexicon {
    pub fn new(source_language: impl Into<String>, target_language: impl Into<String>) -> Self {
        ParallelLexicon {
            source_language: source_language.into(),
            target_language: target_language.into(),
            entries: IndexMap::new(),
        }
    }

    /// Adds a pair; a repeated pair keeps its first weight.
    pub fn insert(&mut self, source: &Token, target: &Token, weight: Option<f64>) {
        self.entries
            .entry(source.as_str().to_string())
            .or_default()
            .entry(target.as_str().to_string())
            .or_insert(weight);
    }

    pub fn lookup(&self, source_word: &str) -> impl Iterator<Item = &str> {
        self.entries
            .get(source_word)
            .into_iter()
            .flat_map(|targets| targets.keys().map(String::as_str))
    }

    pub fn weight(&self, source_word: &str, target_word: &str) -> Option<f64> {
        self.entries.get(source_word)?.get(target_word).copied().flatten()
    }

    pub fn contains_source(&self, source_word: &str) -> bool {
        self.entries.contains_key(source_word)
    }

    /// Number of distinct source words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pair_count(&self) -> usize {
        self.entries.values().map(IndexMap::len).sum()
    }

    pub fn sources(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Union of the translations of every word of every retained n-gram.
    pub fn project(&self, retained: &[Ngram]) -> RegisteredWords {
        let mut registered = RegisteredWords::new();
        for ngram in retained {
            for word in ngram.words() {
                registered.extend(self.lookup(word).map(str::to_string));
            }
        }
        registered
    }

    pub fn load<R: BufRead>(reader: R) -> Result<Self, LexiconError> {
        let mut lex = ParallelLexicon::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| {
                if e.kind() == io::ErrorKind::InvalidData {
                    parse_err(line_no, "invalid UTF-8")
                } else {
                    LexiconError::Io(e)
                }
            })?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if let Some(rest) = line.strip_prefix(DIRECTIVE) {
                lex.apply_directive(line_no, rest)?;
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(parse_err(
                    line_no,
                    format!("expected 2 or 3 tab-separated columns, found {}", fields.len()),
                ));
            }
            let source = field_token(line_no, "source", fields[0])?;
            let target = field_token(line_no, "target", fields[1])?;
            let weight = match fields.get(2) {
                Some(w) => match w.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => return Err(parse_err(line_no, format!("invalid weight {w:?}"))),
                },
                None => None,
            };
            lex.insert(&source, &target, weight);
        }
        Ok(lex)
    }

    fn apply_directive(&mut self, line_no: usize, rest: &str) -> Result<(), LexiconError> {
        for field in rest.split_whitespace() {
            match field.split_once('=') {
                Some(("source", v)) => self.source_language = v.to_string(),
                Some(("target", v)) => self.target_language = v.to_string(),
                _ => return Err(parse_err(line_no, format!("unknown directive field {field:?}"))),
            }
        }
        Ok(())
    }

    pub fn save<W: Write>(&self, mut out: W) -> io::Result<()> {
        if !self.source_language.is_empty() || !self.target_language.is_empty() {
            writeln!(
                out,
                "{DIRECTIVE} source={} target={}",
                self.source_language, self.target_language
            )?;
        }
        for (source, targets) in &self.entries {
            for (target, weight) in targets {
                match weight {
                    Some(w) => writeln!(out, "{source}\t{target}\t{w}")?,
                    None => writeln!(out, "{source}\t{target}")?,
                }
            }
        }
        out.flush()
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        line,
        message: message.into(),
    }
}

fn field_token(line_no: usize, what: &str, raw: &str) -> Result<Token, LexiconError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Err(parse_err(line_no, format!("empty {what} field")));
    }
    Token::new(raw).map_err(|_| parse_err(line_no, format!("{what} field {raw:?} is not a single word")))
}
