//! Sectioned TSV serialization of [`NgramModel`].
//!
//! ```text
//! # free-form comment lines are allowed before the header
//! \model	language=en	max_order=3	sentences=1	total_tokens=3	vocab_size=2	denominator=tokens
//! \1-grams	2
//! a	2	0.666666666667
//! b	1	0.333333333333
//! \2-grams	2
//! ...
//! ```
//!
//! Records are `key<TAB>count<TAB>probability`, sorted by descending count and
//! then ascending key. Counts are authoritative; the probability column is
//! rewritten from counts on every save.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::corpus::{Token, MAX_ORDER};
use crate::lm::{NgramModel, UnigramDenominator};

const HEADER_TAG: &str = "\\model";

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("inconsistent model: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> ModelFileError {
    ModelFileError::Parse {
        line,
        message: message.into(),
    }
}

/// Formats `value` with at most `digits` significant digits, trailing zeros trimmed.
pub fn format_significant(value: f64, digits: usize) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 { "0".to_string() } else { value.to_string() };
    }
    let magnitude = value.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{value:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    s
}

pub fn write_model<W: Write>(model: &NgramModel, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "{HEADER_TAG}\tlanguage={}\tmax_order={MAX_ORDER}\tsentences={}\ttotal_tokens={}\tvocab_size={}\tdenominator={}",
        model.language_tag(),
        model.sentence_count(),
        model.total_tokens(),
        model.vocab_size(),
        model.denominator(),
    )?;
    for order in 1..=MAX_ORDER {
        let entries = model.sorted_entries(order).expect("order in range");
        writeln!(out, "\\{order}-grams\t{}", entries.len())?;
        for (key, count) in entries {
            let prob = model
                .prob_key(order, key)
                .map(|p| p.value())
                .unwrap_or(0.0);
            writeln!(out, "{key}\t{count}\t{}", format_significant(prob, 12))?;
        }
    }
    out.flush()
}

pub fn model_to_string(model: &NgramModel) -> String {
    let mut buf = Vec::new();
    write_model(model, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("model text is UTF-8")
}

struct Header {
    language: String,
    sentences: u64,
    total_tokens: u64,
    vocab_size: u64,
    denominator: UnigramDenominator,
}

fn parse_header(line_no: usize, line: &str) -> Result<Header, ModelFileError> {
    let mut fields = line.split('\t');
    if fields.next() != Some(HEADER_TAG) {
        return Err(parse_err(line_no, format!("expected {HEADER_TAG} header")));
    }
    let mut values: HashMap<&str, &str> = HashMap::new();
    for field in fields {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("malformed header field {field:?}")))?;
        values.insert(k, v);
    }
    let get = |k: &str| {
        values
            .get(k)
            .copied()
            .ok_or_else(|| parse_err(line_no, format!("header lacks {k}")))
    };
    let number = |k: &str| -> Result<u64, ModelFileError> {
        get(k)?
            .parse()
            .map_err(|_| parse_err(line_no, format!("header field {k} is not a count")))
    };
    let max_order = number("max_order")?;
    if max_order != MAX_ORDER as u64 {
        return Err(parse_err(line_no, format!("unsupported max_order {max_order}")));
    }
    Ok(Header {
        language: get("language")?.to_string(),
        sentences: number("sentences")?,
        total_tokens: number("total_tokens")?,
        vocab_size: number("vocab_size")?,
        denominator: get("denominator")?.parse().map_err(|e: String| parse_err(line_no, e))?,
    })
}

pub fn read_model<R: BufRead>(reader: R) -> Result<NgramModel, ModelFileError> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = loop {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing model header"))?;
        let line = line.map_err(|e| io_or_utf8(line_no, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        break parse_header(line_no, &line)?;
    };

    let mut counts: [HashMap<String, u64>; MAX_ORDER] = Default::default();
    for order in 1..=MAX_ORDER {
        let (line_no, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing {order}-grams section")))?;
        let line = line.map_err(|e| io_or_utf8(line_no, e))?;
        let expected = line
            .strip_prefix(&format!("\\{order}-grams\t"))
            .and_then(|n| n.parse::<usize>().ok())
            .ok_or_else(|| parse_err(line_no, format!("expected \\{order}-grams section header")))?;
        let map = &mut counts[order - 1];
        map.reserve(expected);
        for _ in 0..expected {
            let (line_no, line) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("{order}-grams section is truncated")))?;
            let line = line.map_err(|e| io_or_utf8(line_no, e))?;
            let (key, count) = parse_record(line_no, order, &line)?;
            if map.insert(key, count).is_some() {
                return Err(parse_err(line_no, "duplicate n-gram"));
            }
        }
    }
    if let Some((line_no, line)) = lines.next() {
        let line = line.map_err(|e| io_or_utf8(line_no, e))?;
        if !line.trim().is_empty() {
            return Err(parse_err(line_no, "unexpected content after last section"));
        }
    }

    let model = NgramModel::from_counts(header.language, header.denominator, header.sentences, counts);
    check_consistency(&model, header.total_tokens, header.vocab_size)?;
    Ok(model)
}

fn io_or_utf8(line: usize, e: io::Error) -> ModelFileError {
    if e.kind() == io::ErrorKind::InvalidData {
        parse_err(line, "invalid UTF-8")
    } else {
        ModelFileError::Io(e)
    }
}

fn parse_record(line_no: usize, order: usize, line: &str) -> Result<(String, u64), ModelFileError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(parse_err(line_no, format!("expected 3 columns, found {}", fields.len())));
    }
    let words: Vec<&str> = fields[0].split(' ').collect();
    if words.len() != order {
        return Err(parse_err(line_no, format!("key {:?} is not a {order}-gram", fields[0])));
    }
    for w in &words {
        match Token::new(w) {
            Ok(t) if t.as_str() == *w => {}
            _ => return Err(parse_err(line_no, format!("invalid or unnormalized word {w:?}"))),
        }
    }
    let count: u64 = fields[1]
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid count {:?}", fields[1])))?;
    if count == 0 {
        return Err(parse_err(line_no, "zero count"));
    }
    fields[2]
        .parse::<f64>()
        .map_err(|_| parse_err(line_no, format!("invalid probability {:?}", fields[2])))?;
    Ok((fields[0].to_string(), count))
}

fn check_consistency(model: &NgramModel, total_tokens: u64, vocab_size: u64) -> Result<(), ModelFileError> {
    let inconsistent = |m: String| Err(ModelFileError::Inconsistent(m));
    if model.total_tokens() != total_tokens {
        return inconsistent(format!(
            "header total_tokens={total_tokens} but unigram counts sum to {}",
            model.total_tokens()
        ));
    }
    if model.vocab_size() != vocab_size {
        return inconsistent(format!(
            "header vocab_size={vocab_size} but {} unigrams are stored",
            model.vocab_size()
        ));
    }
    for order in 2..=MAX_ORDER {
        for (key, &count) in model.counts(order).expect("order in range") {
            let (prefix, _) = key.rsplit_once(' ').expect("multi-word key");
            let prefix_count = model.count_key(order - 1, prefix);
            if count > prefix_count {
                return inconsistent(format!(
                    "{key:?} occurs {count} times but its prefix {prefix:?} only {prefix_count}"
                ));
            }
            for word in key.split(' ') {
                if !model.contains_key(1, word) {
                    return inconsistent(format!("{key:?} uses unknown word {word:?}"));
                }
            }
        }
    }
    Ok(())
}
