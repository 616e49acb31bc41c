//! Implementations of the subcommands. Each one reads its inputs from the
//! resolved [`RunConfig`], writes its output file, and prints a short summary.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::Path;

use indexmap::IndexMap;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use mtrank_core::corpus::{compare_sentence_ids, read_corpus, tokenize_sentence};
use mtrank_core::eval::{agreement, human_rankings, render_report, CategorySpec, Ranking};
use mtrank_core::model_file::{read_model, write_model};
use mtrank_core::ranker::{read_candidates, read_score_records, read_sources, ScoreRecord};
use mtrank_core::{rank, Candidate, CorpusStats, NgramModel, ParallelLexicon};

use crate::config::{require_input, require_path, RunConfig};
use crate::error::{corpus_error, human_error, lexicon_error, model_error, table_error, CliError};

pub const TOOL_VERSION: &str = concat!("mtrank ", env!("CARGO_PKG_VERSION"));

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input_at(path, e))
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `#`-prefixed lines naming the tool, the settings digest and every input digest.
fn provenance(command: &str, config: &RunConfig, inputs: &[(&str, &[u8])]) -> String {
    let mut header = format!("# {TOOL_VERSION} {command}\n# config-sha256 {}\n", config.settings_digest(command));
    for (name, bytes) in inputs {
        header.push_str(&format!("# input {name} sha256 {}\n", digest(bytes)));
    }
    header
}

fn write_output(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn io_err(e: io::Error) -> CliError {
    CliError::Config(format!("cannot write output: {e}"))
}

pub fn stats_table(language: &str, stats: &CorpusStats) -> String {
    format!(
        "language\tsentences\tunigram_types\tbigram_types\ttrigram_types\tunigram_tokens\tbigram_tokens\ttrigram_tokens\n\
         {language}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        stats.sentence_count,
        stats.distinct_unigrams,
        stats.distinct_bigrams,
        stats.distinct_trigrams,
        stats.total_tokens,
        stats.bigram_tokens,
        stats.trigram_tokens,
    )
}

fn train_from_file(path: &Path, language: &str) -> Result<(NgramModel, Vec<u8>), CliError> {
    let bytes = read_bytes(path)?;
    let sentences = read_corpus(bytes.as_slice()).map_err(|e| corpus_error(path, e))?;
    Ok((NgramModel::train_parallel(language, &sentences), bytes))
}

pub fn cmd_build_lm(config: &RunConfig, stdout: &mut dyn Write) -> Result<CorpusStats, CliError> {
    let corpus = require_input(&config.corpus, "corpus")?;
    let out = require_path(&config.out, "out")?;
    let language = config
        .language
        .as_deref()
        .ok_or_else(|| CliError::Config("missing required setting language".into()))?;
    let (model, bytes) = train_from_file(corpus, language)?;
    let model = model.with_denominator(config.unigram_denominator.unwrap_or_default());
    if model.is_empty() {
        eprintln!("warning: {} contains no tokens; writing an empty model", corpus.display());
    }
    let mut buf = provenance("build-lm", config, &[("corpus", &bytes)]).into_bytes();
    write_model(&model, &mut buf).map_err(io_err)?;
    write_output(out, &buf)?;
    let stats = model.stats();
    stdout.write_all(stats_table(language, &stats).as_bytes()).map_err(io_err)?;
    Ok(stats)
}

fn load_model(path: &Path) -> Result<NgramModel, CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::input_at(path, e))?;
    read_model(BufReader::new(file)).map_err(|e| model_error(path, e))
}

pub fn cmd_stats(config: &RunConfig, stdout: &mut dyn Write) -> Result<CorpusStats, CliError> {
    let (language, stats) = match (&config.model, &config.corpus) {
        (Some(_), _) => {
            let model = load_model(require_input(&config.model, "model")?)?;
            (model.language_tag().to_string(), model.stats())
        }
        (None, Some(_)) => {
            let language = config.language.clone().unwrap_or_else(|| "-".into());
            let (model, _) = train_from_file(require_input(&config.corpus, "corpus")?, &language)?;
            (language, model.stats())
        }
        (None, None) => return Err(CliError::Config("stats needs model or corpus".into())),
    };
    stdout.write_all(stats_table(&language, &stats).as_bytes()).map_err(io_err)?;
    Ok(stats)
}

fn check_language(role: &str, model: &NgramModel, expected: Option<&str>) -> Result<(), CliError> {
    match expected {
        Some(tag) if tag != model.language_tag() => Err(CliError::Data(format!(
            "{role} model is tagged {:?} but {tag:?} was configured",
            model.language_tag()
        ))),
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSummary {
    pub sentences: usize,
    pub candidates: usize,
}

pub fn cmd_rank(config: &RunConfig, stdout: &mut dyn Write) -> Result<RankSummary, CliError> {
    let sources_path = require_input(&config.sources, "sources")?;
    let candidates_path = require_input(&config.candidates, "candidates")?;
    let source_lm_path = require_input(&config.source_lm, "source-lm")?;
    let target_lm_path = require_input(&config.target_lm, "target-lm")?;
    let lexicon_path = require_input(&config.lexicon, "lexicon")?;
    let out = require_path(&config.out, "out")?;

    let sources_bytes = read_bytes(sources_path)?;
    let candidates_bytes = read_bytes(candidates_path)?;
    let source_lm_bytes = read_bytes(source_lm_path)?;
    let target_lm_bytes = read_bytes(target_lm_path)?;
    let lexicon_bytes = read_bytes(lexicon_path)?;

    let sources = read_sources(sources_bytes.as_slice()).map_err(|e| table_error(sources_path, e))?;
    let candidates = read_candidates(candidates_bytes.as_slice()).map_err(|e| table_error(candidates_path, e))?;
    let mut source_lm = read_model(source_lm_bytes.as_slice()).map_err(|e| model_error(source_lm_path, e))?;
    let mut target_lm = read_model(target_lm_bytes.as_slice()).map_err(|e| model_error(target_lm_path, e))?;
    let lexicon = ParallelLexicon::load(lexicon_bytes.as_slice()).map_err(|e| lexicon_error(lexicon_path, e))?;
    if let Some(mode) = config.unigram_denominator {
        source_lm.set_denominator(mode);
        target_lm.set_denominator(mode);
    }

    check_language("source", &source_lm, config.source_language.as_deref())?;
    check_language("target", &target_lm, config.target_language.as_deref())?;
    let lexicon_source = Some(lexicon.source_language.as_str()).filter(|s| !s.is_empty());
    let lexicon_target = Some(lexicon.target_language.as_str()).filter(|s| !s.is_empty());
    check_language("source", &source_lm, lexicon_source)?;
    check_language("target", &target_lm, lexicon_target)?;

    let mut by_sentence: IndexMap<String, Vec<Candidate>> = IndexMap::new();
    for c in candidates {
        by_sentence.entry(c.sentence_id.clone()).or_default().push(c);
    }
    let mut missing: Vec<&str> = by_sentence
        .keys()
        .filter(|id| !sources.contains_key(*id))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        missing.sort_by(|a, b| compare_sentence_ids(a, b));
        return Err(CliError::Data(format!(
            "candidates refer to sentences missing from {}: {}",
            sources_path.display(),
            missing.join(", ")
        )));
    }
    for id in sources.keys().filter(|id| !by_sentence.contains_key(*id)) {
        eprintln!("warning: sentence {id:?} has no candidates and is skipped");
    }

    let mut ids: Vec<&String> = by_sentence.keys().collect();
    ids.sort_by(|a, b| compare_sentence_ids(a, b));
    let coverage = config.coverage.unwrap_or_default();
    let ranked = ids
        .par_iter()
        .map(|id| {
            let source = tokenize_sentence(id.as_str(), &sources[id.as_str()]);
            rank(&source, &by_sentence[id.as_str()], &source_lm, &target_lm, &lexicon, coverage)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut buf = provenance(
        "rank",
        config,
        &[
            ("sources", &sources_bytes),
            ("candidates", &candidates_bytes),
            ("source-lm", &source_lm_bytes),
            ("target-lm", &target_lm_bytes),
            ("lexicon", &lexicon_bytes),
        ],
    );
    let mut total = 0;
    for list in &ranked {
        for record in list.records() {
            buf.push_str(&serde_json::to_string(&record).expect("records serialize"));
            buf.push('\n');
            total += 1;
        }
    }
    write_output(out, buf.as_bytes())?;
    let summary = RankSummary {
        sentences: ranked.len(),
        candidates: total,
    };
    writeln!(stdout, "ranked {} candidates across {} sentences", summary.candidates, summary.sentences).map_err(io_err)?;
    Ok(summary)
}

fn pair_set<'a>(rankings: impl Iterator<Item = &'a Ranking>) -> BTreeSet<(String, String)> {
    rankings
        .flat_map(|r| r.engines.iter().map(move |e| (r.sentence_id.clone(), e.clone())))
        .collect()
}

fn describe_pairs(pairs: &[&(String, String)]) -> String {
    pairs.iter().map(|(s, e)| format!("{s}/{e}")).collect::<Vec<_>>().join(", ")
}

pub fn cmd_evaluate(config: &RunConfig, stdout: &mut dyn Write) -> Result<Vec<mtrank_core::eval::AgreementReport>, CliError> {
    let ranked_path = require_input(&config.ranked, "ranked")?;
    let human_path = require_input(&config.human_scores, "human-scores")?;
    let out = require_path(&config.out, "out")?;

    let ranked_bytes = read_bytes(ranked_path)?;
    let human_bytes = read_bytes(human_path)?;
    let records: Vec<ScoreRecord> = read_score_records(ranked_bytes.as_slice()).map_err(|e| table_error(ranked_path, e))?;
    let sheets = mtrank_core::eval::read_human_scores(human_bytes.as_slice()).map_err(|e| human_error(human_path, e))?;

    let lm = Ranking::from_records(&records)?;
    let human: Vec<Ranking> = human_rankings(&sheets)?.into_iter().map(|h| h.into_ranking()).collect();

    let lm_pairs = pair_set(lm.iter());
    let human_pairs = pair_set(human.iter());
    if lm_pairs != human_pairs {
        let no_human: Vec<_> = lm_pairs.difference(&human_pairs).collect();
        let no_lm: Vec<_> = human_pairs.difference(&lm_pairs).collect();
        return Err(CliError::Data(format!(
            "coverage mismatch; missing human scores for [{}]; missing LM ranks for [{}]",
            describe_pairs(&no_human),
            describe_pairs(&no_lm)
        )));
    }

    let categories = if config.categories.is_empty() {
        let mut seen = HashSet::new();
        let engines: Vec<String> = records
            .iter()
            .filter(|r| seen.insert(r.score.engine_id.clone()))
            .map(|r| r.score.engine_id.clone())
            .collect();
        if engines.is_empty() {
            vec![]
        } else {
            vec![CategorySpec::new("combined", engines)?]
        }
    } else {
        config.categories.clone()
    };

    let reports = agreement(&lm, &human, &categories)?;
    let report = render_report(&reports);
    let mut buf = provenance("evaluate", config, &[("ranked", &ranked_bytes), ("human-scores", &human_bytes)]);
    buf.push_str(&report);
    write_output(out, buf.as_bytes())?;
    stdout.write_all(report.as_bytes()).map_err(io_err)?;
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexiconCoverage {
    pub source_words: usize,
    pub pairs: usize,
    pub vocabulary_types: usize,
    pub covered_types: usize,
    pub corpus_tokens: usize,
    pub covered_tokens: usize,
}

pub fn cmd_lexicon_check(config: &RunConfig, stdout: &mut dyn Write) -> Result<LexiconCoverage, CliError> {
    let lexicon_path = require_input(&config.lexicon, "lexicon")?;
    let lexicon = ParallelLexicon::load(read_bytes(lexicon_path)?.as_slice()).map_err(|e| lexicon_error(lexicon_path, e))?;
    let mut report = LexiconCoverage {
        source_words: lexicon.len(),
        pairs: lexicon.pair_count(),
        vocabulary_types: 0,
        covered_types: 0,
        corpus_tokens: 0,
        covered_tokens: 0,
    };
    writeln!(stdout, "lexicon\t{}\nsource_words\t{}\npairs\t{}", lexicon_path.display(), report.source_words, report.pairs)
        .map_err(io_err)?;
    if config.corpus.is_some() {
        let corpus = require_input(&config.corpus, "corpus")?;
        let sentences = read_corpus(read_bytes(corpus)?.as_slice()).map_err(|e| corpus_error(corpus, e))?;
        let mut types: HashMap<&str, usize> = HashMap::new();
        for s in &sentences {
            for w in s.words() {
                *types.entry(w).or_default() += 1;
            }
        }
        report.vocabulary_types = types.len();
        report.corpus_tokens = types.values().sum();
        for (w, n) in &types {
            if lexicon.contains_source(w) {
                report.covered_types += 1;
                report.covered_tokens += n;
            }
        }
        let pct = |a: usize, b: usize| if b == 0 { 0.0 } else { 100.0 * a as f64 / b as f64 };
        writeln!(
            stdout,
            "type_coverage\t{}/{}\t{:.2}%\ntoken_coverage\t{}/{}\t{:.2}%",
            report.covered_types,
            report.vocabulary_types,
            pct(report.covered_types, report.vocabulary_types),
            report.covered_tokens,
            report.corpus_tokens,
            pct(report.covered_tokens, report.corpus_tokens),
        )
        .map_err(io_err)?;
    }
    Ok(report)
}
