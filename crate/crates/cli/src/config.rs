//! Run configuration: a `key = value` file overlaid by command-line flags.
//!
//! ```text
//! # paths are relative to this file
//! source-lm = models/en.lm
//! target-lm = models/hi.lm
//! coverage = any
//! category.web = E1,E2,E3
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use mtrank_core::eval::CategorySpec;
use mtrank_core::{Coverage, UnigramDenominator};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub language: Option<String>,
    pub out: Option<PathBuf>,
    pub sources: Option<PathBuf>,
    pub candidates: Option<PathBuf>,
    pub source_lm: Option<PathBuf>,
    pub target_lm: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub ranked: Option<PathBuf>,
    pub human_scores: Option<PathBuf>,
    pub source_language: Option<String>,
    pub target_language: Option<String>,
    pub unigram_denominator: Option<UnigramDenominator>,
    pub coverage: Option<Coverage>,
    pub categories: Vec<CategorySpec>,
}

fn config_err(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("config line {line}: {message}"))
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        RunConfig::parse(&text, base)
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line_no, "expected key = value"))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(config_err(line_no, format!("duplicate key {key:?}")));
            }
            let path = || Some(base.join(value));
            match key {
                "corpus" => cfg.corpus = path(),
                "model" => cfg.model = path(),
                "out" => cfg.out = path(),
                "sources" => cfg.sources = path(),
                "candidates" => cfg.candidates = path(),
                "source-lm" => cfg.source_lm = path(),
                "target-lm" => cfg.target_lm = path(),
                "lexicon" => cfg.lexicon = path(),
                "ranked" => cfg.ranked = path(),
                "human-scores" => cfg.human_scores = path(),
                "language" => cfg.language = Some(value.to_string()),
                "source-language" => cfg.source_language = Some(value.to_string()),
                "target-language" => cfg.target_language = Some(value.to_string()),
                "unigram-denominator" => {
                    cfg.unigram_denominator = Some(value.parse().map_err(|e| config_err(line_no, e))?)
                }
                "coverage" => cfg.coverage = Some(value.parse().map_err(|e| config_err(line_no, e))?),
                _ => match key.strip_prefix("category.") {
                    Some(name) if !name.is_empty() => {
                        cfg.categories.push(parse_category_engines(name, value).map_err(|e| config_err(line_no, e))?)
                    }
                    _ => return Err(config_err(line_no, format!("unknown key {key:?}"))),
                },
            }
        }
        Ok(cfg)
    }

    /// Returns `self` with every setting present in `flags` replaced by the flag value.
    pub fn overlay(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => { $( if flags.$field.is_some() { self.$field = flags.$field; } )* };
        }
        take!(
            corpus, model, language, out, sources, candidates, source_lm, target_lm, lexicon, ranked,
            human_scores, source_language, target_language, unigram_denominator, coverage
        );
        if !flags.categories.is_empty() {
            self.categories = flags.categories;
        }
        self
    }

    /// Digest of the non-path settings for one command, so relocating files does not change it.
    pub fn settings_digest(&self, command: &str) -> String {
        let mut lines = vec![format!("command={command}")];
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                lines.push(format!("{k}={v}"));
            }
        };
        push("language", self.language.clone());
        push("source-language", self.source_language.clone());
        push("target-language", self.target_language.clone());
        push("unigram-denominator", self.unigram_denominator.map(|d| d.to_string()));
        push("coverage", self.coverage.map(|c| c.to_string()));
        for c in &self.categories {
            lines.push(format!("category.{}={}", c.name, c.engine_ids.join(",")));
        }
        lines.sort();
        hex::encode(Sha256::digest(lines.join("\n").as_bytes()))
    }
}

pub fn parse_category_engines(name: &str, engines: &str) -> Result<CategorySpec, String> {
    let ids: Vec<&str> = engines.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    CategorySpec::new(name, ids).map_err(|e| e.to_string())
}

/// Parses a `NAME=E1,E2` flag value.
pub fn parse_category_flag(s: &str) -> Result<CategorySpec, String> {
    let (name, engines) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=ENGINE,ENGINE,... but got {s:?}"))?;
    if name.trim().is_empty() {
        return Err("empty category name".into());
    }
    parse_category_engines(name.trim(), engines)
}

pub(crate) fn require_path<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    let path = value
        .as_deref()
        .ok_or_else(|| CliError::Config(format!("missing required setting {key}")))?;
    Ok(path)
}

pub(crate) fn require_input<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, CliError> {
    let path = require_path(value, key)?;
    if !path.exists() {
        return Err(CliError::Config(format!("{key}: {} does not exist", path.display())));
    }
    Ok(path)
}
