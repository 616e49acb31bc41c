use std::process::ExitCode;

use thiserror::Error;

use mtrank_core::corpus::CorpusError;
use mtrank_core::eval::{EvalError, HumanFileError};
use mtrank_core::lexicon::LexiconError;
use mtrank_core::model_file::ModelFileError;
use mtrank_core::ranker::{InputError, RankError};

/// Failure classes, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config file, missing required setting.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or malformed input file.
    #[error("input error: {0}")]
    Input(String),
    /// Inputs parse but do not fit together.
    #[error("data consistency error: {0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Data(_) => 4,
        }
    }

    pub fn to_exit_code(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }

    pub(crate) fn input_at(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        CliError::Input(format!("{}: {e}", path.display()))
    }
}

impl From<RankError> for CliError {
    fn from(e: RankError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::WrongScoreCount { .. } | EvalError::ScoreOutOfRange { .. } => CliError::Input(e.to_string()),
            EvalError::EmptyCategory(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub(crate) fn model_error(path: &std::path::Path, e: ModelFileError) -> CliError {
    match e {
        ModelFileError::Inconsistent(_) => CliError::Data(format!("{}: {e}", path.display())),
        _ => CliError::input_at(path, e),
    }
}

pub(crate) fn lexicon_error(path: &std::path::Path, e: LexiconError) -> CliError {
    CliError::input_at(path, e)
}

pub(crate) fn corpus_error(path: &std::path::Path, e: CorpusError) -> CliError {
    CliError::input_at(path, e)
}

pub(crate) fn table_error(path: &std::path::Path, e: InputError) -> CliError {
    CliError::input_at(path, e)
}

pub(crate) fn human_error(path: &std::path::Path, e: HumanFileError) -> CliError {
    CliError::input_at(path, e)
}
