use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mtrank_cli::commands;
use mtrank_cli::config::parse_category_flag;
use mtrank_cli::{CliError, RunConfig};
use mtrank_core::eval::CategorySpec;
use mtrank_core::{Coverage, UnigramDenominator};

/// Train n-gram models and rank machine-translation outputs.
#[derive(Parser)]
#[command(name = "mtrank", version)]
struct Cli {
    /// `key = value` settings file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count n-grams in a corpus and write the model file.
    BuildLm(BuildLmArgs),
    /// Print type and token counts for a corpus or a model file.
    Stats(StatsArgs),
    /// Rank candidate translations of every source sentence.
    Rank(RankArgs),
    /// Compare LM rankings with human scores per engine category.
    Evaluate(EvaluateArgs),
    /// Validate a lexicon file and report its coverage of a corpus.
    LexiconCheck(LexiconCheckArgs),
}

#[derive(Args)]
struct BuildLmArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// tokens | vocab
    #[arg(long)]
    unigram_denominator: Option<UnigramDenominator>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long)]
    source_lm: Option<PathBuf>,
    #[arg(long)]
    target_lm: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// any | majority | all
    #[arg(long)]
    coverage: Option<Coverage>,
    /// tokens | vocab
    #[arg(long)]
    unigram_denominator: Option<UnigramDenominator>,
    #[arg(long)]
    source_language: Option<String>,
    #[arg(long)]
    target_language: Option<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    ranked: Option<PathBuf>,
    #[arg(long)]
    human_scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// NAME=E1,E2,... (repeatable)
    #[arg(long = "category", value_parser = parse_category_flag)]
    categories: Vec<CategorySpec>,
}

#[derive(Args)]
struct LexiconCheckArgs {
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
}

impl Command {
    fn flags(&self) -> RunConfig {
        match self {
            Command::BuildLm(a) => RunConfig {
                corpus: a.corpus.clone(),
                language: a.language.clone(),
                out: a.out.clone(),
                unigram_denominator: a.unigram_denominator,
                ..RunConfig::default()
            },
            Command::Stats(a) => RunConfig {
                corpus: a.corpus.clone(),
                model: a.model.clone(),
                language: a.language.clone(),
                ..RunConfig::default()
            },
            Command::Rank(a) => RunConfig {
                sources: a.sources.clone(),
                candidates: a.candidates.clone(),
                source_lm: a.source_lm.clone(),
                target_lm: a.target_lm.clone(),
                lexicon: a.lexicon.clone(),
                out: a.out.clone(),
                coverage: a.coverage,
                unigram_denominator: a.unigram_denominator,
                source_language: a.source_language.clone(),
                target_language: a.target_language.clone(),
                ..RunConfig::default()
            },
            Command::Evaluate(a) => RunConfig {
                ranked: a.ranked.clone(),
                human_scores: a.human_scores.clone(),
                out: a.out.clone(),
                categories: a.categories.clone(),
                ..RunConfig::default()
            },
            Command::LexiconCheck(a) => RunConfig {
                lexicon: a.lexicon.clone(),
                corpus: a.corpus.clone(),
                ..RunConfig::default()
            },
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = base.overlay(cli.command.flags());
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::BuildLm(_) => commands::cmd_build_lm(&config, &mut stdout).map(drop),
        Command::Stats(_) => commands::cmd_stats(&config, &mut stdout).map(drop),
        Command::Rank(_) => commands::cmd_rank(&config, &mut stdout).map(drop),
        Command::Evaluate(_) => commands::cmd_evaluate(&config, &mut stdout).map(drop),
        Command::LexiconCheck(_) => commands::cmd_lexicon_check(&config, &mut stdout).map(drop),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.to_exit_code()
        }
    }
}
