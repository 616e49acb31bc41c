//! Maximum-likelihood n-gram language models and automatic ranking of
//! machine-translation outputs by lexicon-projected trigram probabilities.
//!
//! The pipeline: [`corpus`] tokenizes text, [`lm`] counts n-grams and answers
//! probability queries, [`lexicon`] projects source words into target words,
//! [`ranker`] scores and orders candidate translations, and [`eval`] compares
//! the resulting rankings with human judgments.

pub mod corpus;
pub mod eval;
pub mod lexicon;
pub mod lm;
pub mod model_file;
pub mod ranker;

pub use corpus::{extract_ngrams, tokenize, tokenize_sentence, Ngram, Token, TokenSequence};
pub use lexicon::{ParallelLexicon, RegisteredWords};
pub use lm::{CorpusStats, NgramModel, Probability, UnigramDenominator};
pub use ranker::{rank, Candidate, CandidateScore, Coverage, RankedList};
