//! Comparison of LM rankings against human judgments.
//!
//! Human sheets carry ten scores on a 1 (ideal) to 5 (not acceptable) scale;
//! the mean decides the human ranking, lower first. Both sides are reduced to
//! [`Ranking`]s so the comparison only ever sees positions and tie groups.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{self, BufRead};

use indexmap::IndexMap;
use thiserror::Error;

use crate::corpus::compare_sentence_ids;
use crate::ranker::{RankedList, ScoreRecord};

pub const PARAMETER_COUNT: usize = 10;
pub const MIN_SCORE: u8 = 1;
pub const MAX_SCORE: u8 = 5;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("sheet {sentence_id}/{engine_id}: expected {PARAMETER_COUNT} scores, found {found}")]
    WrongScoreCount {
        sentence_id: String,
        engine_id: String,
        found: usize,
    },
    #[error("sheet {sentence_id}/{engine_id}: score {score} outside 1..=5")]
    ScoreOutOfRange {
        sentence_id: String,
        engine_id: String,
        score: i64,
    },
    #[error("no sheets to rank")]
    NoSheets,
    #[error("sheets mix sentences {0:?} and {1:?}")]
    MixedSentences(String, String),
    #[error("sentence {sentence_id:?} has engine {engine_id:?} more than once")]
    DuplicateEngine { sentence_id: String, engine_id: String },
    #[error("category {0:?} has no engines")]
    EmptyCategory(String),
    #[error("sentence {sentence_id:?} contains none of the engines of category {category:?}")]
    CategoryUncovered { sentence_id: String, category: String },
    #[error("sentence sets differ; only in LM rankings: {lm_only:?}; only in human rankings: {human_only:?}")]
    SentenceMismatch {
        lm_only: Vec<String>,
        human_only: Vec<String>,
    },
    #[error("sentence {sentence_id:?}: engines only ranked by LM: {lm_only:?}; only judged by humans: {human_only:?}")]
    EngineMismatch {
        sentence_id: String,
        lm_only: Vec<String>,
        human_only: Vec<String>,
    },
    #[error("duplicate ranking for sentence {0:?}")]
    DuplicateSentence(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HumanScoreSheet {
    pub sentence_id: String,
    pub engine_id: String,
    pub scores: [u8; PARAMETER_COUNT],
}

impl HumanScoreSheet {
    pub fn new(
        sentence_id: impl Into<String>,
        engine_id: impl Into<String>,
        scores: &[i64],
    ) -> Result<Self, EvalError> {
        let sentence_id = sentence_id.into();
        let engine_id = engine_id.into();
        if scores.len() != PARAMETER_COUNT {
            return Err(EvalError::WrongScoreCount {
                sentence_id,
                engine_id,
                found: scores.len(),
            });
        }
        let mut fixed = [0u8; PARAMETER_COUNT];
        for (slot, &score) in fixed.iter_mut().zip(scores) {
            if !(MIN_SCORE as i64..=MAX_SCORE as i64).contains(&score) {
                return Err(EvalError::ScoreOutOfRange {
                    sentence_id,
                    engine_id,
                    score,
                });
            }
            *slot = score as u8;
        }
        Ok(HumanScoreSheet {
            sentence_id,
            engine_id,
            scores: fixed,
        })
    }

    pub fn total(&self) -> u32 {
        self.scores.iter().map(|&s| s as u32).sum()
    }

    pub fn average_score(&self) -> f64 {
        self.total() as f64 / PARAMETER_COUNT as f64
    }
}

pub fn average_score(sheet: &HumanScoreSheet) -> f64 {
    sheet.average_score()
}

/// Engines of one sentence, best first. Positions sharing a tie group compare equal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub sentence_id: String,
    pub engines: Vec<String>,
    tie_groups: Vec<usize>,
}

impl Ranking {
    /// A ranking without ties.
    pub fn strict(sentence_id: impl Into<String>, engines: Vec<String>) -> Self {
        let tie_groups = (0..engines.len()).collect();
        Ranking {
            sentence_id: sentence_id.into(),
            engines,
            tie_groups,
        }
    }

    /// Builds a ranking from an already ordered list, grouping adjacent equal keys as ties.
    pub fn from_ordered<K: PartialEq>(sentence_id: impl Into<String>, ordered: Vec<(String, K)>) -> Self {
        let mut engines = Vec::with_capacity(ordered.len());
        let mut tie_groups = Vec::with_capacity(ordered.len());
        let mut previous: Option<K> = None;
        let mut group = 0;
        for (i, (engine, key)) in ordered.into_iter().enumerate() {
            if i > 0 && previous.as_ref() != Some(&key) {
                group += 1;
            }
            engines.push(engine);
            tie_groups.push(group);
            previous = Some(key);
        }
        Ranking {
            sentence_id: sentence_id.into(),
            engines,
            tie_groups,
        }
    }

    pub fn from_ranked_list(list: &RankedList) -> Self {
        Ranking::from_ordered(
            list.sentence_id.clone(),
            list.entries
                .iter()
                .map(|e| (e.score.engine_id.clone(), e.score.prob_sum))
                .collect(),
        )
    }

    /// Groups ranked-output records by sentence, ordering each group by its rank column.
    pub fn from_records(records: &[ScoreRecord]) -> Result<Vec<Ranking>, EvalError> {
        let mut grouped: IndexMap<&str, Vec<&ScoreRecord>> = IndexMap::new();
        for r in records {
            grouped.entry(r.sentence_id.as_str()).or_default().push(r);
        }
        let mut rankings = Vec::with_capacity(grouped.len());
        for (sentence_id, mut group) in grouped {
            group.sort_by_key(|r| r.rank);
            let mut seen = HashSet::new();
            for r in &group {
                if !seen.insert(r.score.engine_id.as_str()) {
                    return Err(EvalError::DuplicateEngine {
                        sentence_id: sentence_id.to_string(),
                        engine_id: r.score.engine_id.clone(),
                    });
                }
            }
            rankings.push(Ranking::from_ordered(
                sentence_id,
                group
                    .iter()
                    .map(|r| (r.score.engine_id.clone(), r.score.prob_sum))
                    .collect(),
            ));
        }
        Ok(rankings)
    }

    pub fn len(&self) -> usize {
        self.engines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.engines.is_empty()
    }

    pub fn top(&self) -> Option<&str> {
        self.engines.first().map(String::as_str)
    }

    /// Keeps only `engines`, preserving relative order and ties.
    pub fn restrict(&self, engines: &[String]) -> Ranking {
        let keep: HashSet<&str> = engines.iter().map(String::as_str).collect();
        let (engines, tie_groups) = self
            .engines
            .iter()
            .zip(&self.tie_groups)
            .filter(|(e, _)| keep.contains(e.as_str()))
            .map(|(e, &g)| (e.clone(), g))
            .unzip();
        Ranking {
            sentence_id: self.sentence_id.clone(),
            engines,
            tie_groups,
        }
    }

    /// 1-based ranks with tied engines sharing the mean of their positions.
    pub fn fractional_ranks(&self) -> HashMap<&str, f64> {
        let mut ranks = HashMap::with_capacity(self.engines.len());
        let mut start = 0;
        while start < self.engines.len() {
            let mut end = start + 1;
            while end < self.engines.len() && self.tie_groups[end] == self.tie_groups[start] {
                end += 1;
            }
            // positions start+1 ..= end
            let mean = (start + 1 + end) as f64 / 2.0;
            for e in &self.engines[start..end] {
                ranks.insert(e.as_str(), mean);
            }
            start = end;
        }
        ranks
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanRankEntry {
    pub engine_id: String,
    pub average: f64,
    /// 1-based position.
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanRanking {
    pub sentence_id: String,
    pub entries: Vec<HumanRankEntry>,
    ranking: Ranking,
}

impl HumanRanking {
    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn into_ranking(self) -> Ranking {
        self.ranking
    }
}

/// Ranks the engines of one sentence by ascending mean score; ties keep input order.
pub fn human_rank(sheets: &[HumanScoreSheet]) -> Result<HumanRanking, EvalError> {
    let first = sheets.first().ok_or(EvalError::NoSheets)?;
    let mut seen = HashSet::new();
    for s in sheets {
        if s.sentence_id != first.sentence_id {
            return Err(EvalError::MixedSentences(first.sentence_id.clone(), s.sentence_id.clone()));
        }
        if !seen.insert(s.engine_id.as_str()) {
            return Err(EvalError::DuplicateEngine {
                sentence_id: s.sentence_id.clone(),
                engine_id: s.engine_id.clone(),
            });
        }
    }
    let mut order: Vec<&HumanScoreSheet> = sheets.iter().collect();
    // Totals are exact integers, so equal means compare equal.
    order.sort_by_key(|s| s.total());
    let entries = order
        .iter()
        .enumerate()
        .map(|(i, s)| HumanRankEntry {
            engine_id: s.engine_id.clone(),
            average: s.average_score(),
            rank: i + 1,
        })
        .collect();
    let ranking = Ranking::from_ordered(
        first.sentence_id.clone(),
        order.iter().map(|s| (s.engine_id.clone(), s.total())).collect(),
    );
    Ok(HumanRanking {
        sentence_id: first.sentence_id.clone(),
        entries,
        ranking,
    })
}

/// Groups sheets by sentence (first-seen order) and ranks each group.
pub fn human_rankings(sheets: &[HumanScoreSheet]) -> Result<Vec<HumanRanking>, EvalError> {
    let mut grouped: IndexMap<&str, Vec<HumanScoreSheet>> = IndexMap::new();
    for s in sheets {
        grouped.entry(s.sentence_id.as_str()).or_default().push(s.clone());
    }
    grouped.values().map(|g| human_rank(g)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorySpec {
    pub name: String,
    pub engine_ids: Vec<String>,
}

impl CategorySpec {
    pub fn new<S: Into<String>>(name: impl Into<String>, engine_ids: impl IntoIterator<Item = S>) -> Result<Self, EvalError> {
        let name = name.into();
        let mut ids: Vec<String> = Vec::new();
        for id in engine_ids {
            let id = id.into();
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        if ids.is_empty() {
            return Err(EvalError::EmptyCategory(name));
        }
        Ok(CategorySpec { name, engine_ids: ids })
    }
}

/// How often each engine of a category was ranked first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tally {
    pub category: String,
    /// In category order.
    pub counts: IndexMap<String, usize>,
    pub sentence_count: usize,
}

impl Tally {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

pub fn top_rank_tally(rankings: &[Ranking], category: &CategorySpec) -> Result<Tally, EvalError> {
    let mut counts: IndexMap<String, usize> = category.engine_ids.iter().map(|e| (e.clone(), 0)).collect();
    for ranking in rankings {
        let restricted = ranking.restrict(&category.engine_ids);
        let top = restricted.top().ok_or_else(|| EvalError::CategoryUncovered {
            sentence_id: ranking.sentence_id.clone(),
            category: category.name.clone(),
        })?;
        *counts.get_mut(top).expect("restricted to category") += 1;
    }
    Ok(Tally {
        category: category.name.clone(),
        counts,
        sentence_count: rankings.len(),
    })
}

/// Pearson correlation of two rank vectors; `None` when either side has no spread.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "rank vectors differ in length");
    let n = a.len();
    if n < 2 {
        return None;
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        return None;
    }
    Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho between two rankings of the same engines, ties by average rank.
pub fn ranking_correlation(lm: &Ranking, human: &Ranking) -> Option<f64> {
    let lm_ranks = lm.fractional_ranks();
    let human_ranks = human.fractional_ranks();
    let mut xs = Vec::with_capacity(lm.len());
    let mut ys = Vec::with_capacity(lm.len());
    for engine in &lm.engines {
        xs.push(lm_ranks[engine.as_str()]);
        ys.push(*human_ranks.get(engine.as_str())?);
    }
    spearman(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub category: String,
    pub lm_tally: Tally,
    pub human_tally: Tally,
    pub sentence_count: usize,
    /// Fraction of sentences whose first-ranked engine is the same on both sides.
    pub top1_agreement: f64,
    /// Mean per-sentence Spearman rho over sentences where it is defined.
    pub mean_spearman: Option<f64>,
    pub spearman_sentences: usize,
}

/// Pairs rankings by sentence id after checking both sides cover the same sentences and engines.
fn pair_rankings<'a>(
    lm: &'a [Ranking],
    human: &'a [Ranking],
) -> Result<Vec<(&'a Ranking, &'a Ranking)>, EvalError> {
    let index = |side: &'a [Ranking]| -> Result<HashMap<&'a str, &'a Ranking>, EvalError> {
        let mut map = HashMap::with_capacity(side.len());
        for r in side {
            if map.insert(r.sentence_id.as_str(), r).is_some() {
                return Err(EvalError::DuplicateSentence(r.sentence_id.clone()));
            }
        }
        Ok(map)
    };
    let lm_map = index(lm)?;
    let human_map = index(human)?;
    let sorted_diff = |a: &HashMap<&str, &Ranking>, b: &HashMap<&str, &Ranking>| {
        let mut v: Vec<String> = a.keys().filter(|k| !b.contains_key(*k)).map(|k| k.to_string()).collect();
        v.sort_by(|x, y| compare_sentence_ids(x, y));
        v
    };
    let lm_only = sorted_diff(&lm_map, &human_map);
    let human_only = sorted_diff(&human_map, &lm_map);
    if !lm_only.is_empty() || !human_only.is_empty() {
        return Err(EvalError::SentenceMismatch { lm_only, human_only });
    }

    let mut ids: Vec<&str> = lm_map.keys().copied().collect();
    ids.sort_by(|a, b| compare_sentence_ids(a, b));
    let mut pairs = Vec::with_capacity(ids.len());
    for id in ids {
        let (l, h) = (lm_map[id], human_map[id]);
        let l_set: BTreeSet<&str> = l.engines.iter().map(String::as_str).collect();
        let h_set: BTreeSet<&str> = h.engines.iter().map(String::as_str).collect();
        if l_set != h_set {
            return Err(EvalError::EngineMismatch {
                sentence_id: id.to_string(),
                lm_only: l_set.difference(&h_set).map(|s| s.to_string()).collect(),
                human_only: h_set.difference(&l_set).map(|s| s.to_string()).collect(),
            });
        }
        pairs.push((l, h));
    }
    Ok(pairs)
}

pub fn agreement(
    lm: &[Ranking],
    human: &[Ranking],
    categories: &[CategorySpec],
) -> Result<Vec<AgreementReport>, EvalError> {
    let pairs = pair_rankings(lm, human)?;
    let (lm_sorted, human_sorted): (Vec<Ranking>, Vec<Ranking>) =
        pairs.iter().map(|(l, h)| ((*l).clone(), (*h).clone())).unzip();
    categories
        .iter()
        .map(|category| {
            let lm_tally = top_rank_tally(&lm_sorted, category)?;
            let human_tally = top_rank_tally(&human_sorted, category)?;
            let mut agree = 0;
            let mut rho_sum = 0.0;
            let mut rho_n = 0;
            for (l, h) in &pairs {
                let l = l.restrict(&category.engine_ids);
                let h = h.restrict(&category.engine_ids);
                if l.top() == h.top() {
                    agree += 1;
                }
                if let Some(rho) = ranking_correlation(&l, &h) {
                    rho_sum += rho;
                    rho_n += 1;
                }
            }
            let n = pairs.len();
            Ok(AgreementReport {
                category: category.name.clone(),
                lm_tally,
                human_tally,
                sentence_count: n,
                top1_agreement: if n == 0 { 0.0 } else { agree as f64 / n as f64 },
                mean_spearman: (rho_n > 0).then(|| rho_sum / rho_n as f64),
                spearman_sentences: rho_n,
            })
        })
        .collect()
}

/// Plain-text tables (engine, LM top-rank count, human top-rank count) plus an agreement block.
pub fn render_report(reports: &[AgreementReport]) -> String {
    let mut out = String::new();
    for (i, r) in reports.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "== category: {} ==", r.category);
        let _ = writeln!(out, "Engine\tLM Ranking\tHuman Ranking");
        for (engine, lm_count) in &r.lm_tally.counts {
            let human_count = r.human_tally.counts.get(engine).copied().unwrap_or(0);
            let _ = writeln!(out, "{engine}\t{lm_count}\t{human_count}");
        }
        let _ = writeln!(out, "Total\t{}\t{}", r.lm_tally.total(), r.human_tally.total());
        let _ = writeln!(out, "-- agreement (added statistics, not part of the tally tables) --");
        let _ = writeln!(out, "sentences\t{}", r.sentence_count);
        let _ = writeln!(out, "top1_agreement\t{:.6}", r.top1_agreement);
        match r.mean_spearman {
            Some(rho) => {
                let _ = writeln!(out, "mean_spearman_rho\t{rho:.6}\t(over {} sentences)", r.spearman_sentences);
            }
            None => {
                let _ = writeln!(out, "mean_spearman_rho\tundefined\t(no sentence with two or more distinct ranks)");
            }
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum HumanFileError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Reads `sentence_id<TAB>engine_id<TAB>s1..s10` lines; `#` lines are comments.
pub fn read_human_scores<R: BufRead>(reader: R) -> Result<Vec<HumanScoreSheet>, HumanFileError> {
    let mut sheets = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let perr = |message: String| HumanFileError::Parse { line: line_no, message };
        let line = line.map_err(|e| {
            if e.kind() == io::ErrorKind::InvalidData {
                perr("invalid UTF-8".into())
            } else {
                HumanFileError::Io(e)
            }
        })?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 + PARAMETER_COUNT {
            return Err(perr(format!("expected {} columns, found {}", 2 + PARAMETER_COUNT, fields.len())));
        }
        let scores = fields[2..]
            .iter()
            .map(|f| f.trim().parse::<i64>().map_err(|_| perr(format!("invalid score {f:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        let sheet = HumanScoreSheet::new(fields[0], fields[1], &scores).map_err(|e| perr(e.to_string()))?;
        sheets.push(sheet);
    }
    Ok(sheets)
}
