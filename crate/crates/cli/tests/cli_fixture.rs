//! End-to-end runs of the `mtrank` binary over the tourism fixture.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mtrank_core::ranker::read_score_records;
use mtrank_oracle::{oracle_counts, oracle_rank, oracle_tokenize, OracleScenario};

const BIN: &str = env!("CARGO_BIN_EXE_mtrank");

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/tourism")
}

fn mtrank(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Copies the fixture to a scratch directory and builds both models there.
fn prepared() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(fixture_dir()).unwrap() {
        let entry = entry.unwrap();
        fs::copy(entry.path(), dir.path().join(entry.file_name())).unwrap();
    }
    for (lang, corpus) in [("en", "en.txt"), ("hi", "hi.txt")] {
        ok(mtrank(&[
            "build-lm",
            "--corpus",
            p(&dir.path().join(corpus)),
            "--language",
            lang,
            "--out",
            p(&dir.path().join(format!("{lang}.lm"))),
        ]));
    }
    dir
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

fn tsv(path: &Path) -> Vec<Vec<String>> {
    lines(path).iter().map(|l| l.split('\t').map(str::to_string).collect()).collect()
}

/// Oracle ranking of the whole fixture as `sentence rank engine u b t matched exact decimal` rows.
fn oracle_rows() -> Vec<String> {
    let dir = fixture_dir();
    let en = lines(&dir.join("en.txt"));
    let hi = lines(&dir.join("hi.txt"));
    let lexicon: Vec<(String, String)> = lines(&dir.join("lexicon.tsv"))
        .iter()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f[0].to_string(), f[1].to_string())
        })
        .collect();
    let candidates = tsv(&dir.join("candidates.tsv"));
    let mut rows = Vec::new();
    for source in tsv(&dir.join("sources.tsv")) {
        let cands: Vec<(String, String)> = candidates
            .iter()
            .filter(|c| c[0] == source[0])
            .map(|c| (c[1].clone(), c[2].clone()))
            .collect();
        let ranked = oracle_rank(&OracleScenario {
            source_text: &source[1],
            candidates: &cands,
            source_corpus: &en,
            target_corpus: &hi,
            lexicon: &lexicon,
            min_covered: 1,
        });
        for (rank, s) in ranked {
            rows.push(format!(
                "{}\t{rank}\t{}\t{}\t{}\t{}\t{}\t{}\t{:.12}",
                source[0],
                s.engine_id,
                s.unigrams,
                s.bigrams,
                s.trigrams,
                s.matched,
                s.prob_sum,
                s.prob_sum_f64()
            ));
        }
    }
    rows
}

#[test]
fn fixture_of_record_matches_oracle_and_cli() {
    let expected_path = fixture_dir().join("expected_ranked.tsv");
    let rows = oracle_rows();
    if std::env::var_os("MTRANK_BLESS").is_some() {
        let mut text = String::from("# sentence_id\trank\tengine_id\tunigrams\tbigrams\ttrigrams\tmatched\tprob_sum_exact\tprob_sum\n");
        for r in &rows {
            text.push_str(r);
            text.push('\n');
        }
        fs::write(&expected_path, text).unwrap();
    }
    let committed: Vec<String> = lines(&expected_path).into_iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows, committed, "oracle no longer reproduces the committed ranking");

    let dir = prepared();
    let out = dir.path().join("ranked.jsonl");
    ok(mtrank(&["--config", p(&dir.path().join("rank.conf")), "rank", "--out", p(&out)]));
    let records = read_score_records(fs::read(&out).unwrap().as_slice()).unwrap();
    assert_eq!(records.len(), committed.len());
    for (record, row) in records.iter().zip(&committed) {
        let f: Vec<&str> = row.split('\t').collect();
        assert_eq!(record.sentence_id, f[0]);
        assert_eq!(record.rank.to_string(), f[1]);
        assert_eq!(record.score.engine_id, f[2]);
        assert_eq!(record.score.unigram_count.to_string(), f[3]);
        assert_eq!(record.score.bigram_count.to_string(), f[4]);
        assert_eq!(record.score.trigram_count.to_string(), f[5]);
        assert_eq!(record.score.matched_trigram_count.to_string(), f[6]);
        assert!((record.score.prob_sum - f[8].parse::<f64>().unwrap()).abs() < 1e-9);
    }
}

#[test]
fn evaluate_tallies_match_hand_count() {
    let dir = prepared();
    let ranked = dir.path().join("ranked.jsonl");
    let report = dir.path().join("report.txt");
    let conf = dir.path().join("rank.conf");
    ok(mtrank(&["--config", p(&conf), "rank", "--out", p(&ranked)]));
    let stdout = ok(mtrank(&[
        "--config",
        p(&conf),
        "evaluate",
        "--ranked",
        p(&ranked),
        "--human-scores",
        p(&dir.path().join("human.tsv")),
        "--out",
        p(&report),
    ]));
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("# mtrank "));
    assert!(text.ends_with(&stdout));

    // Human totals per sentence (lower is better):
    //   1: E2 10, E1 12, E6 22, E3 28, E4 31, E5 40
    //   2: E1 10, E2 11, E6 19, E3 20, E4 21, E5 48
    //   3: E6 10, E1 11, E2 20, E5 25, E3 30, E4 39
    // LM winners (see expected_ranked.tsv): E1 on all three sentences.
    // Restricted to the toolkit engines: E5 on sentence 1, E6 on 2 and 3.
    let expected = "\
== category: combined ==
Engine\tLM Ranking\tHuman Ranking
E1\t3\t1
E2\t0\t1
E3\t0\t0
E4\t0\t0
E5\t0\t0
E6\t0\t1
Total\t3\t3
";
    assert!(stdout.starts_with(expected), "{stdout}");
    assert!(stdout.contains(
        "== category: web ==
Engine\tLM Ranking\tHuman Ranking
E1\t3\t2
E2\t0\t1
E3\t0\t0
Total\t3\t3
"
    ));
    assert!(stdout.contains(
        "== category: toolkit ==
Engine\tLM Ranking\tHuman Ranking
E4\t0\t0
E5\t1\t0
E6\t2\t3
Total\t3\t3
"
    ));
    // Combined: LM top E1 each time, human tops E2, E1, E6 -> 1 of 3.
    assert!(stdout.contains("top1_agreement\t0.333333\n"));
}

#[test]
fn lm_ranks_fed_back_as_human_scores_agree() {
    let dir = prepared();
    let ranked = dir.path().join("ranked.jsonl");
    ok(mtrank(&["--config", p(&dir.path().join("rank.conf")), "rank", "--out", p(&ranked)]));
    // Rank r gets r - 1 parameters scored 2 and the rest 1, so human order equals LM order.
    let records = read_score_records(fs::read(&ranked).unwrap().as_slice()).unwrap();
    let mut human = String::new();
    for r in &records {
        let scores: Vec<String> = (0..10).map(|i| if i < r.rank - 1 { "2" } else { "1" }.to_string()).collect();
        human.push_str(&format!("{}\t{}\t{}\n", r.sentence_id, r.score.engine_id, scores.join("\t")));
    }
    let human_path = dir.path().join("mirror.tsv");
    fs::write(&human_path, human).unwrap();
    let stdout = ok(mtrank(&[
        "evaluate",
        "--ranked",
        p(&ranked),
        "--human-scores",
        p(&human_path),
        "--out",
        p(&dir.path().join("r.txt")),
    ]));
    assert!(stdout.starts_with("== category: combined =="));
    assert!(stdout.contains("top1_agreement\t1.000000\n"));
}

#[test]
fn build_lm_line_count_equals_distinct_ngrams() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let text = "the park is old.\nthe park is big\nold park, big park\n";
    fs::write(&corpus, text).unwrap();
    let model = dir.path().join("c.lm");
    let stdout = ok(mtrank(&["build-lm", "--corpus", p(&corpus), "--language", "en", "--out", p(&model)]));

    let oracle = oracle_counts(&text.lines().map(oracle_tokenize).collect::<Vec<_>>());
    let distinct: usize = oracle.iter().map(|m| m.len()).sum();
    let data_lines = lines(&model)
        .iter()
        .filter(|l| !l.starts_with('#') && !l.starts_with('\\'))
        .count();
    assert_eq!(data_lines, distinct);
    assert!(stdout.contains(&format!("en\t3\t{}\t{}\t{}\t", oracle[0].len(), oracle[1].len(), oracle[2].len())));

    let again = dir.path().join("again.lm");
    ok(mtrank(&["build-lm", "--corpus", p(&corpus), "--language", "en", "--out", p(&again)]));
    assert_eq!(fs::read(&model).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn empty_corpus_writes_header_and_warns() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty.txt");
    fs::write(&corpus, "").unwrap();
    let model = dir.path().join("empty.lm");
    let out = mtrank(&["build-lm", "--corpus", p(&corpus), "--language", "hi", "--out", p(&model)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let body: Vec<String> = lines(&model).into_iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(
        body,
        [
            "\\model\tlanguage=hi\tmax_order=3\tsentences=0\ttotal_tokens=0\tvocab_size=0\tdenominator=tokens",
            "\\1-grams\t0",
            "\\2-grams\t0",
            "\\3-grams\t0"
        ]
    );
}

#[test]
fn stats_and_lexicon_check() {
    let dir = prepared();
    let from_model = ok(mtrank(&["stats", "--model", p(&dir.path().join("en.lm"))]));
    let from_corpus = ok(mtrank(&["stats", "--corpus", p(&dir.path().join("en.txt")), "--language", "en"]));
    assert_eq!(from_model, from_corpus);
    assert!(from_model.starts_with("language\tsentences\tunigram_types"));

    let check = ok(mtrank(&[
        "lexicon-check",
        "--lexicon",
        p(&dir.path().join("lexicon.tsv")),
        "--corpus",
        p(&dir.path().join("en.txt")),
    ]));
    assert!(check.contains("source_words\t22\npairs\t23\n"), "{check}");
    assert!(check.contains("type_coverage\t"));
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn exit_code_classes() {
    let dir = prepared();
    let d = dir.path();

    // usage / configuration
    assert_eq!(code(&mtrank(&["build-lm", "--bogus"])), 2);
    assert_eq!(code(&mtrank(&["build-lm", "--corpus", p(&d.join("en.txt")), "--out", p(&d.join("x.lm"))])), 2);
    assert_eq!(code(&mtrank(&["build-lm", "--corpus", p(&d.join("missing.txt")), "--language", "en", "--out", "x"])), 2);

    // input parse
    let bad = d.join("bad.txt");
    fs::write(&bad, b"fine\n\xff\xfe\n").unwrap();
    let out = mtrank(&["build-lm", "--corpus", p(&bad), "--language", "en", "--out", p(&d.join("bad.lm"))]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let bad_lex = d.join("bad_lexicon.tsv");
    fs::write(&bad_lex, "park\n").unwrap();
    assert_eq!(code(&mtrank(&["lexicon-check", "--lexicon", p(&bad_lex)])), 3);

    // data consistency: candidate sentence absent from sources
    let cands = d.join("extra.tsv");
    fs::write(&cands, format!("{}99\tE1\tकुछ\n", fs::read_to_string(d.join("candidates.tsv")).unwrap())).unwrap();
    let out = mtrank(&["--config", p(&d.join("rank.conf")), "rank", "--candidates", p(&cands), "--out", p(&d.join("o.jsonl"))]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("99"));

    // data consistency: swapped models contradict configured languages
    let out = mtrank(&[
        "--config",
        p(&d.join("rank.conf")),
        "rank",
        "--source-lm",
        p(&d.join("hi.lm")),
        "--target-lm",
        p(&d.join("en.lm")),
        "--out",
        p(&d.join("o.jsonl")),
    ]);
    assert_eq!(code(&out), 4);

    // data consistency: human scores missing for a pair
    let ranked = d.join("ranked.jsonl");
    ok(mtrank(&["--config", p(&d.join("rank.conf")), "rank", "--out", p(&ranked)]));
    let partial = d.join("partial.tsv");
    let kept: Vec<String> = lines(&d.join("human.tsv")).into_iter().filter(|l| !l.starts_with("3\tE5")).collect();
    fs::write(&partial, kept.join("\n")).unwrap();
    let out = mtrank(&["evaluate", "--ranked", p(&ranked), "--human-scores", p(&partial), "--out", p(&d.join("r.txt"))]);
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("3/E5"));
}

#[test]
fn rank_is_deterministic_and_mode_invariant() {
    let dir = prepared();
    let d = dir.path();
    let conf = p(&d.join("rank.conf")).to_string();
    let a = d.join("a.jsonl");
    let b = d.join("b.jsonl");
    let v = d.join("v.jsonl");
    ok(mtrank(&["--config", &conf, "rank", "--out", p(&a)]));
    ok(mtrank(&["--config", &conf, "rank", "--out", p(&b)]));
    ok(mtrank(&["--config", &conf, "rank", "--unigram-denominator", "vocab", "--out", p(&v)]));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let body = |path: &Path| lines(path).into_iter().filter(|l| !l.starts_with('#')).collect::<Vec<_>>();
    assert_eq!(body(&a), body(&v));
}
