use std::path::PathBuf;
use std::process::{Command, Output};

use folqa::corpus::load_report;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn folqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_folqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn ex1() -> String {
    fixture("example1_premises.fol").display().to_string()
}

fn ex2() -> String {
    fixture("example2_premises.fol").display().to_string()
}

#[test]
fn validate_exit_codes() {
    let ok = folqa(&["validate", "∀x (p(x) → q(x))"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("SWF 1.0000"));

    let bad = folqa(&["validate", "Height(x) > Weight(x)"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL  comparison_symbols"));

    let empty = folqa(&["validate", ""]);
    assert_eq!(empty.status.code(), Some(1));
    assert!(stdout(&empty).matches("FAIL").count() > 1);
}

#[test]
fn parse_prints_canonical_form() {
    let o = folqa(&["parse", "forall x (P(x) -> Q(x))"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("∀x (P(x) → Q(x))"));
    assert_eq!(folqa(&["parse", "P(x"]).status.code(), Some(1));
}

#[test]
fn course_queries_closed_world() {
    let q1 = folqa(&["--closed-world", "entail", &ex1(), "completed(Alice, cs101)"]);
    assert_eq!(q1.status.code(), Some(1));
    assert!(stdout(&q1).contains("Final Answer: False"));

    let q2 = folqa(&["--closed-world", "enumerate", &ex1(), "eligible_ta(x)"]);
    assert_eq!(q2.status.code(), Some(0));
    assert_eq!(stdout(&q2), "Charlie\n");

    let q3 = folqa(&["--closed-world", "entail", &ex1(), "completed(Bob, cs101)"]);
    assert_eq!(q3.status.code(), Some(0));
    assert!(stdout(&q3).contains("Final Answer: True"));
}

#[test]
fn certificate_candidate_is_not_entailed() {
    let o = folqa(&["entail", &ex2(), "student(x) ∧ ¬has_cert(x, excel) → do_thesis(x)"]);
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("Counterexample"), "{text}");
    assert!(text.ends_with("Final Answer: False\n"), "{text}");
}

#[test]
fn tautology_on_empty_premises() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.fol");
    std::fs::write(&empty, "").unwrap();
    let o = folqa(&["entail", empty.to_str().unwrap(), "p(a) ∨ ¬p(a)"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn compile_error_exit_code() {
    let o = folqa(&["entail", &ex1(), "completed(Alice"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("Final Answer: Error"));
}

#[test]
fn inconsistent_premises_are_an_engine_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.fol");
    std::fs::write(&f, "p(a)\n¬p(a)\n").unwrap();
    assert_eq!(folqa(&["entail", f.to_str().unwrap(), "q(a)"]).status.code(), Some(4));
}

#[test]
fn missing_premises_file_fails() {
    let o = folqa(&["entail", "/nonexistent/premises.fol", "p(a)"]);
    assert!(!o.status.success());
}

#[test]
fn export_smt_layout() {
    let o = folqa(&["export-smt", &ex2(), "do_thesis(x)"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("(declare-sort Entity 0)\n"));
    assert!(text.ends_with("(assert (not (forall ((?x Entity)) (do_thesis ?x))))\n(check-sat)\n"));
}

#[test]
fn eval_fixture_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let corpus = fixture("worked_examples.jsonl");
    let o = folqa(&[
        "--closed-world",
        "eval",
        corpus.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("100.00%"));
    let r = load_report(&report).unwrap();
    let a = r.aggregates.unwrap();
    assert_eq!(a.records, 6);
    assert_eq!(a.accuracy, 1.0);
    assert!(r.config.closed_world);
    assert_eq!(r.config.seed, 42);
}

#[test]
fn eval_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("worked_examples.jsonl");
    let mut bytes = Vec::new();
    for (i, jobs) in ["1", "4"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let o = folqa(&[
            "eval",
            corpus.to_str().unwrap(),
            "--jobs",
            jobs,
            "--report",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        bytes.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn eval_missing_corpus_fails() {
    assert!(!folqa(&["eval", "/nonexistent/corpus.jsonl"]).status.success());
}

#[test]
fn split_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("worked_examples.jsonl");
    let run = |seed: &str, tag: &str| {
        let train = dir.path().join(format!("train{tag}.jsonl"));
        let test = dir.path().join(format!("test{tag}.jsonl"));
        let o = folqa(&[
            "--seed",
            seed,
            "split",
            corpus.to_str().unwrap(),
            train.to_str().unwrap(),
            test.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        (std::fs::read_to_string(train).unwrap(), std::fs::read_to_string(test).unwrap())
    };
    let a = run("7", "a");
    let b = run("7", "b");
    assert_eq!(a, b);
    assert_eq!(a.0.lines().count(), 5);
    assert_eq!(a.1.lines().count(), 1);
}

#[test]
fn lambda_out_of_range_is_rejected() {
    assert!(!folqa(&["--lambda1", "1.5", "validate", "p(a)"]).status.success());
}

#[test]
fn help_lists_every_flag_and_command() {
    let help = stdout(&folqa(&["--help"]));
    for flag in [
        "--closed-world",
        "--lambda1",
        "--seed",
        "--domain-budget",
        "--format",
        "--report",
        "--jobs",
    ] {
        assert!(help.contains(flag), "missing {flag}:\n{help}");
    }
    for cmd in ["validate", "parse", "entail", "enumerate", "eval", "export-smt", "split"] {
        assert!(help.contains(cmd), "missing {cmd}:\n{help}");
    }
    assert!(help.contains("jsonl"));
}
