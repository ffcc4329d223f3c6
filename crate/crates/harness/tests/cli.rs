use std::fs;
use std::path::{Path, PathBuf};

use pddl_fixtures as fx;
use pddl_harness::cli::run;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn pddl(args: &[&str]) -> Out {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("pddl").chain(args.iter().copied()), &mut out, &mut err);
    Out {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn fixture_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let files = [
        ("bw.pddl", fx::BLOCKSWORLD_DOMAIN),
        ("bw-printed.pddl", fx::BLOCKSWORLD_AS_PRINTED_DOMAIN),
        ("bw12.pddl", fx::BW_RAND_12_PROBLEM),
        ("bw12.plan", fx::BW_RAND_12_PLAN),
        ("termes-bon.pddl", fx::TERMES_BON_REMOVE_BLOCK_DOMAIN),
        ("broken.pddl", "(define (domain x) (:predicates (p)"),
    ];
    for (name, text) in files {
        fs::write(dir.path().join(name), text).unwrap();
    }
    dir
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

fn demo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../demo")
}

#[test]
fn validate_clean_domain() {
    let d = fixture_dir();
    let o = pddl(&["validate", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl")]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("bw.pddl: 0 errors"));
    assert!(o.stdout.contains("bw12.pddl: 0 errors"));
}

#[test]
fn validate_faulty_domain_fails() {
    let d = fixture_dir();
    let o = pddl(&["validate", &p(d.path(), "termes-bon.pddl")]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.contains("UNBOUND_VARIABLE"));
    let o = pddl(&["validate", &p(d.path(), "broken.pddl")]);
    assert_eq!(o.code, 1);
}

#[test]
fn validate_plan_reference() {
    let d = fixture_dir();
    let o = pddl(&["validate-plan", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl"), &p(d.path(), "bw12.plan")]);
    assert_eq!(o.code, 0);
    assert_eq!(o.stdout.trim(), "Valid, cost = 24");
    let o = pddl(&[
        "validate-plan",
        &p(d.path(), "bw-printed.pddl"),
        &p(d.path(), "bw12.pddl"),
        &p(d.path(), "bw12.plan"),
    ]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.starts_with("Invalid at step 2"));
}

#[test]
fn plan_with_expansion_limit() {
    let d = fixture_dir();
    let o = pddl(&["plan", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl"), "--max-expansions", "1"]);
    assert_eq!(o.code, 1);
    assert!(o.stderr.starts_with("LimitHit"));
}

#[test]
fn plan_output_round_trips_through_validate_plan() {
    let d = fixture_dir();
    let o = pddl(&["plan", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl"), "--alg", "gbfs", "--heur", "hadd"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    fs::write(d.path().join("found.plan"), &o.stdout).unwrap();
    let v = pddl(&["validate-plan", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl"), &p(d.path(), "found.plan")]);
    assert_eq!(v.code, 0);
    assert!(v.stdout.starts_with("Valid, cost = "));
}

#[test]
fn parse_and_ground() {
    let d = fixture_dir();
    let o = pddl(&["parse", &p(d.path(), "bw.pddl")]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.starts_with("(define (domain blocksworld)"));
    assert_eq!(pddl(&["parse", &p(d.path(), "broken.pddl")]).code, 1);
    let o = pddl(&["ground", &p(d.path(), "bw.pddl"), &p(d.path(), "bw12.pddl"), "--stats"]);
    assert_eq!(o.code, 0);
    assert!(o.stdout.contains("objects 12\n"));
    assert!(!o.stdout.contains("(pickup"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(pddl(&[]).code, 2);
    assert_eq!(pddl(&["frobnicate"]).code, 2);
    assert_eq!(pddl(&["plan", "a.pddl", "b.pddl", "--alg", "dfs"]).code, 2);
    assert_eq!(pddl(&["validate", "/nonexistent/d.pddl"]).code, 2);
    assert_eq!(pddl(&["--help"]).code, 0);
}

#[test]
fn config_errors_exit_2() {
    let d = fixture_dir();
    fs::write(d.path().join("input.txt"), "anything").unwrap();
    fs::write(d.path().join("bad.json"), r#"{"foo": 1}"#).unwrap();
    let input = p(d.path(), "input.txt");
    let out_dir = p(d.path(), "o");
    let synth = |extra: &[&str]| {
        let mut args = vec!["synthesize", "--task", "nl2domain", "--input", &input, "--out-dir", &out_dir];
        args.extend_from_slice(extra);
        pddl(&args)
    };
    let o = synth(&["--config", &p(d.path(), "bad.json")]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("UNKNOWN_KEY"));
    let o = synth(&["--config", "/nonexistent.json"]);
    assert_eq!(o.code, 2);
    // The http backend needs an endpoint.
    let o = synth(&["--backend", "http"]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("base_url"));
}

#[test]
fn synthesize_with_mock_backend() {
    let out = tempfile::tempdir().unwrap();
    let demo = demo();
    let o = pddl(&[
        "synthesize",
        "--task",
        "nl2domain",
        "--input",
        &p(&demo, "corpus/termes/input.txt"),
        "--backend",
        "mock",
        "--mock-script",
        &p(&demo, "mock.json"),
        "--n",
        "2",
        "--k",
        "1",
        "--epochs",
        "3",
        "--out-dir",
        &p(out.path(), "termes"),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let dir = out.path().join("termes");
    assert_eq!(fs::read_to_string(dir.join("final.domain.pddl")).unwrap(), fx::TERMES_DOMAIN.trim());
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["usage"]["requests"], 4);
    assert_eq!(report["passed"], true);
    assert!(dir.join("run.json").is_file());
    assert!(dir.join("chains/0/epoch_1.feedback.txt").is_file());
}

#[test]
fn synthesis_that_never_validates_exits_1() {
    let out = tempfile::tempdir().unwrap();
    let demo = demo();
    let o = pddl(&[
        "synthesize",
        "--task",
        "nl2problem",
        "--input",
        &p(&demo, "corpus/stack-problem/input.txt"),
        "--domain",
        &p(&demo, "corpus/stack-problem/domain.pddl"),
        "--backend",
        "mock",
        "--mock-script",
        &p(&demo, "mock.json"),
        "--epochs",
        "1",
        "--out-dir",
        &p(out.path(), "x"),
    ]);
    assert_eq!(o.code, 1);
    assert!(out.path().join("x/final.problem.pddl").is_file());
}

#[test]
fn bench_and_report() {
    let out = tempfile::tempdir().unwrap();
    let demo = demo();
    let o = pddl(&[
        "bench",
        "--corpus",
        &p(&demo, "corpus"),
        "--config",
        &p(&demo, "config.json"),
        "--out-dir",
        &p(out.path(), "runs"),
    ]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    assert!(o.stdout.contains("val_pass_rate         75.0% (3/4)"));
    let run_dir = o.stdout.lines().last().unwrap().trim_start_matches("run directory ").to_string();
    let r = pddl(&["report", "--run-dir", &run_dir]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("val_pass_rate         75.0% (3/4)"));
    assert!(Path::new(&run_dir).join("tasks/termes/final.domain.pddl").is_file());
    assert!(Path::new(&run_dir).join("report.txt").is_file());
}

#[test]
fn empty_corpus_is_a_usage_error() {
    let empty = tempfile::tempdir().unwrap();
    let demo = demo();
    let o = pddl(&["bench", "--corpus", &p(empty.path(), ""), "--config", &p(&demo, "config.json"), "--out-dir", &p(empty.path(), "runs")]);
    assert_eq!(o.code, 2);
    assert!(o.stderr.contains("CORPUS_EMPTY"));
}
