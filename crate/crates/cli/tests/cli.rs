use std::path::PathBuf;
use std::process::{Command, Output, Stdio};
use std::io::Write;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_choquet")).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_choquet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn out(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn err(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const PIPELINE: &str = "stationarize(tracify(stabilize(builtin:witness,64)))";

#[test]
fn analyze_chain_verifies_open_finite() {
    let o = run(&["analyze", &fixture("chain3.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    assert!(out(&o).contains("open-finite: verified-exhaustive [declared]; superset counts (3,2,1)"));
}

#[test]
fn analyze_rationals_refutes_open_finite() {
    let o = run(&["analyze", "--prefix", "100", &fixture("rationals.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(out(&o).contains("open-finite: refuted"));
}

#[test]
fn malformed_file_reports_its_line() {
    let o = run(&["analyze", &fixture("malformed.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("line 5, column 3"), "{}", err(&o));
}

#[test]
fn refuted_declared_flag_is_rejected() {
    let o = run(&["analyze", &fixture("rationals_bad_flag.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("declared flag `open-finite` is refuted"));
}

#[test]
fn non_basis_is_rejected() {
    let o = run(&["analyze", &fixture("not_a_basis.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("no basic around point b"));
}

#[test]
fn missing_file_is_a_usage_error() {
    let o = run(&["analyze", &fixture("nope.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("cannot read"));
}

#[test]
fn unknown_subcommand_and_flag_are_usage_errors() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "--bogus", &fixture("chain3.json")]).status.code(), Some(2));
    assert_eq!(run(&["build-basis", "sideways", &fixture("chain3.json")]).status.code(), Some(2));
}

#[test]
fn solve_chain_predicates() {
    let chain = fixture("chain3.json");
    for (pred, winner) in [("limit={0}", "Empty"), ("limit={0,1}", "Empty"), ("limit∋0", "Nonempty"), ("true", "Nonempty")] {
        let o = run(&["solve", &chain, "--predicate", pred]);
        assert_eq!(o.status.code(), Some(0), "{pred}: {}", err(&o));
        assert!(out(&o).contains(&format!("winner: {winner}")), "{pred}: {}", out(&o));
        assert!(out(&o).contains("certified: yes"));
    }
}

#[test]
fn solve_error_paths() {
    let o = run(&["solve", &fixture("reals.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("capability error"));
    let o = run(&["solve", &fixture("chain3.json"), "--predicate", "limit=={0}"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["solve", &fixture("chain3.json"), "--predicate", "limit={7}"]);
    assert!(err(&o).contains("unknown point `7`"));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
}

#[test]
fn singleton_sweep_is_fully_certified() {
    let o = run(&["solve", "--all-3pt", "--singleton-predicates"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out(&o).contains("certified: 100.0%"));
    let o = run(&["sweep", "--all-3pt", "--four-point", "3", "--predicates", "random", "--pipeline", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out(&o).starts_with("sweep | seed 9 | predicates random | pipeline yes"));
}

#[test]
fn transform_pipeline_on_chain_is_certified() {
    let o = run(&["transform", PIPELINE, &fixture("chain3.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    assert!(out(&o).contains("form: stationary"));
    assert!(out(&o).contains("certification: verify_winning against true: passed"));
}

#[test]
fn transform_lift_builds_on_the_reals() {
    let o = run(&["transform", "lift(builtin:half-ball2d, map:proj2)", &fixture("reals.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    assert!(out(&o).contains("8/8 seeded"));
}

#[test]
fn transform_error_paths() {
    let rat = fixture("rationals.json");
    let o = run(&["transform", "stationarize(tracify(stabilize(builtin:half-ball,64)))", &rat]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("open-finite"));
    let o = run(&["transform", "builtin:nonsense", &rat]);
    assert!(err(&o).contains("unknown built-in"));
    let o = run(&["transform", "tracify(builtin:copycat", &rat]);
    assert!(err(&o).contains("column"));
    let o = run(&["transform", "stationarize(builtin:copycat)", &rat]);
    assert!(err(&o).contains("expects a trace strategy"));
    let o = run(&["transform", "builtin:witness", &fixture("chain3.json"), "--predicate", "limit={0}"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("Empty wins"));
    let o = run(&["transform", "builtin:copycat", &fixture("chain3.json"), "--predicate", "limit={0}"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn build_basis_variants() {
    let o = run(&["build-basis", "open-finite", "--prefix", "40", &fixture("rationals.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    assert!(out(&o).contains("bounds: all hold"));
    let o = run(&["build-basis", "open-finite", &fixture("chain3.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(err(&o).contains("not T1"));
    let o = run(&["build-basis", "uniform", "--depth", "4", &fixture("reals.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    let o = run(&["build-basis", "uniform", &fixture("discrete2.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    assert!(out(&o).contains("union is a basis: yes"));
    let o = run(&["build-basis", "uniform", "instance:cantor"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn play_rejects_illegal_moves_and_writes_the_transcript() {
    let dir = std::env::temp_dir().join(format!("choquet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let t = dir.join("t.txt");
    let o = run_stdin(
        &["play", &fixture("chain3.json"), "--strategy", "builtin:copycat", "--transcript", t.to_str().unwrap()],
        "1; {0,1}\n2; {0,1,2}\n9; {0}\n0; {0}\nquit\n",
    );
    assert_eq!(o.status.code(), Some(0), "{}", err(&o));
    let s = out(&o);
    assert!(s.contains("rejected: {0,1,2} ⊄ {0,1}"), "{s}");
    assert!(s.contains("rejected: parse error: unknown point `9`"));
    let text = std::fs::read_to_string(&t).unwrap();
    assert_eq!(text, "0 | 1 | {0,1} | {0,1}\n1 | 0 | {0} | {0}\nVerdict: Nonempty at depth 2\n");
}

#[test]
fn seeded_transcripts_replay_byte_identically() {
    let args = ["play", "instance:reals", "--strategy", "builtin:half-ball", "--adversary", "random", "--seed", "17", "--depth", "12"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    assert!(out(&a).ends_with("Verdict: Nonempty at depth 12\n"), "{}", out(&a));
    let c = run(&["play", "instance:reals", "--strategy", "builtin:half-ball", "--adversary", "random", "--seed", "18", "--depth", "12"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn human_cannot_beat_the_stationarized_witness() {
    let chain = fixture("chain3.json");
    let moves: Vec<(&str, &str, u32)> =
        vec![("0", "{0}", 1), ("0", "{0,1}", 3), ("1", "{0,1}", 3), ("0", "{0,1,2}", 7), ("1", "{0,1,2}", 7), ("2", "{0,1,2}", 7)];
    for a in &moves {
        for b in &moves {
            let input = format!("{}; {}\n{}; {}\n{}; {}\n{}; {}\nquit\n", a.0, a.1, b.0, b.1, b.0, b.1, b.0, b.1);
            let o = run_stdin(&["play", &chain, "--strategy", PIPELINE, "--predicate", "limit∋0|limit={0,1}"], &input);
            assert!(!out(&o).contains("Verdict: Empty"), "{input}\n{}", out(&o));
        }
    }
}
