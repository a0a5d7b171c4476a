//! The `mechkit` binary end to end: reports, exit codes, determinism and
//! mechanism round trips through `check-ic`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mechkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn mechkit<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_mechkit")).args(args).output().unwrap()
}

fn succeed(args: &[&str]) -> Output {
    let out = mechkit(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn json(args: &[&str]) -> Value {
    serde_json::from_slice(&succeed(args).stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn oracle_on_the_independent_example() {
    let r = json(&["oracle", path(&fixture("fx1.json"))]);
    assert_eq!(r["value"], "1/2");
    assert_eq!(r["profitable"], true);
    assert_eq!(r["x"], serde_json::json!([["1", "0"], ["0", "1"]]));
}

#[test]
fn matching_mechanism_fails_under_correlation() {
    let r = json(&["check-ic", path(&fixture("fx2.json")), path(&fixture("xstar.json"))]);
    assert_eq!(r["verdict"], false);
    assert_eq!(r["obedient"], false);
    assert_eq!(r["ex_ante_indifferent"], true);
    assert_eq!(r["uninformative"], false);
    assert!(!r["violations"].as_array().unwrap().is_empty());
    let r = json(&["oracle", path(&fixture("fx2.json"))]);
    assert_eq!(r["value"], "0");
}

#[test]
fn full_rank_spans_the_independent_counterpart() {
    let r = json(&["spans", path(&fixture("fx2.json")), path(&fixture("fx1-independent.json"))]);
    assert_eq!(r["spans"], true);
    let r = json(&["spans", path(&fixture("fx1-independent.json")), path(&fixture("fx2.json"))]);
    assert_eq!(r["spans"], false);
}

#[test]
fn emitted_mechanisms_round_trip_through_check_ic() {
    let cases = [
        ("construct", "fx1.json", true),
        ("oracle", "fx1.json", true),
        ("oracle", "fx2.json", true),
        ("myo", "fx3.json", true),
        ("oracle", "fx4.json", true),
        ("alloc-n", "fx4.json", true),
    ];
    for (i, (cmd, inst, expect)) in cases.into_iter().enumerate() {
        let out = scratch(&format!("report-{i}.json"));
        succeed(&[cmd, path(&fixture(inst)), "--out", path(&out)]);
        let r = json(&["check-ic", path(&fixture(inst)), path(&out)]);
        assert_eq!(r["verdict"], expect, "{cmd} {inst}");
        // a check-ic report is itself a mechanism file
        let again = scratch(&format!("again-{i}.json"));
        succeed(&["check-ic", path(&fixture(inst)), path(&out), "--out", path(&again)]);
        let r2 = json(&["check-ic", path(&fixture(inst)), path(&again)]);
        assert_eq!(r2["verdict"], r["verdict"]);
    }
    let out = scratch("xstar-fx2.json");
    succeed(&["check-ic", path(&fixture("fx2.json")), path(&fixture("xstar.json")), "--out", path(&out)]);
    let r = json(&["check-ic", path(&fixture("fx2.json")), path(&out)]);
    assert_eq!(r["verdict"], false);
}

#[test]
fn every_report_names_its_basis() {
    let f = |n: &str| fixture(n).to_str().unwrap().to_owned();
    let runs: Vec<Vec<String>> = vec![
        vec!["inspect".into(), f("fx1.json")],
        vec!["inspect".into(), f("fx4.json")],
        vec!["check-ic".into(), f("fx1.json"), f("xstar.json")],
        vec!["maximin".into(), f("fx1.json"), f("xstar.json")],
        vec!["spans".into(), f("fx2.json"), f("fx1.json")],
        vec!["classify".into(), f("fx2.json"), "--spread".into()],
        vec!["additivity".into(), f("fx5.json")],
        vec!["construct".into(), f("fx5.json")],
        vec!["transport".into(), f("fx1.json")],
        vec!["orthogonal".into(), f("fx1.json"), f("fx1-independent.json")],
        vec!["decompose".into(), f("fx1.json"), f("xstar.json")],
        vec!["myo".into(), f("fx3.json")],
        vec!["alloc-n".into(), f("fx4.json")],
        vec!["oracle".into(), f("fx4.json")],
    ];
    for args in runs {
        let out = mechkit(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let r: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(r["command"], args[0].as_str());
        assert!(r["basis"].as_str().is_some_and(|s| !s.is_empty()), "{args:?}");
    }
}

#[test]
fn worked_fixture_values() {
    let r = json(&["construct", path(&fixture("fx1.json"))]);
    assert_eq!(r["outcome"]["kind"], "constructed");
    assert_eq!(r["outcome"]["payoff"], "1/2");
    let r = json(&["construct", path(&fixture("fx5.json"))]);
    assert_eq!(r["outcome"]["kind"], "none_certificate");
    assert_eq!(r["profitable"], false);
    let r = json(&["myo", path(&fixture("fx3.json"))]);
    assert_eq!(r["best_value"], "2/9");
    assert_eq!(r["diagonal_sum"], "2");
    let r = json(&["decompose", path(&fixture("fx1.json")), path(&fixture("xstar.json"))]);
    assert_eq!(r["audit"]["reconstructs"], true);
    let r = json(&["alloc-n", path(&fixture("fx4.json"))]);
    assert_eq!(r["mode"], "construction");
    assert_eq!(r["profitable"], true);
    let r = json(&["inspect", path(&fixture("fx4.json"))]);
    assert_eq!(r["vbar"], "0");
    assert_eq!(r["unbiased"], true);
}

#[test]
fn exit_codes() {
    // refusal: matching analysis needs independence
    let out = mechkit(["myo", path(&fixture("fx2.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("independent types"));
    // refusal: two-option analysis on an allocation instance
    assert_eq!(mechkit(["transport", path(&fixture("fx4.json"))]).status.code(), Some(2));
    // I/O
    assert_eq!(mechkit(["oracle", "/definitely/not/here.json"]).status.code(), Some(1));
    // schema: the offending field is named
    let bad = scratch("bad.json");
    std::fs::write(&bad, r#"{"name":"bad","agents":["l","r"],"types":{"l":["0"],"r":["0"]},"pi":[["x"]],"vL":[["1"]]}"#).unwrap();
    let out = mechkit(["inspect", path(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pi"));
    // usage
    assert_eq!(mechkit(["no-such-command"]).status.code(), Some(1));
    assert_eq!(mechkit(["--help"]).status.code(), Some(0));
}

#[test]
fn zero_marginal_types_are_dropped_on_request() {
    let inst = scratch("zero.json");
    std::fs::write(
        &inst,
        r#"{"name":"zero","agents":["l","r"],"types":{"l":["0","1","2"],"r":["0","1"]},"pi":[["1/4","1/4"],["0","0"],["1/4","1/4"]],"vL":[["1","-1"],["5","5"],["-1","1"]]}"#,
    )
    .unwrap();
    assert_eq!(mechkit(["inspect", path(&inst)]).status.code(), Some(1));
    let r = json(&["inspect", path(&inst), "--drop-zero-types"]);
    assert_eq!(r["shape"], serde_json::json!([2, 2]));
    let r = json(&["oracle", path(&inst), "--drop-zero-types"]);
    assert_eq!(r["value"], "1/2");
}

#[test]
fn reports_are_deterministic() {
    let fx3 = fixture("fx3.json");
    let args = ["construct", path(&fx3)];
    assert_eq!(mechkit(args).stdout, mechkit(args).stdout);
    let g = |seed: &str| mechkit(["generate", "--shape", "3x3", "--kind", "conditionally-independent:2", "--seed", seed]);
    assert_eq!(g("7").stdout, g("7").stdout);
    assert_ne!(g("7").stdout, g("8").stdout);
}

#[test]
fn generated_instances_load() {
    let two = scratch("gen-two.json");
    let out = mechkit(["generate", "--shape", "3x3", "--kind", "full-rank", "--seed", "1", "--zero-mean", "--out", path(&two)]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&["inspect", path(&two)]);
    assert_eq!(r["rank"], 3);
    assert_eq!(r["expected_value"], "0");
    let alloc = scratch("gen-alloc.json");
    let args = ["generate", "--shape", "2x2x2", "--kind", "unbiased-n-alloc", "--seed", "4", "--disposal", "--out", path(&alloc)];
    assert_eq!(mechkit(args).status.code(), Some(0));
    let r = json(&["alloc-n", path(&alloc)]);
    assert_eq!(r["mode"], "disposal");
    assert_eq!(r["iff_regime"], true);
    let oracle = json(&["oracle", path(&alloc)]);
    assert_eq!(oracle["profitable"], r["profitable"]);
}

#[test]
fn text_format_is_a_table() {
    let out = mechkit(["check-ic", path(&fixture("fx1.json")), path(&fixture("xstar.json")), "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("verdict") && l.trim_end().ends_with("true")));
    assert!(text.lines().any(|l| l.starts_with("common_value") && l.trim_end().ends_with("1/2")));
}
