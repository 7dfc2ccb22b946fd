use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use fbar_core::harness::{emit_report, CheckResult, Relation, ReportFormat};
use fbar_core::rational::q;

fn fbar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fbar")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fbar-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(fbar(&[]).status.code(), Some(2));
    assert_eq!(fbar(&["fbar", "a", "b", "--mode", "nope"]).status.code(), Some(2));
    assert_eq!(fbar(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(fbar(&["fbar", "/no/such/file", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn verify_exit_status_and_report() {
    let d = scratch("verify");
    let out = d.join("r.json");
    let o = fbar(&["verify", "--check", "anchors", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("3 checks: 3 pass"));
    let o = fbar(&["report", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));

    let e = fbar(&["verify", "--suite", "none"]);
    assert_eq!(e.status.code(), Some(0));
    assert!(stdout(&e).contains("\"results\": []"));
}

#[test]
fn a_failing_report_exits_with_one() {
    let d = scratch("fail");
    let rows = vec![
        CheckResult::new("demo", "pass", q(1, 3), Relation::Le, Some(q(1, 2))),
        CheckResult::new("demo", "fail", q(2, 3), Relation::Le, Some(q(1, 2))),
    ];
    let p = d.join("r.csv");
    fs::write(&p, emit_report(&rows, ReportFormat::Csv).unwrap()).unwrap();
    let o = fbar(&["report", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("1 pass, 1 fail"));
    let o = fbar(&["report", p.to_str().unwrap(), "--convert", "json"]);
    assert!(stdout(&o).contains("\"measured\": \"2/3\""));
}

#[test]
fn distances_between_word_files() {
    let d = scratch("fbar");
    let (a, b) = (d.join("a.word"), d.join("b.word"));
    fs::write(&a, "alphabet 2\n1^2 0^3\n").unwrap();
    fs::write(&b, "alphabet 2\n1^3 0^2\n").unwrap();
    let o = fbar(&["fbar", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["upper"]["value"], "1/5");
    assert_eq!(v["exact"], true);
    let o = fbar(&["fbar", a.to_str().unwrap(), b.to_str().unwrap(), "--mode", "ftilde"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["distance"]["value"], "0");
    let o = fbar(&["fbar", a.to_str().unwrap(), b.to_str().unwrap(), "--substring", "1", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    // 100 vs 110
    assert_eq!(v["upper"]["value"], "1/3");
}

#[test]
fn functor_round_trip_through_files() {
    let d = scratch("functor");
    let seq = d.join("seq.json");
    fs::write(&seq, r#"{"alphabet": 2, "layouts": [[[0, 1, 1], [1, 0, 0]], [[0, 1], [1, 0]]], "l": [3, 3]}"#).unwrap();
    let out = d.join("words");
    let o = fbar(&["functor", seq.to_str().unwrap(), "--level", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let back = fbar(&["functor", seq.to_str().unwrap(), "--level", "2", "--invert", out.join("circular-2-1.word").to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0));
    // word 1 of level 2 is w1 w0 = 100 011
    assert_eq!(stdout(&back), "alphabet 2\n1 0^3 1^2\n");
}

#[test]
fn build_writes_a_manifest() {
    let d = scratch("build");
    let cfg = d.join("c.json");
    fs::write(
        &cfg,
        r#"{"mechanism": "shifting", "K": 2, "alpha": "1/8", "eps": "1/16", "delta": "1/2",
            "u": [1, 1], "e": [2, 2], "l": [4, 8, 8], "R": [2, 2, 2], "d": [2, 2], "stages": 2}"#,
    )
    .unwrap();
    let out = d.join("run");
    let o = fbar(&["build", cfg.to_str().unwrap(), "--blocks", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["mechanism"], "shifting");
    assert_eq!(m["stages"].as_array().unwrap().len(), 2);
    // no block count anywhere is a usage error
    let o = fbar(&["build", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
