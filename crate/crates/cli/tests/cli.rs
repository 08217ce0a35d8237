//! Exit codes, JSON shape and determinism of the `doublepole` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_doublepole"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("one JSON document")
}

#[test]
fn verify_json_report() {
    let out = run(&[
        "verify",
        "--id",
        "doublepole-GA",
        "--k",
        "2",
        "--i",
        "1",
        "--order",
        "40",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["id"], "doublepole-GA");
    assert_eq!(v["params"]["k"], 2);
    assert_eq!(v["params"]["i"], 1);
    assert_eq!(v["order"], 40);
    assert_eq!(v["status"], "equal");
    assert!(v["first_mismatch"].is_null());
    assert!(v["elapsed_ms"].as_f64().is_some());
}

#[test]
fn no_timing_drops_elapsed() {
    let out = run(&[
        "verify",
        "--id",
        "intro-A2",
        "--format",
        "json",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out).get("elapsed_ms").is_none());
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["verify", "--id", "nosuch"][..],
        &["verify", "--id", "doublepole-GA", "--k", "0", "--i", "0"],
        &["verify", "--id", "intro-A2", "--k", "1"],
        &["verify", "--id", "intro-A2", "--order", "0"],
        &["verify"],
        &["sweep", "--id", "doublepole-GA", "--k", "x"],
        &["sweep", "--id", "doublepole-GA", "--jobs", "0"],
        &["frobnicate"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn sweep_is_deterministic_across_jobs() {
    let base = [
        "sweep",
        "--id",
        "false-GA",
        "--k",
        "1..3",
        "--i",
        "all",
        "--order",
        "30",
        "--format",
        "json",
        "--no-timing",
    ];
    let serial = run(&[&base[..], &["--jobs", "1"]].concat());
    let parallel = run(&[&base[..], &["--jobs", "6"]].concat());
    let again = run(&[&base[..], &["--jobs", "6"]].concat());
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, parallel.stdout);
    assert_eq!(parallel.stdout, again.stdout);
    let reports = json(&serial);
    let tuples: Vec<(u64, u64)> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["params"]["k"].as_u64().unwrap(),
                r["params"]["i"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        tuples,
        vec![
            (1, 0),
            (1, 1),
            (2, 0),
            (2, 1),
            (2, 2),
            (3, 0),
            (3, 1),
            (3, 2),
            (3, 3)
        ]
    );
}

#[test]
fn sweep_text_has_one_line_per_case() {
    let out = run(&["sweep", "--id", "alt-false", "--m", "0..3", "--no-timing"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("alt-false [m=0] order 40 (grain 1): equal"));
    assert_eq!(lines[4], "4 cases: 4 equal, 0 mismatch");
}

#[test]
fn w_lists_are_accepted() {
    let out = run(&[
        "sweep",
        "--id",
        "prop-43",
        "--w",
        "0,1,half,w",
        "--order",
        "20",
        "--format",
        "json",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 8);
    assert_eq!(reports[2]["params"]["w"], "half");
    assert_eq!(reports[2]["grain"], 2);
}

#[test]
fn selftest_summary() {
    let out = run(&["selftest", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["failed"], 0);
    assert!(v["passed"].as_u64().unwrap() > 0);
    assert_eq!(
        v["checks"].as_array().unwrap().len() as u64,
        v["passed"].as_u64().unwrap()
    );
}

#[test]
fn injected_fault_fails_selftest() {
    let out = run(&[
        "selftest",
        "--inject-fault",
        "corrupt-dp",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(json(&out)["failed"].as_u64().unwrap() > 0);
}

#[test]
fn list_covers_the_registry() {
    let out = run(&["list", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let ids: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(ids.len(), 17);
    assert!(ids.contains(&"doublepole-AB2"));
    assert!(!run(&["--help"]).stdout.is_empty());
}
