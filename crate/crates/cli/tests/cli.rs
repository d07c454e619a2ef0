use std::process::{Command, Output};

use serde_json::Value;

fn hl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hl-irred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_small_range_succeeds() {
    let out = hl(&["verify", "--n-to", "60", "--summary"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "hl-irred/1");
    assert_eq!(r["summary"]["instances"], 118);
    assert!(r["summary"]["undecided"].as_array().unwrap().is_empty());
    assert!(r.get("instances").is_none());
}

#[test]
fn verify_full_report_lists_certificates() {
    let out = hl(&[
        "verify",
        "--n-from",
        "12",
        "--n-to",
        "12",
        "--alpha",
        "3",
        "--recheck",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let inst = r["instances"].as_array().unwrap();
    assert_eq!(inst.len(), 1);
    assert_eq!(inst[0]["certificates"].as_array().unwrap().len(), 6);
    assert_eq!(r["summary"]["rechecked"], 6);
}

#[test]
fn config_errors_exit_one() {
    for args in [
        &["verify", "--n-from", "0", "--n-to", "5"][..],
        &["verify", "--n-from", "9", "--n-to", "5"],
        &["verify", "--n-to", "5", "--alpha", "2"],
        &["verify"],
        &["oracle", "--budget", "0"],
        &["bounds", "--kmax", "3"],
        &["--threads", "0", "smooth"],
        &["no-such-command"],
    ] {
        assert_eq!(hl(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(hl(&["--help"]).status.code(), Some(0));
}

#[test]
fn smooth_horizon_and_hits() {
    assert_eq!(hl(&["smooth", "--bound", "30"]).status.code(), Some(3));
    let out = hl(&["smooth", "--bound", "100000"]);
    assert_eq!(out.status.code(), Some(0));
    let hits: Vec<(u64, u64)> = json(&out)["hits"]
        .as_array()
        .unwrap()
        .iter()
        .map(|h| (h["k"].as_u64().unwrap(), h["m"].as_u64().unwrap()))
        .collect();
    assert_eq!(hits, [(2, 21), (2, 45)]);
}

#[test]
fn smooth_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hits.csv");
    let out = hl(&["smooth", "--bound", "1000", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn bounds_reports_the_k8_excess() {
    let out = hl(&["bounds", "--kmax", "20"]);
    assert_eq!(out.status.code(), Some(2));
    let r = json(&out);
    let rows = r["l_maxima"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["offending_k"], serde_json::json!([8]));
    assert_eq!(rows[1]["holds"], true);
    assert!(r["large_k"].is_null());
    assert!(String::from_utf8_lossy(&out.stderr).contains("offending k: [8]"));
}

#[test]
fn lemma_gaps_limit_checks() {
    let out = hl(&["lemma-gaps", "--limit", "5000"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ceiling 1000000 skipped"));
    assert_eq!(
        hl(&["lemma-gaps", "--limit", "2000000000"]).status.code(),
        Some(1)
    );
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let oracle = |threads: &str, seed: &str| {
        let args = [
            "--threads",
            threads,
            "oracle",
            "--n-max",
            "10",
            "--samples",
            "4",
        ];
        hl(&[&args[..], &["--seed", seed]].concat())
    };
    let a = oracle("1", "7");
    let b = oracle("4", "7");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = oracle("4", "8");
    assert_ne!(a.stdout, c.stdout);

    let v1 = hl(&["--threads", "1", "verify", "--n-to", "40"]);
    let v3 = hl(&["--threads", "3", "verify", "--n-to", "40"]);
    assert_eq!(v1.stdout, v3.stdout);
}

#[test]
fn threads_env_var_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_hl-irred"))
        .env("HL_IRRED_THREADS", "0")
        .args(["smooth"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table_cache_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("primes.bin");
    let report = dir.path().join("report.json");
    let args = [
        "--table-cache",
        cache.to_str().unwrap(),
        "--out",
        report.to_str().unwrap(),
        "verify",
        "--n-to",
        "30",
    ];
    let first = hl(&args);
    assert_eq!(first.status.code(), Some(0));
    assert!(first.stdout.is_empty());
    assert!(cache.exists());
    let r1 = std::fs::read(&report).unwrap();
    let second = hl(&args);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(std::fs::read(&report).unwrap(), r1);

    std::fs::write(&cache, b"garbage").unwrap();
    assert_eq!(hl(&args).status.code(), Some(1));
}
