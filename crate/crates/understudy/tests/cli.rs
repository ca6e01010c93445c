//! Black-box checks of the `understudy` binary: flag/config-file merging,
//! artifact layout, and error exits.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_understudy"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

#[test]
fn toy_run_writes_the_full_artifact_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "toy-run",
        "--clients",
        "1",
        "--steps",
        "256",
        "--seed-list",
        "5",
        "--truth",
        "0,1,2,0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let config: serde_json::Value = serde_json::from_str(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(config["command"], "toy-run");
    assert_eq!(config["rng"], "chacha12");
    assert_eq!(config["clients"], 1);
    assert_eq!(config["truth"], "0,1,2,0");
    assert_eq!(config["seeds"], serde_json::json!([5]));

    let summary = read(dir.path(), "summary.csv");
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("seed,steps,queries,quits_client1,final_truth_posterior,wall_time")
    );
    let row = lines.next().expect("one data row");
    assert!(row.starts_with("5,256,"));
    assert!(row.ends_with(",0.000"), "wall time is zeroed without --timing: {row}");

    let aggregate = read(dir.path(), "aggregate.csv");
    assert!(aggregate.starts_with(
        "seeds,mean_queries,sd_queries,min_queries,max_queries,total_quits,total_conservatism_violations\n1,"
    ));

    let record = read(dir.path(), "query_record_5.txt");
    assert_eq!(record.len(), 257, "256 flags plus newline");
    assert!(record.trim_end().chars().all(|c| c == '0' || c == '1'));

    // 256 steps = exactly one pixel row.
    let pbm = read(dir.path(), "query_record_5.pbm");
    assert!(pbm.starts_with("P1\n256 1\n"));

    let posterior = read(dir.path(), "posterior_5.csv");
    assert!(posterior.starts_with("factor,1/3,2/3,1\n"));
    assert_eq!(posterior.lines().count(), 5, "header plus one row per propensity");
}

#[test]
fn toy_run_skips_the_bitmap_for_ragged_step_counts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "toy-run",
        "--clients",
        "1",
        "--steps",
        "100",
        "--seed-list",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("query_record_0.txt").exists());
    assert!(!dir.path().join("query_record_0.pbm").exists());
}

#[test]
fn zero_step_runs_still_produce_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "toy-run",
        "--clients",
        "1",
        "--steps",
        "0",
        "--seed-list",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary = read(dir.path(), "summary.csv");
    let row = summary.lines().nth(1).expect("data row");
    assert!(row.starts_with("1,0,0,false,"), "no steps, no queries, no quit: {row}");
    assert_eq!(read(dir.path(), "query_record_1.txt"), "\n");
    assert!(!dir.path().join("query_record_1.pbm").exists());
}

#[test]
fn flags_override_config_file_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    fs::write(
        &config_path,
        r#"{"clients": 1, "steps": 64, "seeds": 2, "truth": "0,0,0,0"}"#,
    )
    .unwrap();
    let out = run(&[
        "toy-run",
        "--config",
        config_path.to_str().unwrap(),
        "--steps",
        "32",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let echo: serde_json::Value = serde_json::from_str(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echo["steps"], 32, "flag beats file");
    assert_eq!(echo["clients"], 1, "file beats default");
    assert_eq!(echo["truth"], "0,0,0,0");
    assert_eq!(echo["seeds"], serde_json::json!([0, 1]));
}

#[test]
fn config_files_reject_unknown_fields() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    fs::write(&config_path, r#"{"stepz": 64}"#).unwrap();
    let out = run(&[
        "toy-run",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepz"));
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let out = run(&["toy-run", "--steps", "8", "--out", "/no/such/place"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not exist"));
}

#[test]
fn showcase_truth_requires_three_clients() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "toy-run",
        "--clients",
        "2",
        "--steps",
        "8",
        "--truth",
        "showcase",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_check_filters_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "bounds-check",
        "--checks",
        "theorem7,lemma1",
        "--runs",
        "50",
        "--steps",
        "12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let reports = read(dir.path(), "reports.csv");
    let mut lines = reports.lines();
    assert_eq!(lines.next(), Some("check,mode,lhs,stderr,rhs,holds,note"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("theorem7,statistical,"));
    assert!(rows[1].starts_with("lemma1,statistical,"));
    assert!(rows.iter().all(|r| r.contains(",true,")));

    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("all 2 checks hold"));
}

#[test]
fn bounds_check_rejects_unknown_check_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "bounds-check",
        "--checks",
        "theorem12",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("theorem12"));
}

#[test]
fn bounds_check_scenario_comes_from_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bounds.json");
    fs::write(
        &config_path,
        r#"{
            "checks": ["theorem1", "theorem2", "theorem3"],
            "runs": 40,
            "steps": 10,
            "scenario": {
                "kind": "toy",
                "clients": 1,
                "truth": [0, 1, 2, 0]
            }
        }"#,
    )
    .unwrap();
    let out = run(&[
        "bounds-check",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let echo: serde_json::Value = serde_json::from_str(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echo["scenario"]["kind"], "toy");
    assert_eq!(echo["runs"], 40);

    let reports = read(dir.path(), "reports.csv");
    // Exact suite rows for theorems 1-3 across five instances, then the
    // statistical rows for the toy scenario.
    assert_eq!(reports.matches("\ntheorem1,exact,").count(), 5);
    assert_eq!(reports.matches("theorem1,statistical,").count(), 1);
    assert_eq!(reports.matches("theorem2,statistical,").count(), 1);
    assert_eq!(reports.matches("theorem3,statistical,").count(), 1);
}

#[test]
fn smap_demo_traces_every_estimator() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "smap-demo",
        "--steps",
        "32",
        "--alpha",
        "0.25",
        "--top-n",
        "1",
        "--seed",
        "9",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(dir.path(), "estimators.csv");
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,symbol,mu,xi,rho,rho_norm,rho_stat,top_min,missing_mass,top_count,posterior_0,posterior_1,posterior_2")
    );
    assert_eq!(lines.count(), 32);

    let echo: serde_json::Value = serde_json::from_str(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echo["top_n"], 1);
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["measures"].as_array().unwrap().len(), 3);
}

#[test]
fn smap_demo_accepts_markov_classes_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("smap.json");
    fs::write(
        &config_path,
        r#"{
            "steps": 16,
            "top_n": 1,
            "truth_index": 1,
            "measures": [
                {"kind": "iid", "probs": [0.5, 0.5]},
                {"kind": "markov", "initial": [0.9, 0.1],
                 "transitions": [[0.8, 0.2], [0.3, 0.7]]}
            ],
            "prior": [0.25, 0.75]
        }"#,
    )
    .unwrap();
    let out = run(&[
        "smap-demo",
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = read(dir.path(), "estimators.csv");
    assert!(csv.starts_with("t,symbol,"));
    assert_eq!(csv.lines().count(), 17);

    let echo: serde_json::Value = serde_json::from_str(&read(dir.path(), "config.json")).unwrap();
    assert_eq!(echo["truth_index"], 1);
    assert_eq!(echo["measures"][1]["kind"], "markov");
}

#[test]
fn smap_demo_validates_rank_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "smap-demo",
        "--top-n",
        "7",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("top-n"));
}
