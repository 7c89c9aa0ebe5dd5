//! End-to-end runs of the compiled binary: exit codes, the JSON error
//! channel on stderr, and byte determinism of the output files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_acim"))
}

fn run(args: &[&str], out: &Path) -> Output {
    let mut cmd = Command::new(binary());
    cmd.args(args);
    cmd.arg("--out").arg(out);
    cmd.output().expect("binary runs")
}

fn tempdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("acim-cli-test-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn read_summary(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("summary.json")).expect("summary exists");
    serde_json::from_str(&text).expect("summary is JSON")
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("dir readable") {
        let entry = entry.expect("entry");
        let name = entry.file_name().into_string().expect("utf8 name");
        files.insert(name, std::fs::read(entry.path()).expect("file readable"));
    }
    files
}

#[test]
fn shift_invariance_run_reports_all_exact() {
    let dir = tempdir("verify");
    let out = run(&["--command", "markov-verify", "--q", "1/2", "--max-len", "4"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["result"], "all exact");
    assert_eq!(summary["defects"].as_array().unwrap().len(), 0);
    assert!(summary["checked"].as_u64().unwrap() > 0);
}

#[test]
fn series_identity_run_writes_csv_and_passes() {
    let dir = tempdir("remark1");
    let out = run(&["--command", "markov-remark1", "--max-len", "3"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["all_hold"], true);
    let csv = std::fs::read_to_string(dir.join("identities.csv")).expect("csv");
    assert!(csv.starts_with("word,lhs,rhs,equal\n"));
    assert!(csv.lines().skip(1).all(|line| line.ends_with(",true")));
}

#[test]
fn annihilating_run_passes_all_checks() {
    let dir = tempdir("annihilate");
    let out = run(&["--command", "markov-annihilate", "--pattern", "-1,0,1"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["vanishes_on_word"], true);
    assert_eq!(summary["invariant"], true);
    assert!(summary["non_proportionality"].is_object());
    assert!(dir.join("measures.csv").exists());
}

#[test]
fn interval_density_default_run_converges() {
    let dir = tempdir("engel");
    let out = run(
        &["--command", "engel-density", "--cells", "4096", "--tol", "1e-6"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["series"]["tail"]["converged"], true);
    let csv = std::fs::read_to_string(dir.join("density.csv")).expect("csv");
    assert_eq!(csv.lines().count(), 4097);
}

#[test]
fn interval_density_with_tiny_budget_reports_non_convergence() {
    let dir = tempdir("engel-short");
    let out = run(&["--command", "engel-density", "--max-terms", "3"], &dir);
    assert_eq!(out.status.code(), Some(4));
    let summary = read_summary(&dir);
    assert_eq!(summary["series"]["tail"]["converged"], false);
}

#[test]
fn plane_invariance_run_passes_reference_rectangles() {
    let dir = tempdir("euclid");
    let out = run(&["--command", "euclid-invariance"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["rects"].as_array().unwrap().len(), 3);
}

#[test]
fn decay_run_reports_halving() {
    let dir = tempdir("decay");
    let out = run(&["--command", "decay", "--max-terms", "64"], &dir);
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["halved_by_horizon"], true);
    assert!(dir.join("decay.csv").exists());
    assert!(dir.join("cesaro.csv").exists());
}

#[test]
fn simulate_run_writes_trajectory_of_requested_length() {
    let dir = tempdir("simulate");
    let out = run(
        &["--command", "simulate", "--length", "16", "--seed", "9", "--d", "2"],
        &dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let summary = read_summary(&dir);
    assert_eq!(summary["trajectory"].as_array().unwrap().len(), 16);
    assert!(summary["mean_returns_to_origin"].as_f64().unwrap() >= 0.0);
    let csv = std::fs::read_to_string(dir.join("trajectory.csv")).expect("csv");
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn out_of_range_jump_parameter_exits_with_config_error_json() {
    let dir = tempdir("bad-q");
    let out = run(&["--command", "markov-verify", "--q", "3/2"], &dir);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).expect("utf8 stderr");
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    assert_eq!(err["kind"], "config-error");
    assert!(err["message"].as_str().unwrap().contains("between 0 and 1"));
}

#[test]
fn unknown_command_exits_with_config_error() {
    let dir = tempdir("bad-cmd");
    let out = run(&["--command", "no-such-thing"], &dir);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).expect("utf8 stderr");
    let err: serde_json::Value = serde_json::from_str(stderr.trim()).expect("stderr is JSON");
    assert_eq!(err["kind"], "config-error");
}

#[test]
fn malformed_pattern_exits_with_config_error() {
    let dir = tempdir("bad-pattern");
    let out = run(&["--command", "markov-annihilate", "--pattern", "1,x"], &dir);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identical_configurations_produce_identical_files() {
    for (name, args) in [
        ("det-verify", vec!["--command", "markov-verify", "--max-len", "3"]),
        ("det-engel", vec!["--command", "engel-density", "--cells", "512"]),
        ("det-sim", vec!["--command", "simulate", "--seed", "42"]),
    ] {
        let first = tempdir(&format!("{name}-a"));
        let second = tempdir(&format!("{name}-b"));
        assert_eq!(run(&args, &first).status.code(), Some(0));
        assert_eq!(run(&args, &second).status.code(), Some(0));
        assert_eq!(
            dir_contents(&first),
            dir_contents(&second),
            "outputs differ between identical {name} runs"
        );
    }
}
