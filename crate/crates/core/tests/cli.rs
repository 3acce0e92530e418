//! End-to-end tests of the command-line interface: exit codes, JSON
//! shape, reproducibility, and one documented command per classification
//! branch (the same commands listed in docs/cli-examples.md).

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_padic-heyde"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    let text = std::str::from_utf8(&output.stdout).expect("utf8 stdout");
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad JSON ({e}): {text}"))
}

fn write_temp(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("padic-heyde-test-{name}"));
    std::fs::write(&path, contents).expect("write temp file");
    path
}

#[test]
fn classify_reaches_every_branch() {
    // one documented command per classification branch
    let branches: Vec<(&[&str], &str, bool)> = vec![
        (&["classify", "--group", "omega", "--p", "5", "--k", "0", "--c", "2"], "1i", false),
        (&["classify", "--group", "omega", "--p", "3", "--k", "0", "--c", "1"], "1i", true),
        (&["classify", "--group", "omega", "--p", "2", "--k", "0", "--c", "1,0"], "1ii", false),
        (&["classify", "--group", "omega", "--p", "5", "--k", "1", "--c", "1"], "1iii", false),
        (&["classify", "--group", "omega", "--p", "3", "--k", "0", "--c", "2"], "2i", false),
        (&["classify", "--group", "omega", "--p", "2", "--k", "0", "--c", "1,1"], "2ii", false),
        (&["classify", "--group", "omega", "--p", "2", "--k", "-1", "--c", "1"], "2iii", false),
        (&["classify", "--group", "omega", "--p", "2", "--k", "3", "--c", "1"], "2iv", false),
    ];
    for (args, expected_case, degenerate) in branches {
        let output = run(args);
        assert!(output.status.success(), "{args:?}");
        let json = stdout_json(&output);
        assert_eq!(json["schema"], 1);
        assert_eq!(json["case"], expected_case, "{args:?}");
        assert_eq!(json["degenerate_subcase"], degenerate, "{args:?}");
    }
}

#[test]
fn classify_rejects_bad_parameters_with_usage_exit() {
    let output = run(&["classify", "--p", "4", "--c", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(output.stdout.is_empty());

    let output = run(&["classify", "--group", "delta", "--p", "3", "--k", "1", "--c", "2"]);
    assert_eq!(output.status.code(), Some(2));

    let output = run(&["nonsense"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn construct_families_with_verification() {
    for args in [
        vec!["construct", "--case", "2i", "--p", "3", "--a", "1/2", "--level", "2", "--verify"],
        vec!["construct", "--case", "2ii", "--p", "2", "--a", "1/3", "--level", "2", "--verify"],
        vec!["construct", "--case", "2iii", "--p", "2", "--a", "1/2", "--level", "3", "--verify"],
        vec!["construct", "--case", "2iv", "--p", "2", "--k", "2", "--a", "1/2", "--level", "3", "--verify"],
        vec!["construct", "--case", "k1-pair", "--p", "3", "--a", "1/2", "--level", "2", "--verify"],
        vec!["construct", "--case", "haar-pair", "--p", "5", "--a", "1/2", "--level", "2", "--verify"],
    ] {
        let output = run(&args);
        assert!(output.status.success(), "{args:?}: {}", String::from_utf8_lossy(&output.stderr));
        let json = stdout_json(&output);
        assert_eq!(json["verify"]["passed"], true, "{args:?}");
        assert!(json["provenance"]["paper_eq"].is_string());
        assert!(json["mu1"]["probs"].is_array());
    }
}

#[test]
fn construct_rejects_inadmissible_family() {
    let output = run(&["construct", "--case", "2i", "--p", "2", "--a", "1/2", "--level", "2"]);
    assert_eq!(output.status.code(), Some(2));
    let output = run(&["construct", "--case", "haar-pair", "--p", "3", "--a", "1/2", "--level", "2", "--verify"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_detects_asymmetric_pair_with_witness() {
    let point_mass = write_temp("pm.json", r#"{"p":3,"level":1,"probs":["0/1","1/1","0/1"]}"#);
    let path = point_mass.to_str().unwrap();
    let output = run(&[
        "check", "--dist1", path, "--dist2", path, "--alpha-k", "0", "--alpha-c", "1", "--level", "1",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let json = stdout_json(&output);
    assert_eq!(json["holds"], false);
    assert_eq!(json["agree"], true);
    assert_eq!(json["fourier"]["witness"], serde_json::json!([0, 1]));
}

#[test]
fn check_passes_symmetric_pair() {
    let uniform = write_temp(
        "uniform3.json",
        r#"{"p":3,"level":1,"probs":["1/3","1/3","1/3"]}"#,
    );
    let path = uniform.to_str().unwrap();
    let output = run(&[
        "check", "--dist1", path, "--dist2", path, "--alpha-k", "0", "--alpha-c", "2", "--level", "1",
    ]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    assert_eq!(json["holds"], true);
}

#[test]
fn check_negative_power_normalizes() {
    let two_tier = write_temp(
        "twotier3.json",
        r#"{"p":3,"level":2,"probs":["2/9","1/18","1/18","2/9","1/18","1/18","2/9","1/18","1/18"]}"#,
    );
    let uniform = write_temp(
        "uniform9.json",
        r#"{"p":3,"level":2,"probs":["1/9","1/9","1/9","1/9","1/9","1/9","1/9","1/9","1/9"]}"#,
    );
    // k = -1 swaps the slots, so (uniform, two-tier) becomes the k = 1
    // reference pair
    let output = run(&[
        "check",
        "--dist1", uniform.to_str().unwrap(),
        "--dist2", two_tier.to_str().unwrap(),
        "--alpha-k", "-1",
        "--alpha-c", "1",
        "--level", "2",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let json = stdout_json(&output);
    assert_eq!(json["swapped"], true);
    assert_eq!(json["holds"], true);
}

#[test]
fn enumerate_matches_golden_file() {
    let output = run(&["enumerate", "--p", "5", "--level", "1", "--t", "2", "--d", "5"]);
    assert!(output.status.success());
    let expected = include_str!("data/enumerate_p5_t2_d5.json");
    assert_eq!(
        String::from_utf8_lossy(&output.stdout).trim(),
        expected.trim(),
        "golden enumeration output changed"
    );
}

#[test]
fn enumerate_is_byte_identical_across_runs_and_jobs() {
    let one = run(&["enumerate", "--p", "5", "--level", "1", "--t", "2", "--d", "5", "--jobs", "1"]);
    let again = run(&["enumerate", "--p", "5", "--level", "1", "--t", "2", "--d", "5", "--jobs", "1"]);
    assert_eq!(one.stdout, again.stdout);

    let parallel = run(&["enumerate", "--p", "5", "--level", "1", "--t", "2", "--d", "5", "--jobs", "4"]);
    let serial_json = stdout_json(&one);
    let parallel_json = stdout_json(&parallel);
    assert_eq!(serial_json["result"], parallel_json["result"]);
}

#[test]
fn enumerate_budget_error() {
    let output = run(&["enumerate", "--p", "5", "--level", "2", "--t", "2", "--d", "5", "--budget", "100"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("budget"));
}

#[test]
fn montecarlo_seeded_and_reproducible() {
    let args = [
        "montecarlo", "--case", "2i", "--p", "3", "--a", "1/2", "--level", "1",
        "--samples", "20000", "--seed", "42",
    ];
    let one = run(&args);
    let two = run(&args);
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let json = stdout_json(&one);
    assert!(json["statistic"].as_f64().unwrap() < 0.05);

    // seed is mandatory
    let output = run(&[
        "montecarlo", "--case", "2i", "--p", "3", "--a", "1/2", "--level", "1",
        "--samples", "1000",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn montecarlo_threshold_gates_exit_code() {
    let point_mass = write_temp("pm2.json", r#"{"p":3,"level":1,"probs":["0/1","1/1","0/1"]}"#);
    let path = point_mass.to_str().unwrap();
    let output = run(&[
        "montecarlo", "--dist1", path, "--dist2", path, "--alpha-k", "0", "--alpha-c", "1",
        "--level", "1", "--samples", "1000", "--seed", "7", "--threshold", "0.5",
    ]);
    assert_eq!(output.status.code(), Some(1));
    let json = stdout_json(&output);
    assert_eq!(json["statistic"].as_f64().unwrap(), 1.0);
    assert_eq!(json["passed"], false);
}

#[test]
fn selftest_single_criterion() {
    // criterion 1 is fast; the full suite runs in the acceptance test
    let output = run(&["selftest", "--criterion", "1"]);
    assert!(output.status.success());
    let json = stdout_json(&output);
    assert_eq!(json["all_passed"], true);
    assert_eq!(json["criteria"][0]["id"], 1);
    assert!(String::from_utf8_lossy(&output.stderr).contains("criterion 1"));
}
