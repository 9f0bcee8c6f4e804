use std::path::Path;
use std::process::{Command, Output};

fn atc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atc"))
        .current_dir(dir)
        .args(args)
        .env_remove("ATC_THREADS")
        .output()
        .expect("run atc")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn numbers(text: &str) -> Vec<f64> {
    text.lines()
        .skip(1)
        .flat_map(|line| line.split(','))
        .filter(|f| !f.is_empty())
        .map(|f| f.parse::<f64>().unwrap())
        .collect()
}

#[test]
fn solve_writes_solution_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(
        dir.path(),
        &["solve", "--N", "100", "--K", "10", "--L", "20", "--k1", "1", "--k2", "-0.1666667", "--force", "sine:1"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "atom_index,u_atc,u_a_op,u_c_op");
    assert_eq!(csv.lines().count(), 102);
    assert!(numbers(&csv).iter().all(|v| v.is_finite()));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["N"], 100);
    assert_eq!(summary["gamma"], 0.5);
    assert_eq!(summary["k2"], -0.1666667);
}

#[test]
fn patch_test_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["patch-test", "--N", "1000", "--K", "30", "--L", "60", "--F", "0.01"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("patch_report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
}

#[test]
fn verify_example_is_all_green() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["verify", "--N", "40", "--K", "10", "--L", "20", "--force", "point:25:1.0"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    let card: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("scorecard.json")).unwrap()).unwrap();
    assert_eq!(card["passed"], true);
    let checks = card["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    assert!(checks.iter().all(|c| c["passed"] == true));
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["solve", "--N", "300", "--K", "12", "--L", "24", "--force", "sine:3:0.2"];
    assert_eq!(code(&atc(dir.path(), &[&args[..], &["--out-dir", "a"]].concat())), 0);
    assert_eq!(code(&atc(dir.path(), &[&args[..], &["--out-dir", "b"]].concat())), 0);
    let a = std::fs::read(dir.path().join("a/solution.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/solution.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "# chain\nN = 60\nK = 8\nL = 20\nforce.kind = point\nforce.params = 30:2\n",
    )
    .unwrap();
    let out = atc(dir.path(), &["solve", "--config", "run.cfg", "--L", "24"]);
    assert_eq!(code(&out), 0);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!((summary["N"].as_u64(), summary["K"].as_u64(), summary["L"].as_u64()), (Some(60), Some(8), Some(24)));
    assert_eq!(summary["force"]["kind"], "point");
}

#[test]
fn json_config_and_custom_names() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.json"),
        r#"{"N": 80, "K": 10, "L": 20, "force": {"kind": "sine", "params": [2]}}"#,
    )
    .unwrap();
    let out = atc(dir.path(), &["solve", "--config", "run.json", "--solution", "u.csv", "--summary", "s.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read_to_string(dir.path().join("u.csv")).unwrap().lines().count(), 82);
    assert!(dir.path().join("s.json").exists());
}

#[test]
fn matrix_dump_uses_global_indices() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["solve", "--N", "50", "--K", "6", "--L", "14", "--dump-matrices", "m"]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(dir.path().join("m/atomistic_matrix.txt")).unwrap();
    assert!(text.starts_with("# banded system on atoms [2, 12]"));
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(' ').collect();
    assert_eq!(&first[..2], ["2", "2"]);
    assert!(dir.path().join("m/continuum_matrix.txt").exists());
}

#[test]
fn sweep_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["sweep", "--Ns", "100,400", "--out", "s.csv"]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(numbers(&csv).iter().all(|v| v.is_finite()));
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["solve", "--N", "3"][..],
        &["solve", "--N", "100", "--K", "18", "--L", "20"],
        &["solve", "--N", "100", "--k2", "0.1"],
        &["solve", "--N", "100", "--force", "wave:1"],
        &["solve", "--bogus"],
        &["solve", "--config", "missing.cfg"],
    ] {
        let out = atc(dir.path(), args);
        assert_eq!(code(&out), 1, "{args:?}");
        assert!(!out.stderr.is_empty());
    }
    std::fs::write(dir.path().join("x.cfg"), "N = 50\ncolour = red\n").unwrap();
    assert_eq!(code(&atc(dir.path(), &["solve", "--config", "x.cfg"])), 1);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_atc"))
        .current_dir(dir.path())
        .args(["solve", "--N", "50"])
        .env("ATC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&bad_threads), 1);
}

#[test]
fn failed_verification_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["patch-test", "--N", "100", "--K", "10", "--L", "20", "--tolerance", "1e-40"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("patch test failed"));
}

#[test]
fn solver_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = atc(dir.path(), &["solve", "--N", "100", "--force", "poly:1e308"]);
    assert_eq!(code(&out), 3);
    assert!(!dir.path().join("solution.csv").exists());
}
