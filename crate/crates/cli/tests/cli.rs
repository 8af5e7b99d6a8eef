use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lierestrict"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let mut rows = vec![rdr.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()));
    rows
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn roots_summaries() {
    let a2 = json(&["--family", "A", "--rank", "2", "roots"]);
    assert_eq!(a2["group_dim"], 8);
    assert_eq!(a2["num_positive_roots"], 3);
    let f4 = json(&["--family", "F", "--rank", "4", "roots"]);
    assert_eq!(f4["num_positive_roots"], 24);
    assert_eq!(f4["marks"], serde_json::json!([2, 3, 4, 2]));
}

#[test]
fn invalid_rank_is_a_usage_error() {
    let out = run(&["--family", "B", "--rank", "1", "roots"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert_eq!(run(&["--family", "A", "roots"]).status.code(), Some(2));
    assert_eq!(run(&["--family", "X", "--rank", "2", "roots"]).status.code(), Some(2));
    assert_eq!(run(&["roots", "--bogus"]).status.code(), Some(2));
}

#[test]
fn peel_reports_optimal_sequences() {
    let g2 = json(&["--family", "G", "--rank", "2", "peel"]);
    assert_eq!(g2["q_opt"], serde_json::json!([0, 5, 1]));
    assert_eq!(g2["inequality_verified"], true);
    assert_eq!(g2["permutations_checked"], 6);
    let e7 = json(&["--family", "E", "--rank", "7", "peel"]);
    assert_eq!(e7["q_opt"], serde_json::json!([0, 27, 16, 8, 6, 3, 2, 1]));
    assert_eq!(e7["inequality_verified"], true);
    assert_eq!(e7["permutations_checked"], 40320);
}

#[test]
fn peel_full_table_is_limited_to_small_rank() {
    let rows = csv_rows(&run(&[
        "--family",
        "A",
        "--rank",
        "2",
        "--format",
        "csv",
        "peel",
        "--full-table",
    ]));
    assert_eq!(rows[0], ["perm", "n", "q"]);
    assert_eq!(rows.len(), 1 + 6);
    assert!(rows[1..].iter().all(|r| r[1].ends_with(" 3")));
    assert_eq!(
        run(&["--family", "A", "--rank", "5", "peel", "--full-table"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn exponents_match_reference_rows() {
    let e8 = json(&["--family", "E", "--rank", "8", "exponents"]);
    assert_eq!(
        e8["k_over_p"],
        serde_json::json!([0, 57, 84, 100, 108, 114, 117, 119, 120])
    );
    let d5 = json(&["--family", "D", "--rank", "5", "exponents"]);
    assert_eq!(d5["k_over_p"], serde_json::json!([0, 8, 14, 17, 19, 20]));
    let rows = csv_rows(&run(&["--family", "A", "--rank", "1", "--format", "csv", "exponents"]));
    assert_eq!(rows[0], ["family", "rank", "k", "k_over_p", "p_k"]);
    assert_eq!(rows[1], ["A", "1", "1", "1", "1/1"]);
}

#[test]
fn config_file_supplies_systems_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "systems = [\"A2\", \"G2\"]\nformat = \"csv\"\n");
    let rows = csv_rows(&run(&["--config", &cfg, "exponents"]));
    assert_eq!(rows.len(), 1 + 2 + 2);
    let over = json(&[
        "--config",
        &cfg,
        "--family",
        "B",
        "--rank",
        "3",
        "--format",
        "json",
        "exponents",
    ]);
    assert_eq!(over["family"], "B");
    let bad = write(dir.path(), "bad.toml", "familly = \"A\"\n");
    assert_eq!(run(&["--config", &bad, "roots"]).status.code(), Some(2));
}

#[test]
fn verify_default_passes_and_corruption_fails() {
    let ok = run(&["verify"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);
    let bad = run(&["verify", "--inject-corrupt-marks"]);
    assert_eq!(bad.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&bad.stdout).unwrap();
    let failed: Vec<&Value> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "fail")
        .collect();
    assert!(failed.iter().any(|c| c["check"] == "marks"));
}

#[test]
fn verify_skips_checks_beyond_the_cap() {
    let out = run(&["--family", "B", "--rank", "3", "--weyl-cap", "10", "verify"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let den = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == "denominator")
        .unwrap();
    assert_eq!(den["status"], "skipped");
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped"));
}

#[test]
fn weyl_cap_exceeded_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "0.2,0.3,0.5\n");
    let out = run(&[
        "--family",
        "A",
        "--rank",
        "2",
        "--weyl-cap",
        "3",
        "char",
        "eval",
        "--mu",
        "1,1",
        "--points",
        &pts,
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn char_eval_passes_through_character_values() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "t0,t1,t2\n0.8,0.1,0.1\n1,0,0\n0.1,0.1\n");
    let rows = csv_rows(&run(&[
        "--family", "A", "--rank", "2", "--format", "csv", "char", "eval", "--n", "4", "--points", &pts,
    ]));
    assert_eq!(rows[0], ["t0", "t1", "t2", "re", "im", "regime"]);
    let identity: f64 = rows[2][3].parse().unwrap();
    assert!((identity - 64.0).abs() < 1e-9);
    assert_eq!(rows[2][5], "FACET_LIMIT");
    assert_eq!(rows[1][3], rows[3][3]);
    let rho = csv_rows(&run(&[
        "--family", "A", "--rank", "2", "--format", "csv", "char", "eval", "--mu", "2,1", "--points", &pts,
    ]));
    let dim: f64 = rho[2][3].parse().unwrap();
    assert!((dim - 3.0).abs() < 1e-9);
    let wrong = write(dir.path(), "w.csv", "0.5,0.5,0.5\n");
    assert_eq!(
        run(&["--family", "A", "--rank", "2", "char", "eval", "--n", "4", "--points", &wrong])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn alcove_commands() {
    let dir = tempfile::tempdir().unwrap();
    let pts = write(dir.path(), "p.csv", "0.8,0.1,0.1\n0.9,0.09,0.01\n");
    let rows = csv_rows(&run(&[
        "--family", "A", "--rank", "2", "--c", "0.2", "--format", "csv", "alcove", "classify", "--n", "20", "--points",
        &pts,
    ]));
    assert_eq!(rows[0], ["t0", "t1", "t2", "K", "J"]);
    assert_eq!(rows[1][3..], ["{1,2}", "{}"]);
    assert_eq!(rows[2][3..], ["{1,2}", "{2}"]);
    let out = run(&[
        "--family", "A", "--rank", "2", "--c", "0.5", "alcove", "classify", "--n", "20", "--points", &pts,
    ]);
    assert_eq!(out.status.code(), Some(2));
    let chart = json(&["--family", "A", "--rank", "2", "alcove", "chart", "--nodes", "{2}"]);
    assert_eq!(chart["free"], serde_json::json!([1]));
    assert_eq!(chart["dependent"], 0);
}

#[test]
fn norm_passes_through_the_rank_one_law() {
    let rows = csv_rows(&run(&[
        "--family", "A", "--rank", "1", "--format", "csv", "norm", "--p", "2", "--n", "32",
    ]));
    assert_eq!(
        rows[0],
        [
            "N",
            "p",
            "family",
            "rank",
            "J",
            "mode",
            "value",
            "err_est",
            "predicted_exponent"
        ]
    );
    let value: f64 = rows[1][6].parse().unwrap();
    assert!((value * value / 32.0 - 1.0).abs() < 1e-6);
    assert_eq!(rows[1][5], "facet");
    assert_eq!(rows[1][8], "0.5");
    let weighted = json(&[
        "--family", "A", "--rank", "2", "norm", "--mode", "weighted", "--p", "2", "--n", "8",
    ]);
    let v = weighted["value"].as_f64().unwrap();
    assert!((v * v / 6.0 - 1.0).abs() < 1e-4);
    assert_eq!(weighted["bound"], "invariant-l2");
}

#[test]
fn scan_fits_the_rank_one_slope() {
    let rows = csv_rows(&run(&[
        "--family",
        "A",
        "--rank",
        "1",
        "--format",
        "csv",
        "scan",
        "--p",
        "4",
        "--n-values",
        "16,32,64,128",
    ]));
    assert_eq!(rows[0].last().unwrap(), "fitted_slope");
    assert_eq!(rows.len(), 5);
    let slope: f64 = rows[1][9].parse().unwrap();
    assert!((slope - 0.75).abs() < 0.05);
    let full = json(&[
        "--family",
        "A",
        "--rank",
        "1",
        "scan",
        "--p",
        "4",
        "--n-values",
        "16,32,64,128",
    ]);
    assert_eq!(full["scan"]["N_values"], serde_json::json!([16, 32, 64, 128]));
    assert_eq!(
        run(&[
            "--family",
            "A",
            "--rank",
            "1",
            "scan",
            "--p",
            "4",
            "--n-values",
            "16,32"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn budget_overflow_is_a_resource_error() {
    let out = run(&[
        "--family",
        "A",
        "--rank",
        "2",
        "--node-budget",
        "100",
        "norm",
        "--p",
        "2",
        "--n",
        "64",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn csv_output_is_deterministic_across_worker_counts() {
    let args = |w: &'static str| {
        vec![
            "--family",
            "B",
            "--rank",
            "2",
            "--format",
            "csv",
            "--workers",
            w,
            "scan",
            "--nodes",
            "{0}",
            "--p",
            "3",
            "--n-values",
            "8,16,32,64",
        ]
    };
    let a = run(&args("1"));
    let b = run(&args("4"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mc = |w: &'static str| {
        run(&[
            "--family",
            "A",
            "--rank",
            "2",
            "--format",
            "csv",
            "--workers",
            w,
            "--seed",
            "7",
            "norm",
            "--scheme",
            "MONTE_CARLO",
            "--p",
            "2",
            "--n",
            "8",
        ])
    };
    assert_eq!(mc("1").stdout, mc("3").stdout);
}

#[test]
fn output_file_is_written_only_on_success() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("out.json");
    let target_str = target.to_str().unwrap();
    let out = run(&["--family", "B", "--rank", "1", "--out", target_str, "roots"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    let out = run(&[
        "--family", "A", "--rank", "2", "--q-res", "2", "--out", target_str, "norm", "--p", "2", "--n", "4",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!target.exists());
    let out = run(&["--family", "A", "--rank", "2", "--out", target_str, "roots"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["rank"], 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn experiment_configs_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../experiments");
    let mut configs: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    assert!(configs.len() >= 10);
    for path in configs {
        let text = std::fs::read_to_string(&path).unwrap();
        let first = text.lines().next().unwrap();
        let command: Vec<&str> = first.split_whitespace().skip(4).collect();
        assert!(!command.is_empty(), "{}: missing command line", path.display());
        let mut args = vec!["--config", path.to_str().unwrap()];
        args.extend(command);
        let out = run(&args);
        assert!(
            out.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(!out.stdout.is_empty());
    }
}
