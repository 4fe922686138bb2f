use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frechet-cpd")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Labelled scalar series with a jump after the 40th year.
fn write_years(path: &Path) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut text = String::from("label,x1\n");
    for i in 0..100 {
        let z: f64 = StandardNormal.sample(&mut rng);
        text.push_str(&format!("{},{}\n", 1950 + i, z + if i < 40 { 0.0 } else { 3.0 }));
    }
    fs::write(path, text).unwrap();
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn missing_input_prints_usage() {
    let out = cli(&["detect", "--format", "vector_csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn detect_writes_reports_and_names_the_label() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("years.csv");
    write_years(&input);
    let out_dir = tmp.path().join("out");
    let out = cli(&[
        "detect", "--input", input.to_str().unwrap(), "--format", "vector_csv", "--replicates", "200",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.txt")).unwrap();
    assert!(summary.contains("label 1989"), "{summary}");
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["reject"], true);
    assert_eq!(report["tau_hat_index"], 40);
    let scan = fs::read_to_string(out_dir.join("scan.csv")).unwrap();
    let mut lines = scan.lines();
    assert_eq!(lines.next().unwrap(), "k,u,t_n,v_left,v_right,v_left_cont,v_right_cont");
    assert_eq!(lines.count(), 81);
}

#[test]
fn detect_is_byte_identical_for_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("years.csv");
    write_years(&input);
    let run = |name: &str, seed: &str| {
        let dir = tmp.path().join(name);
        let out = cli(&[
            "detect", "--input", input.to_str().unwrap(), "--format", "vector_csv", "--replicates", "300",
            "--seed", seed, "--segment", "--dump-replicates", "--out-dir", dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        dir_contents(&dir)
    };
    let a = run("a", "9");
    assert_eq!(a.len(), 6);
    assert_eq!(a, run("b", "9"));
    assert_ne!(a, run("c", "10"));
}

#[test]
fn degenerate_data_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("flat.csv");
    fs::write(&input, format!("x1\n{}", "2.5\n".repeat(40))).unwrap();
    let out = cli(&["detect", "--input", input.to_str().unwrap(), "--format", "vector_csv", "--out-dir",
        tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("degenerate"));
}

#[test]
fn validation_errors_exit_2_and_name_the_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"dim": 2, "kind": "adjacency", "matrices": [[0, 1, 2, 0]]}"#).unwrap();
    let missing = tmp.path().join("missing.csv");
    let cases: Vec<(Vec<&str>, &str)> = vec![
        (vec!["detect", "--input", bad.to_str().unwrap(), "--format", "matrix_json"], "(2, 1)"),
        (vec!["detect", "--input", missing.to_str().unwrap(), "--format", "vector_csv"], "missing.csv"),
        (vec!["detect", "--input", missing.to_str().unwrap(), "--format", "parquet"], "--format"),
        (vec!["detect", "--input", missing.to_str().unwrap(), "--format", "vector_csv", "--c", "0.7"], "--c"),
        (vec!["simulate", "--family", "erdos_renyi", "--param-grid", "0"], "--family"),
        (vec!["simulate", "--family", "wasserstein_location", "--param-grid", "0", "--runs", "0"], "--runs"),
        (vec!["simulate", "--family", "wasserstein_location", "--param-grid", "9"], "--param-grid"),
    ];
    for (args, needle) in cases {
        let out = cli(&args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn simulate_writes_one_row_per_grid_value_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let dir = tmp.path().join(name);
        let out = cli(&[
            "simulate", "--family", "wasserstein_location", "--param-grid", "0:1:0.25", "--runs", "10",
            "--method", "asymptotic", "--replicates", "1000", "--seed", "5", "--out-dir", dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        dir_contents(&dir)
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let csv = String::from_utf8(a.iter().find(|f| f.0 == "study.csv").unwrap().1.clone()).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "param,power,mae,runs");
    assert_eq!(rows.len(), 6);
    let params: Vec<f64> = rows[1..].iter().map(|r| r.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(params, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
}
