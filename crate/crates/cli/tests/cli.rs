//! End-to-end tests of the binary: exit codes, determinism, and the
//! artifact contract.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn tide() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tide"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("tide_cli_tests")
        .join(format!("{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout(out),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn manifest_hashes(dir: &Path) -> Vec<(String, String)> {
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap())
            .unwrap();
    manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| {
            (
                a["name"].as_str().unwrap().to_string(),
                a["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn calibrate_reference_constants() {
    let dir = tmp_dir("cal");
    let out = tide()
        .args(["calibrate", "--eps", "0.5", "--delta", "0.238", "--m", "1", "--k-radius", "1"])
        .arg("--out")
        .arg(dir.join("a"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let text = stdout(&out);
    let lambda: f64 = text
        .lines()
        .find(|l| l.starts_with("lambda = "))
        .and_then(|l| l.trim_start_matches("lambda = ").parse().ok())
        .expect("lambda line");
    assert!((lambda - 1.0).abs() < 0.01, "{lambda}");

    let out = tide()
        .args(["calibrate", "--eps", "0.74", "--delta", "0.180", "--m", "1", "--k-radius", "1"])
        .arg("--out")
        .arg(dir.join("b"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let lambda: f64 = stdout(&out)
        .lines()
        .find(|l| l.starts_with("lambda = "))
        .and_then(|l| l.trim_start_matches("lambda = ").parse().ok())
        .unwrap();
    assert!((lambda - 1.0).abs() < 0.01, "{lambda}");
}

#[test]
fn calibrate_vacuous_budget_is_usage_error() {
    let dir = tmp_dir("calbad");
    let out = tide()
        .args(["calibrate", "--eps", "0.5", "--delta", "1.5", "--m", "1", "--k-radius", "1"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn missing_required_flag_is_usage_error() {
    let dir = tmp_dir("benchbad");
    let out = tide()
        .args(["bench-synthetic", "--rho", "0", "--n", "100", "--repeats", "1"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_exit(&out, 2);
}

#[test]
fn corrupted_csv_is_io_error_with_location() {
    let dir = tmp_dir("corrupt");
    let csv = dir.join("broken.csv");
    std::fs::write(&csv, "s0,x0\n1.0,2.0\n1.0,oops\n").unwrap();
    let out = tide()
        .args(["train", "--kind", "synthetic-csv", "--epochs", "5", "--batch", "4", "--seed", "1"])
        .arg("--input")
        .arg(&csv)
        .arg("--out")
        .arg(dir.join("model"))
        .output()
        .unwrap();
    assert_exit(&out, 4);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 3"), "diagnostic missing row: {err}");
    assert!(err.contains("column 2"), "diagnostic missing column: {err}");
}

#[test]
fn gen_synthetic_replays_byte_identically() {
    let dir = tmp_dir("replay");
    for sub in ["one", "two"] {
        let out = tide()
            .args(["gen-synthetic", "--d", "1", "--rho", "0.2", "--n", "60", "--seed", "42"])
            .arg("--out")
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    let a = std::fs::read(dir.join("one/data.csv")).unwrap();
    let b = std::fs::read(dir.join("two/data.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(manifest_hashes(&dir.join("one")), manifest_hashes(&dir.join("two")));
}

#[test]
fn retrain_same_flags_same_model_hash() {
    let dir = tmp_dir("retrain");
    let gen = tide()
        .args(["gen-synthetic", "--d", "1", "--rho", "0.5", "--n", "400", "--seed", "5"])
        .arg("--out")
        .arg(dir.join("data"))
        .output()
        .unwrap();
    assert_exit(&gen, 0);
    for sub in ["m1", "m2"] {
        let out = tide()
            .args(["train", "--kind", "synthetic-csv", "--epochs", "40", "--batch", "128",
                   "--lr", "0.01", "--seed", "2"])
            .arg("--input")
            .arg(dir.join("data/data.csv"))
            .arg("--out")
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_exit(&out, 0);
    }
    let h1 = manifest_hashes(&dir.join("m1"));
    let h2 = manifest_hashes(&dir.join("m2"));
    assert_eq!(h1, h2, "model files differ between identical retrains");
}

#[test]
fn bench_synthetic_small_cell_is_deterministic() {
    let dir = tmp_dir("bench");
    for sub in ["one", "two"] {
        let out = tide()
            .args(["bench-synthetic", "--d", "1", "--rho", "0", "--n", "300",
                   "--repeats", "1", "--seed", "7"])
            .arg("--out")
            .arg(dir.join(sub))
            .output()
            .unwrap();
        assert_exit(&out, 0);
        let summary = stdout(&out);
        // one cell, three estimator rows plus header
        assert_eq!(summary.lines().count(), 4, "{summary}");
        for estimator in ["tide", "kde", "plugin"] {
            assert!(summary.contains(estimator), "{summary}");
        }
    }
    let a = std::fs::read(dir.join("one/bench_detail.csv")).unwrap();
    let b = std::fs::read(dir.join("two/bench_detail.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verify_suites_pass() {
    let out = tide()
        .args(["verify", "--suite", "egamma", "--seed", "3"])
        .output()
        .unwrap();
    assert_exit(&out, 0);
    assert!(stdout(&out).contains("all properties hold"));
}

#[test]
fn face_flow_infinite_eps_is_identity() {
    let dir = tmp_dir("faces");
    let gen = tide()
        .args(["gen-faces", "--n", "150", "--seed", "11"])
        .arg("--out")
        .arg(dir.join("corpus"))
        .output()
        .unwrap();
    assert_exit(&gen, 0);
    let train = tide()
        .args(["train", "--kind", "faces", "--patch", "16", "--pool", "2",
               "--m-bound", "3", "--epochs", "40", "--batch", "128", "--lr", "0.01", "--seed", "17"])
        .arg("--input")
        .arg(dir.join("corpus"))
        .arg("--out")
        .arg(dir.join("model"))
        .output()
        .unwrap();
    assert_exit(&train, 0);
    let source = dir.join("corpus/faces/0002.pgm");
    let out = tide()
        .args(["obfuscate-image", "--eps", "inf", "--delta", "0.9", "--lambda", "1", "--seed", "5"])
        .arg("--image")
        .arg(&source)
        .arg("--model")
        .arg(dir.join("model/model.json"))
        .arg("--out")
        .arg(dir.join("obf"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let original = std::fs::read(&source).unwrap();
    let obfuscated = std::fs::read(dir.join("obf/obfuscated.pgm")).unwrap();
    assert_eq!(original, obfuscated, "eps = inf must pass through bit-identically");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("obf/report.json")).unwrap())
            .unwrap();
    let leaking = report["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["leaking"].as_bool().unwrap())
        .count();
    assert_eq!(leaking, 0);
}

#[test]
fn obfuscate_with_tabular_model_is_shape_error() {
    let dir = tmp_dir("shape");
    let gen = tide()
        .args(["gen-synthetic", "--d", "1", "--rho", "0.2", "--n", "200", "--seed", "3"])
        .arg("--out")
        .arg(dir.join("data"))
        .output()
        .unwrap();
    assert_exit(&gen, 0);
    let train = tide()
        .args(["train", "--kind", "synthetic-csv", "--epochs", "10", "--batch", "64", "--seed", "2"])
        .arg("--input")
        .arg(dir.join("data/data.csv"))
        .arg("--out")
        .arg(dir.join("model"))
        .output()
        .unwrap();
    assert_exit(&train, 0);
    let faces = tide()
        .args(["gen-faces", "--n", "100", "--seed", "4"])
        .arg("--out")
        .arg(dir.join("faces"))
        .output()
        .unwrap();
    assert_exit(&faces, 0);
    let out = tide()
        .args(["obfuscate-image", "--eps", "0.5", "--lambda", "1", "--seed", "1"])
        .arg("--image")
        .arg(dir.join("faces/faces/0000.pgm"))
        .arg("--model")
        .arg(dir.join("model/model.json"))
        .arg("--out")
        .arg(dir.join("obf"))
        .output()
        .unwrap();
    assert_exit(&out, 5);
}

#[test]
fn docs_flow_scores_planted_term() {
    let dir = tmp_dir("docs");
    let gen = tide()
        .args(["gen-docs", "--n", "300", "--seed", "9"])
        .arg("--out")
        .arg(dir.join("corpus"))
        .output()
        .unwrap();
    assert_exit(&gen, 0);
    let train = tide()
        .args(["train", "--kind", "docs", "--vocab-size", "25",
               "--epochs", "120", "--batch", "128", "--lr", "0.01", "--seed", "3"])
        .arg("--input")
        .arg(dir.join("corpus/docs.tsv"))
        .arg("--out")
        .arg(dir.join("model"))
        .output()
        .unwrap();
    assert_exit(&train, 0);
    let out = tide()
        .args(["score-terms"])
        .arg("--docs")
        .arg(dir.join("corpus/docs.tsv"))
        .arg("--model")
        .arg(dir.join("model/model.json"))
        .arg("--vocab")
        .arg(dir.join("model/vocab.json"))
        .arg("--out")
        .arg(dir.join("scores"))
        .output()
        .unwrap();
    assert_exit(&out, 0);
    let csv = std::fs::read_to_string(dir.join("scores/term_scores.csv")).unwrap();
    assert!(csv.starts_with("rank,term,signed_score,attribute,max_abs_cond_density"));
    let alpha_rank = csv
        .lines()
        .skip(1)
        .position(|l| l.split(',').nth(1) == Some("alpha"))
        .expect("alpha in ranking")
        + 1;
    assert!(alpha_rank <= 5, "planted term ranked {alpha_rank}");
}

#[test]
fn locked_output_directory_is_rejected() {
    let dir = tmp_dir("lock");
    std::fs::create_dir_all(dir.join("run")).unwrap();
    std::fs::write(dir.join("run/.lock"), "").unwrap();
    let out = tide()
        .args(["gen-docs", "--n", "100", "--seed", "1"])
        .arg("--out")
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert_exit(&out, 4);
}
