use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn eegband(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eegband"))
        .args(args)
        .output()
        .expect("spawn eegband")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Small surrogate corpus written through the CLI itself.
fn corpus(dir: &Path, per_class: &str) -> std::path::PathBuf {
    let o = eegband(&["synthetic", "--per-class", per_class, "--out-dir", s(dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("manifest.csv")
}

#[test]
fn missing_input_is_exit_2_and_names_path() {
    let o = eegband(&["decompose", "/no/such/file.txt"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/file.txt"));
}

#[test]
fn zero_levels_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "1");
    let o = eegband(&["decompose", s(&m.with_file_name("Z001.txt")), "--levels", "0"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn empty_file_is_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("empty.txt");
    fs::write(&f, "").unwrap();
    let o = eegband(&["periodogram", s(&f), "--out-dir", s(tmp.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_label_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "1");
    fs::write(&m, "path,label\nZ001.txt,normal\nS001.txt,ictal\n").unwrap();
    let o = eegband(&["features", s(&m), "--out-dir", s(&tmp.path().join("f"))]);
    assert_ne!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ictal"));
}

#[test]
fn decompose_writes_bands_and_small_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "1");
    let out = tmp.path().join("dec");
    let o = eegband(&["decompose", s(&m.with_file_name("S001.txt")), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for band in ["delta", "theta", "alpha", "beta", "gamma"] {
        let text = fs::read_to_string(out.join(format!("S001_{band}.csv"))).unwrap();
        assert_eq!(text.lines().count(), 4097 + 1);
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("S001_decomposition.json")).unwrap()).unwrap();
    assert_eq!(meta["level_lengths"], serde_json::json!([2052, 1029, 518, 262]));
    assert!(meta["residual"]["relative_error"].as_f64().unwrap() <= 1e-8);
    assert!(meta["residual"]["subband_sum_relative_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn periodogram_two_inputs_with_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "1");
    let out = tmp.path().join("p");
    let o = eegband(&[
        "periodogram",
        s(&m.with_file_name("Z001.txt")),
        s(&m.with_file_name("S001.txt")),
        "--slope",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for id in ["Z001", "S001"] {
        let csv = fs::read_to_string(out.join(format!("{id}_periodogram.csv"))).unwrap();
        assert_eq!(csv.lines().count(), 2048 + 1);
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join(format!("{id}_periodogram.json"))).unwrap())
                .unwrap();
        assert!(meta["slope"]["log_log_slope"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn features_one_row_per_segment() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "3");
    let out = tmp.path().join("f");
    let o = eegband(&["features", s(&m), "--band", "all", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for band in ["delta", "theta", "alpha", "beta", "gamma"] {
        let text = fs::read_to_string(out.join(format!("features_{band}.csv"))).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "source_id,label,min,max,mean,median,mode,std");
        assert_eq!(lines.count(), 6);
    }
}

#[test]
fn band_needs_four_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "1");
    let o = eegband(&["features", s(&m), "--levels", "3", "--out-dir", s(tmp.path())]);
    assert_eq!(code(&o), 2);
    let o = eegband(&["features", s(&m), "--levels", "3", "--band", "raw", "--out-dir", s(tmp.path())]);
    assert_eq!(code(&o), 0);
}

#[test]
fn train_eval_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &str, seed: &str| {
        let out = tmp.path().join(dir);
        let o = eegband(&[
            "train-eval", "--synthetic", "--per-class", "10", "--epochs", "200", "--seed", seed,
            "--out-dir", s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (
            fs::read(out.join("model.json")).unwrap(),
            fs::read(out.join("report.json")).unwrap(),
        )
    };
    let a = run("a", "7");
    let b = run("b", "7");
    let c = run("c", "8");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);

    let report: serde_json::Value = serde_json::from_slice(&a.1).unwrap();
    assert_eq!(report["test_size"], 10);
    assert_eq!(report["seed"], 7);
    let acc = report["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn train_eval_from_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus(&tmp.path().join("data"), "6");
    let out = tmp.path().join("t");
    let o = eegband(&["train-eval", s(&m), "--epochs", "300", "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("held-out accuracy"));
    assert!(out.join("model.json").exists());
}

#[test]
fn train_eval_needs_input() {
    assert_eq!(code(&eegband(&["train-eval"])), 2);
}
