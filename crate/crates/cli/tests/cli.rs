use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use nlca::volume::load_raw_with_sidecar;

fn nlca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlca"))
        .args(args)
        .output()
        .expect("spawn nlca")
}

fn ok(args: &[&str]) -> String {
    let out = nlca(args);
    assert!(
        out.status.success(),
        "nlca {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn phantom(dir: &Path, kind: &str, dims: &str) -> PathBuf {
    let p = dir.join(format!("{kind}.raw"));
    ok(&["phantom", "--kind", kind, "--dims", dims, "--output", s(&p)]);
    p
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "brain", "24,24,24");
    let noisy = dir.path().join("noisy.raw");
    let clean = dir.path().join("clean.raw");
    let resid = dir.path().join("resid.raw");

    let added: serde_json::Value =
        serde_json::from_str(&ok(&["add-noise", "--input", s(&truth), "--output", s(&noisy), "--percent", "10", "--seed", "5"])).unwrap();
    assert_eq!(added["sigma_n"], 25.5);

    let est: serde_json::Value = serde_json::from_str(&ok(&["estimate", "--input", s(&noisy)])).unwrap();
    for key in ["sigma_hat", "theta_hat", "sigma_n_hat", "iterations"] {
        assert!(est.get(key).is_some(), "missing {key}");
    }

    let summary: serde_json::Value = serde_json::from_str(&ok(&[
        "denoise", "--input", s(&noisy), "--output", s(&clean), "--filter", "nlca", "--sigma", "25.5", "--residual", s(&resid),
    ]))
    .unwrap();
    assert_eq!(summary["patch_radius"], 1);
    assert_eq!(summary["search_radius"], 5);
    assert_eq!(summary["c1"], 0.9);
    assert_eq!(summary["c2"], 0.5);

    let (n, _) = load_raw_with_sidecar(&noisy).unwrap();
    let (c, _) = load_raw_with_sidecar(&clean).unwrap();
    let (r, _) = load_raw_with_sidecar(&resid).unwrap();
    for i in 0..n.len() {
        assert_eq!(r.data()[i], n.data()[i] - c.data()[i]);
    }

    let before: serde_json::Value =
        serde_json::from_str(&ok(&["metrics", "--reference", s(&truth), "--input", s(&noisy)])).unwrap();
    let after: serde_json::Value =
        serde_json::from_str(&ok(&["metrics", "--reference", s(&truth), "--input", s(&clean)])).unwrap();
    assert!(after["rmse"].as_f64().unwrap() < before["rmse"].as_f64().unwrap());
    assert_eq!(after["voxel_count"], 24 * 24 * 24);
    assert_eq!(after["c1_const"], 6.5025);
}

#[test]
fn denoise_auto_sigma_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "brain", "20,20,20");
    let noisy = dir.path().join("noisy.raw");
    ok(&["add-noise", "--input", s(&truth), "--output", s(&noisy), "--percent", "10"]);
    let out = dir.path().join("ca.raw");
    let summary: serde_json::Value =
        serde_json::from_str(&ok(&["denoise", "--input", s(&noisy), "--output", s(&out), "--filter", "ca"])).unwrap();
    assert_eq!(summary["sigma_n"], summary["estimate"]["sigma_n_hat"]);
}

#[test]
fn unknown_filter_lists_supported() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "two-region", "8,8,8");
    let out = nlca(&["denoise", "--input", s(&truth), "--output", s(&dir.path().join("o.raw")), "--filter", "nlm"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("nlm") && err.contains("ca, nlca"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_percent_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "two-region", "8,8,8");
    let out = nlca(&["add-noise", "--input", s(&truth), "--output", s(&dir.path().join("o.raw")), "--percent", "0"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad percent"));
}

#[test]
fn missing_input_fails_cleanly() {
    let out = nlca(&["estimate", "--input", "/nonexistent/volume.raw"]);
    assert!(!out.status.success());
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn benchmark_csv() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "two-region", "12,10,10");
    let csv_path = dir.path().join("bench.csv");
    ok(&["benchmark", "--input", s(&truth), "--output", s(&csv_path), "--filter", "ca,nlca", "--search-radius", "2"]);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "filter,noise_pct,rmse,ssim,seed,sigma_policy,elapsed_ms");
    assert_eq!(lines.len(), 1 + 12);
    assert!(lines[1].starts_with("noisy,5,"));
    assert!(lines[1].ends_with(",42,exact,0"));

    // CSV to standard output, estimated sigma, two repeats.
    let stdout = ok(&[
        "benchmark", "--input", s(&truth), "--filter", "ca", "--levels", "10", "--repeats", "2", "--sigma-policy", "estimated",
    ]);
    let rows: Vec<&str> = stdout.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(",estimated,")));
}

#[test]
fn benchmark_errors_stay_out_of_csv() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "two-region", "8,8,8");
    let csv_path = dir.path().join("bench.csv");
    let out = nlca(&["benchmark", "--input", s(&truth), "--output", s(&csv_path), "--levels", "5,150"]);
    assert!(!out.status.success());
    assert!(!csv_path.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad percent"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "brain", "16,16,16");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"input": "{}", "filter": "ca", "sigma": 10, "patch-radius": 2, "c1": 0.8}}"#,
            s(&truth)
        ),
    )
    .unwrap();
    let out = dir.path().join("o.raw");
    let summary: serde_json::Value = serde_json::from_str(&ok(&[
        "--config", s(&cfg), "denoise", "--output", s(&out), "--patch-radius", "1",
    ]))
    .unwrap();
    assert_eq!(summary["filter"], "ca");
    assert_eq!(summary["sigma_n"], 10.0);
    assert_eq!(summary["patch_radius"], 1);
    assert_eq!(summary["c1"], 0.8);

    std::fs::write(&cfg, r#"{"patch_radius": 2}"#).unwrap();
    let bad = nlca(&["--config", s(&cfg), "estimate", "--input", s(&truth)]);
    assert!(!bad.status.success());
}

#[test]
fn crop_and_dtype() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "brain", "16,16,16");
    let out = dir.path().join("u8.raw");
    ok(&[
        "add-noise", "--input", s(&truth), "--output", s(&out), "--percent", "5", "--crop", "2,2,2,8,6,4", "--dtype", "u8",
    ]);
    let (v, h) = load_raw_with_sidecar(&out).unwrap();
    assert_eq!(v.dims(), [8, 6, 4]);
    assert_eq!(h.sample_type.as_str(), "u8");
    assert_eq!(std::fs::metadata(&out).unwrap().len(), 8 * 6 * 4);
}

#[test]
fn add_noise_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let truth = phantom(dir.path(), "brain", "16,16,16");
    let a = dir.path().join("a.raw");
    let b = dir.path().join("b.raw");
    ok(&["add-noise", "--input", s(&truth), "--output", s(&a), "--percent", "15", "--seed", "9"]);
    ok(&["--threads", "1", "add-noise", "--input", s(&truth), "--output", s(&b), "--percent", "15", "--seed", "9"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
