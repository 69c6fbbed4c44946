//! Exercise the binary end to end: exit codes, artifact layout, and
//! run-to-run determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_alstm")
}

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("alstm_cli_{tag}_{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_tiny_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

const TINY: &str = "
[dataset]
kind = mackey_glass
n_points = 220
transient = 100
n_train = 160

[window]
n_samples = 5
stride = 6
horizon = 1

[model]
n_h = 4
d_fx = 4
d_z = 2
d_fz = 4
beta = 1e-6

[training]
epochs = 50
batch_size = 16
seed = 9

[output]
dir = PLACEHOLDER
";

#[test]
fn generate_is_byte_deterministic() {
    let dir = temp_dir("gen");
    let config = write_tiny_config(&dir, "tiny.cfg", TINY);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    for out in [&out_a, &out_b] {
        let output = run(&[
            "generate",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    let a = fs::read(out_a.join("series.csv")).unwrap();
    let b = fs::read(out_b.join("series.csv")).unwrap();
    assert_eq!(a, b);
    fs::remove_dir_all(dir).ok();
}

#[test]
fn bad_delay_ratio_exits_with_config_error() {
    let dir = temp_dir("badcfg");
    let config = write_tiny_config(&dir, "bad.cfg", &TINY.replace("kind = mackey_glass", "kind = mackey_glass\ndelta = 17.05"));
    let output = run(&["generate", "--config", config.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2), "{}", String::from_utf8_lossy(&output.stderr));
    assert!(String::from_utf8_lossy(&output.stderr).contains("config"));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn csv_dataset_cannot_be_generated() {
    let dir = temp_dir("gencsv");
    let body = "
[dataset]
kind = csv
path = data/power_fixture.csv
n_train = 100

[window]
n_samples = 2
stride = 1
horizon = 1
";
    let config = write_tiny_config(&dir, "csv.cfg", body);
    let output = run(&["generate", "--config", config.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn horizon_mismatch_fails_before_training() {
    let dir = temp_dir("hmis");
    let config = write_tiny_config(
        &dir,
        "mismatch.cfg",
        &TINY.replace("beta = 1e-6", "beta = 1e-6\nhorizon = 5"),
    );
    let started = Instant::now();
    let output = run(&["train", "--config", config.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("horizon"));
    // Rejected at config time, not after a training run.
    assert!(started.elapsed().as_secs() < 5);
    fs::remove_dir_all(dir).ok();
}

#[test]
fn train_smoke_completes_quickly_and_deterministically() {
    let dir = temp_dir("train");
    let config = write_tiny_config(&dir, "tiny.cfg", TINY);
    let out_a = dir.join("a");
    let out_b = dir.join("b");
    let started = Instant::now();
    for out in [&out_a, &out_b] {
        let output = run(&[
            "train",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    }
    assert!(started.elapsed().as_secs() < 30, "two tiny runs should finish fast");
    let a = fs::read(out_a.join("model.txt")).unwrap();
    let b = fs::read(out_b.join("model.txt")).unwrap();
    assert_eq!(a, b, "same seed must produce identical model files");
    assert_eq!(
        fs::read(out_a.join("loss_history.csv")).unwrap(),
        fs::read(out_b.join("loss_history.csv")).unwrap()
    );

    // Evaluate the trained model; expect metrics and per-point predictions.
    let output = run(&[
        "evaluate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_a.to_str().unwrap(),
        "--inverse",
    ]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let metrics = fs::read_to_string(out_a.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("metric,step,value\n"));
    assert!(metrics.contains("rmse,0,"));
    let preds = fs::read_to_string(out_a.join("predictions.csv")).unwrap();
    assert!(preds.starts_with("index,target,prediction,low,high,target_raw,prediction_raw\n"));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn evaluate_rejects_model_with_wrong_horizon() {
    let dir = temp_dir("evalmis");
    let config = write_tiny_config(&dir, "tiny.cfg", TINY);
    let out = dir.join("o");
    let output = run(&["train", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    // Same data, but the evaluation config asks for 2-step windows.
    let config2 = write_tiny_config(
        &dir,
        "h2.cfg",
        &TINY.replace("horizon = 1", "horizon = 2"),
    );
    let output = run(&[
        "evaluate",
        "--config",
        config2.to_str().unwrap(),
        "--model",
        out.join("model.txt").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn multi_step_evaluate_emits_per_step_rows() {
    let dir = temp_dir("h5");
    let body = TINY
        .replace("horizon = 1", "horizon = 5")
        .replace("n_samples = 5", "n_samples = 6")
        .replace("epochs = 50", "epochs = 10");
    let config = write_tiny_config(&dir, "h5.cfg", &body);
    let out = dir.join("o");
    let output = run(&["train", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let output = run(&["evaluate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let metrics = fs::read_to_string(out.join("metrics.csv")).unwrap();
    for step in 1..=5 {
        assert!(metrics.contains(&format!("per_step_rmse,{step},")));
    }
    fs::remove_dir_all(dir).ok();
}

#[test]
fn unknown_bench_suite_rejected() {
    let output = run(&["bench", "nosuch"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn missing_config_file_rejected() {
    let output = run(&["train", "--config", "/nonexistent/alstm.cfg"]);
    assert_eq!(output.status.code(), Some(2));
}
