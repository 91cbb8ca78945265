//! End-to-end tests of the `ness-lab` binary: run, plot, check, exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ness-lab"))
}

fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(
        &path,
        r#"
[drive]
epsilon_grid = [0.5, 2.0, 8.0]
sigma_list = [1.5]
seeds = [1]

[outputs]
detail_epsilons = [2.0]
"#,
    )
    .unwrap();
    path
}

#[test]
fn run_plot_cycle_produces_datasets_and_figures() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("out");

    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--workers", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["ness.csv", "manifest.toml", "tinf_vs_sigma.csv"] {
        assert!(out.join(name).exists(), "{name} missing");
    }

    let status = bin().arg("plot").arg("--in").arg(&out).status().unwrap();
    assert!(status.success());
    assert!(out.join("populations.svg").exists());
    assert!(out.join("tsys_vs_eps.svg").exists());
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for (out, workers) in [(&out1, "1"), (&out2, "4")] {
        let status = bin()
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(out)
            .args(["--workers", workers])
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(out1.join("ness.csv")).unwrap();
    let b = std::fs::read(out2.join("ness.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn picture_subset_and_seed_base_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_config(dir.path());
    let out = dir.path().join("out");
    let status = bin()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--pictures", "stochastic", "--seed-base", "7", "--workers", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(out.join("ness.csv")).unwrap();
    assert!(!text.contains("quantum"));
    // seed column reflects the base offset
    assert!(text.contains("\n"), "has rows");
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("seed_base = 7"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[drive]\nsigma_list = []\n").unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&bad)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    let status = bin()
        .args(["run", "--config"])
        .arg(&missing)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn plot_schema_error_names_column_and_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("populations.csv"),
        "picture,sigma,seed\nstochastic,1.0,1\n",
    )
    .unwrap();
    let output = bin().arg("plot").arg("--in").arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("epsilon"), "stderr: {stderr}");
}

#[test]
fn plot_on_empty_directory_succeeds_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin().arg("plot").arg("--in").arg(dir.path()).output().unwrap();
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("warning"), "stderr: {stderr}");
}

#[test]
fn check_subcommand_passes() {
    let output = bin().arg("check").output().unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(output.status.success(), "stdout: {stdout}");
    assert!(stdout.contains("PASS"));
    assert!(!stdout.contains("FAIL"), "stdout: {stdout}");
}
