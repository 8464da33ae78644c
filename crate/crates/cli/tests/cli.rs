use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn simulate(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(args)
        .current_dir(cwd)
        .env_remove("XXBATH_CACHE_DIR")
        .output()
        .unwrap()
}

#[test]
fn lists_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&["--list-presets"], dir.path());
    assert!(out.status.success());
    let names = String::from_utf8(out.stdout).unwrap();
    assert_eq!(names.lines().count(), 15);
    assert!(names.lines().any(|l| l == "fig9"));
}

#[test]
fn preset_writes_csv_with_expected_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(&["fig1a", "--out", "run", "--gt-max", "1"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("run/fig1a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("gt,sx,sy,sz,purity"));
    // gt in [0, 1] at dt = 0.005
    assert_eq!(lines.count(), 201);
}

#[test]
fn verify_writes_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    fs::write(
        &config,
        "experiment = \"decoherence\"\n[model]\nn = 6\nh = 1.0\nj_over_h = -1.2\n[integrate]\ngt_max = 2.0\nstride = 100\n",
    )
    .unwrap();
    let out = simulate(&["small.toml", "--verify", "--out", "v"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("v/verify.txt")).unwrap();
    assert!(report.contains("PASS"), "{report}");
    assert!(dir.path().join("v/small.csv").exists());
    assert!(dir.path().join("v/summary.csv").exists());
}

#[test]
fn usage_errors_exit_1_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "experiment = \"decoherence\"\n[model]\nn = 5\nh = 1.0\n").unwrap();
    let out = simulate(&["bad.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("model.n"));

    assert_eq!(simulate(&["no-such-preset"], dir.path()).status.code(), Some(1));
    assert_eq!(simulate(&["fig4", "--threads", "0"], dir.path()).status.code(), Some(1));
    assert_eq!(simulate(&["fig4", "--bogus"], dir.path()).status.code(), Some(1));
}

#[test]
fn resource_limits_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("big.toml"),
        "experiment = \"rabi\"\n[model]\nn = 14\nj = 0.5\nh = 1.0\n[initial]\nkind = \"coherent\"\nz = 1.0\n",
    )
    .unwrap();
    assert_eq!(simulate(&["big.toml"], dir.path()).status.code(), Some(3));

    // output directory blocked by a regular file
    fs::write(dir.path().join("blocked"), "").unwrap();
    let out = simulate(&["fig1a", "--gt-max", "0.1", "--out", "blocked/sub"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}
