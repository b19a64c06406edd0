//! End-to-end runs of the binary: exit codes, emitted files, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mixform"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path
}

fn run(cmd: &str, cfg: &Path, outdir: &Path, seed: u64) -> std::process::Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(outdir)
        .arg("--seed")
        .arg(seed.to_string())
        .output()
        .unwrap()
}

#[test]
fn help_lists_all_subcommands() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in [
        "check-geometry",
        "verify-spectral",
        "solve-elliptic",
        "solve-parabolic",
        "study-convergence",
    ] {
        assert!(text.contains(cmd), "--help misses {cmd}");
    }
}

#[test]
fn missing_config_file_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(
        "check-geometry",
        &tmp.path().join("nope.cfg"),
        &tmp.path().join("out"),
        0,
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_fails_closed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\natlas = HALF_PLATE_UNFOLDING\nsmaples = 10\n",
    );
    let out = run("check-geometry", &cfg, &tmp.path().join("out"), 0);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("CONFIG_ERROR"), "stderr: {err}");
}

#[test]
fn missing_schema_line_fails_closed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "atlas = HALF_PLATE_UNFOLDING\n");
    let out = run("check-geometry", &cfg, &tmp.path().join("out"), 0);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn geometry_run_reports_all_pass() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\natlas = HALF_PLATE_UNFOLDING\nsamples = 200\n",
    );
    let outdir = tmp.path().join("out");
    let out = run("check-geometry", &cfg, &outdir, 0);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(outdir.join("chart_report.csv")).unwrap();
    assert!(report.starts_with("chart_id,check,max_deviation,pass\n"));
    assert!(report.contains("det_modulus"));
    assert!(!report.contains("false"));
    assert!(outdir.join("manifest.txt").exists());
}

#[test]
fn spectral_run_passes_and_caches_eigendata() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\npreset = HALF_CUBE_NEUMANN_PLATE\nlevel = 0\n\
         nodes = 64\nvectors = 3\n",
    );
    let outdir = tmp.path().join("out");
    let out = run("verify-spectral", &cfg, &outdir, 3);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(outdir.join("spectral_report.csv")).unwrap();
    assert!(report.contains("scalar_half_power"));
    assert!(report.contains("half_power_agreement"));
    assert!(report.contains("kernel_min_entry"));
    let eigendata = fs::read_to_string(outdir.join("eigendata.txt")).unwrap();
    assert!(eigendata.starts_with("eigendata-v1\n"));
}

#[test]
fn elliptic_run_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\npreset = UNIT_SQUARE_MIXED\nlevel = 0\n\
         nonlinearity = EXPONENTIAL\nload = SINE\n",
    );
    let mut bodies = Vec::new();
    for tag in ["a", "b"] {
        let outdir = tmp.path().join(format!("out_{tag}"));
        let out = run("solve-elliptic", &cfg, &outdir, 7);
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let report = fs::read(outdir.join("elliptic_report.csv")).unwrap();
        let solution = fs::read(outdir.join("solution.csv")).unwrap();
        bodies.push((report, solution));
    }
    assert_eq!(bodies[0], bodies[1], "report bodies must be byte-identical");
}

#[test]
fn unconverged_solve_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\npreset = UNIT_SQUARE_MIXED\nlevel = 0\n\
         nonlinearity = EXPONENTIAL\nmethod = FIXED_POINT\nmax_iter = 1\n",
    );
    let out = run("solve-elliptic", &cfg, &tmp.path().join("out"), 0);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parabolic_run_emits_final_state() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\npreset = HALF_CUBE_NEUMANN_PLATE\nlevel = 0\n\
         nonlinearity = FERMI_DIRAC_HALF\nt1 = 0.25\nsteps = 8\ninitial = BUMP\nsource = ONE\n",
    );
    let outdir = tmp.path().join("out");
    let out = run("solve-parabolic", &cfg, &outdir, 0);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let body = fs::read_to_string(outdir.join("final_state.csv")).unwrap();
    assert!(body.starts_with("dof,value\n"));
    assert!(body.lines().count() > 10);
}

#[test]
fn transform_study_decreases() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\nstudy = TRANSFORM\nbase_level = 0\nlevels = 2\n",
    );
    let outdir = tmp.path().join("out");
    let out = run("study-convergence", &cfg, &outdir, 0);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(outdir.join("study_report.csv")).unwrap();
    assert!(report.contains("transform_gap_decrease"));
}

#[test]
fn riesz_identity_via_cli() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "schema = mixform-config-v1\nstudy = RIESZ\npreset = HALF_CUBE_HALF_PLATE\n\
         q = 2\nbase_level = 0\nlevels = 2\nstarts = 3\n",
    );
    let outdir = tmp.path().join("out");
    let out = run("study-convergence", &cfg, &outdir, 1);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = fs::read_to_string(outdir.join("study_report.csv")).unwrap();
    assert!(report.contains("riesz_identity"));
    assert!(report.contains("riesz_growth"));
}
