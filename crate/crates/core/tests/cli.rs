//! The `gyropic run` command end to end.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gyropic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gyropic")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn single_cell_sweep_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "family = \"single_particle_with_e\"\nepsilon_list = [1.0]\ndt_list = [0.05]\norders = [2]\nt_final = 0.5\n",
    );
    let out = dir.path().join("out");
    let res = gyropic(&["run", &cfg, "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let csv = fs::read_to_string(out.join("errors.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], gyropic::harness::ERRORS_HEADER);
    assert!(lines[1].starts_with("single_particle_with_e,2,1,0.05,") && lines[1].ends_with(",ok"), "{}", lines[1]);
    assert!(out.join("run.log").exists());
}

#[test]
fn command_line_overrides_replace_lists() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = \"single_particle_no_e\"\nt_final = 0.2\n");
    let out = dir.path().join("out");
    let res = gyropic(&[
        "run", &cfg, "--epsilon", "0.5", "--dt", "0.02", "--order", "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("errors.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("single_particle_no_e,1,0.5,0.02,"), "{}", rows[0]);
}

#[test]
fn zero_horizon_vlasov_run_writes_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "family = \"vlasov_poisson\"\nn_particles = 200\nnx = 17\nt_final = 0.0\n",
    );
    let out = dir.path().join("vp");
    let res = gyropic(&["run", &cfg, "--out", out.to_str().unwrap(), "--seed", "4"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let ts = fs::read_to_string(out.join("timeseries.csv")).unwrap();
    assert_eq!(ts.lines().count(), 2);
    assert!(ts.lines().nth(1).unwrap().starts_with("0,"));
    let snapshot = fs::read_to_string(out.join("density_t0.txt")).unwrap();
    assert_eq!(snapshot.lines().next().unwrap(), "17 17 6 0");
    assert_eq!(snapshot.lines().count(), 1 + 17);
    let particles = fs::read_to_string(out.join("particles_t0.csv")).unwrap();
    assert_eq!(particles.lines().count(), 1 + 200);
}

#[test]
fn invalid_values_are_reported_with_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = \"single_particle_no_e\"\n\nepsilon_list = [0.1, 0.0]\n");
    let res = gyropic(&["run", &cfg]);
    assert!(!res.status.success());
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("line 3") && stderr.contains("epsilon"), "{stderr}");
}

#[test]
fn unknown_keys_and_missing_files_fail() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = \"vlasov_poisson\"\nspeed = 3\n");
    let res = gyropic(&["run", &cfg]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("speed"));

    let res = gyropic(&["run", dir.path().join("absent.toml").to_str().unwrap()]);
    assert!(!res.status.success());
}

#[test]
fn bad_order_flag_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "family = \"single_particle_no_e\"\n");
    let res = gyropic(&["run", &cfg, "--order", "4", "--out", dir.path().join("o").to_str().unwrap()]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("--order"));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            gyropic::harness::parse_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert_eq!(n, 3);
}
