use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn pulse(args: &[&str], config: &Path, out: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pulse"));
    cmd.args(args).arg("--config").arg(config).arg("--out").arg(out);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("tier = \"ode-truncated\"\n[params]\ntau = 0.17\nd = 1.0\ndelta0 = 0.001\n{body}"))
        .unwrap();
    path
}

fn report(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("report.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(rows: &[(String, String)], key: &str) -> f64 {
    rows.iter().find(|(k, _)| k == key).unwrap_or_else(|| panic!("no {key}")).1.parse().unwrap()
}

#[test]
fn analyze_reports_closed_forms() {
    let dir = scratch("analyze");
    let cfg = write_config(&dir, "");
    let out = pulse(&["analyze"], &cfg, &dir.join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = report(&dir.join("out"));
    assert!((value(&rows, "h_star") - 6.2146081).abs() < 5e-8);
    assert!((value(&rows, "tau_c") - 0.1767767).abs() < 5e-8);
    assert!((value(&rows, "tau_d") - 0.1742259).abs() < 5e-8);
    assert!((value(&rows, "tau_h") - 0.1793274).abs() < 5e-8);
    assert!((value(&rows, "tp_h") - 7.352897).abs() < 5e-6);
    assert!(dir.join("out/resolved_config.toml").exists());
}

#[test]
fn simulate_below_drift_threshold_travels() {
    let dir = scratch("simulate");
    let cfg = write_config(&dir, "[initial]\nkind = \"standing\"\nkick = 0.1\n[integrator]\nt_end = 1500.0\n");
    let out = pulse(&["simulate", "--svg"], &cfg, &dir.join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("TP+"), "{summary}");
    let traj = fs::read_to_string(dir.join("out/trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,l1,l2,r1,r2,h\n"));
    assert!(dir.join("out/trajectory.svg").exists());
}

#[test]
fn small_phase_diagram_has_every_cell() {
    let dir = scratch("phase");
    let cfg = write_config(
        &dir,
        "[sweep]\nd0_min = 10.0\nd0_max = 70.0\nd0_n = 4\neps0_min = -0.008\neps0_max = 0.008\neps0_n = 4\n",
    );
    let out = pulse(&["phase-diagram", "--jobs", "2"], &cfg, &dir.join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let phase = fs::read_to_string(dir.join("out/phase.csv")).unwrap();
    let mut lines = phase.lines();
    assert_eq!(lines.next(), Some("d0,eps0,label"));
    assert_eq!(lines.count(), 16);
    assert!(fs::read_to_string(dir.join("out/boundaries.csv")).unwrap().starts_with("d0,eps_star,kind"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = scratch("determinism");
    let cfg = write_config(
        &dir,
        "[sweep]\nd0_min = 10.0\nd0_max = 70.0\nd0_n = 3\neps0_min = -0.008\neps0_max = 0.008\neps0_n = 5\n",
    );
    for (jobs, sub) in [("1", "a"), ("4", "b")] {
        let out = pulse(&["phase-diagram", "--jobs", jobs], &cfg, &dir.join(sub), &[]);
        assert!(out.status.success());
    }
    for f in ["phase.csv", "boundaries.csv"] {
        assert_eq!(fs::read(dir.join("a").join(f)).unwrap(), fs::read(dir.join("b").join(f)).unwrap(), "{f}");
    }
}

#[test]
fn trap_config_classifies_trapped() {
    let dir = scratch("trap");
    let cfg = write_config(
        &dir,
        "[heterogeneity]\nkind = \"square-well\"\neps1 = 0.0048\neps2 = -0.008\nd0 = 20.0\nd1 = 10.0\n[trap]\nhorizon = 2000.0\n",
    );
    let out = pulse(&["classify"], &cfg, &dir.join("out"), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "trapped");
}

#[test]
fn env_override_changes_the_run() {
    let dir = scratch("env");
    let cfg = write_config(&dir, "");
    let out = pulse(&["analyze"], &cfg, &dir.join("out"), &[("PULSE_PARAMS__TAU", "0.182")]);
    assert!(out.status.success());
    let rows = report(&dir.join("out"));
    assert_eq!(value(&rows, "tau"), 0.182);
    assert!(rows.iter().all(|(k, _)| k != "tp_h"));
}

#[test]
fn errors_carry_a_kind() {
    let dir = scratch("errors");
    let missing = dir.join("missing.toml");
    fs::write(&missing, "[params]\nd = 1.0\n").unwrap();
    let out = pulse(&["analyze"], &missing, &dir.join("out"), &[]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("missing-parameter") && err.contains("tau"), "{err}");

    let typo = dir.join("typo.toml");
    fs::write(&typo, "[params]\ntau = 0.17\nd = 1.0\ntua = 1.0\n").unwrap();
    let err = String::from_utf8(pulse(&["analyze"], &typo, &dir.join("out"), &[]).stderr).unwrap();
    assert!(err.contains("unknown-key") && err.contains("tua") && err.contains("line 4"), "{err}");
}
