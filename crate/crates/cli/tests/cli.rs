use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn lookahead(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lookahead"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Rows of a CSV file keyed by the first column.
fn column(csv: &str, row: &str, name: &str) -> String {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    let line = lines.find(|l| l.split(',').next() == Some(row)).unwrap();
    line.split(',').nth(idx).unwrap().to_string()
}

const SMALL_ENVELOPE: &str = "\
[grid]
d_min = 0
d_max = 200
eta_min_deg = -180
eta_max_deg = 180
n_d = 120
n_eta = 90

[limits]
speed = 50
r_min = 100

[profile]
type = constant
L0 = 50

[profile2]
type = variable
L_min = 50
L_max = 150
d_c = 30
";

#[test]
fn simulate_straight_line_preset() {
    let tmp = TempDir::new().unwrap();
    let out = lookahead(&[
        "simulate",
        "--preset",
        "straight_line_table2",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for label in ["constant", "variable"] {
        let traj = read(tmp.path(), &format!("trajectory_{label}.csv"));
        assert_eq!(
            traj.lines().next().unwrap(),
            "t,x,y,psi,d,eta,kappa,L0_eff,L1,eta_bar,region,a_d,V_lyap"
        );
        assert_eq!(traj.lines().count(), 6002);
        assert!(!traj.contains('\r'));
        let perf = read(tmp.path(), &format!("performance_{label}.csv"));
        assert_eq!(perf.lines().next().unwrap(), "t_s,J,Mp,T_far_measured,T_far_bound");
        assert!(read(tmp.path(), &format!("performance_{label}.txt")).starts_with("t_s="));
    }
    let summary = read(tmp.path(), "summary.csv");
    let j = |row| column(&summary, row, "J").parse::<f64>().unwrap();
    assert!(j("variable") < j("constant"));
}

#[test]
fn simulate_ellipse_preset_reduces_overshoot() {
    let tmp = TempDir::new().unwrap();
    let out = lookahead(&["simulate", "--preset", "ellipse_table2", "--out", out_arg(tmp.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read(tmp.path(), "summary.csv");
    let mp = |row| column(&summary, row, "Mp").parse::<f64>().unwrap();
    assert!(mp("variable") < mp("constant"));
}

#[test]
fn output_is_byte_identical_across_runs() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for dir in [&a, &b] {
        assert!(
            lookahead(&["simulate", "--preset", "ellipse_table2", "--out", out_arg(dir.path())])
                .status
                .success()
        );
    }
    for name in ["trajectory_constant.csv", "trajectory_variable.csv", "summary.csv"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
    }
}

#[test]
fn short_horizon_reports_missing_settling_time() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("short.cfg");
    let text = lookahead_core::scenario::preset_text("straight_line_table2")
        .unwrap()
        .replace("t_final = 60", "t_final = 2");
    fs::write(&cfg, text).unwrap();
    let out_dir = tmp.path().join("out");
    let out = lookahead(&["simulate", cfg.to_str().unwrap(), "--out", out_arg(&out_dir)]);
    assert!(out.status.success());
    let perf = read(&out_dir, "performance_constant.csv");
    assert!(perf.lines().nth(1).unwrap().starts_with(','), "{perf}");
}

#[test]
fn input_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let missing = lookahead(&["simulate", "/definitely/not/here.cfg", "--out", out_arg(tmp.path())]);
    assert_eq!(missing.status.code(), Some(2));

    let cfg = tmp.path().join("bad.cfg");
    let text = lookahead_core::scenario::preset_text("straight_line_table2")
        .unwrap()
        .replace("L_max = 82", "L_max = 20");
    fs::write(&cfg, text).unwrap();
    let out = lookahead(&["simulate", cfg.to_str().unwrap(), "--out", out_arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("L_max"));

    let bad_ratio = lookahead(&[
        "sweep",
        "--preset",
        "envelope_reference",
        "--ratios",
        "1:5",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert_eq!(bad_ratio.status.code(), Some(2));
}

#[test]
fn projection_failure_exits_with_three() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("center.cfg");
    let text = lookahead_core::scenario::preset_text("ellipse_table2")
        .unwrap()
        .replace("x = 250", "x = 0")
        .replace("y = 120", "y = 0");
    fs::write(&cfg, text).unwrap();
    let out = lookahead(&["simulate", cfg.to_str().unwrap(), "--out", out_arg(tmp.path())]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn envelope_writes_all_tables() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("env.cfg");
    fs::write(&cfg, SMALL_ENVELOPE).unwrap();
    let out_dir = tmp.path().join("env");
    let out = lookahead(&["envelope", cfg.to_str().unwrap(), "--out", out_arg(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let regions = read(&out_dir, "regions.csv");
    assert_eq!(
        regions.lines().next().unwrap(),
        "d,eta,eta_bar_c,eta_bar_v,region_c,region_v"
    );
    assert_eq!(regions.lines().count(), 1 + 120 * 90);
    let summary = read(&out_dir, "summary.csv");
    assert_eq!(summary.lines().next().unwrap(), "A_const,A_var,G_abs,G_rel");
    assert_eq!(read(&out_dir, "boundary.csv").lines().count(), 121);
    assert_eq!(read(&out_dir, "polar.csv").lines().count(), 1 + 120 * 90);
}

#[test]
fn infeasible_envelope_grid_fails() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("env.cfg");
    fs::write(
        &cfg,
        SMALL_ENVELOPE
            .replace("d_min = 0", "d_min = -300")
            .replace("n_eta = 90", "n_eta = 90\nkappa = 0.005"),
    )
    .unwrap();
    let out = lookahead(&["envelope", cfg.to_str().unwrap(), "--out", out_arg(tmp.path())]);
    assert!(!out.status.success());
}

#[test]
fn sweep_gains_grow_from_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("env.cfg");
    fs::write(&cfg, SMALL_ENVELOPE).unwrap();
    let out = lookahead(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--ratios",
        "1:5:0.5",
        "--out",
        out_arg(tmp.path()),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sweep = read(tmp.path(), "sweep.csv");
    let gains: Vec<f64> = sweep
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(gains.len(), 9);
    assert_eq!(gains[0], 0.0);
    assert!(gains.windows(2).all(|w| w[1] >= w[0]));
}
