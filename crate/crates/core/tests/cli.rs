use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use radialflow::cli::{parse_config, read_table};
use radialflow::euler::solve_euler;
use radialflow::RadialGrid;

const OUTFLOW: &str = "n = 2\ngamma = 1.4\nA = 1\nv_plus = 1\nu_minus = -0.05\nmu = 0.05\n";
const INFLOW: &str = "n = 2\ngamma = 1.4\nA = 1\nv_plus = 1\nu_minus = 0.05\nv_minus = 1.02\nmu = 0.05\n";

fn run(dir: &Path, sub: &str, config: &str, out: &str) -> Output {
    let cfg = dir.join(format!("{out}.cfg"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_radialflow"))
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .output()
        .unwrap()
}

#[test]
fn solve_euler_writes_a_round_trippable_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "solve-euler", OUTFLOW, "a");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("a/euler_profile.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("# points_per_decade = "));
    assert!(text.contains("# R_max = 1000"));
    let (columns, rows) = read_table(&path).unwrap();
    assert_eq!(columns, ["r", "eta", "rho", "u"]);

    let cfg = parse_config(OUTFLOW).unwrap();
    let grid = RadialGrid::build(cfg.r_max, None, cfg.points_per_decade).unwrap();
    let sol = solve_euler(&cfg.flow, &grid, &cfg.tol).unwrap();
    assert_eq!(rows.len(), grid.len());
    for ((row, r), eta) in rows.iter().zip(grid.nodes()).zip(&sol.eta) {
        assert_eq!(row[0], *r);
        assert_eq!(row[1], *eta);
    }

    let again = run(dir.path(), "solve-euler", OUTFLOW, "b");
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(fs::read(path).unwrap(), fs::read(dir.path().join("b/euler_profile.csv")).unwrap());
}

#[test]
fn other_solvers_write_their_schemas() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "solve-ns", INFLOW, "ns").status.code(), Some(0));
    let (columns, rows) = read_table(&dir.path().join("ns/ns_profile.csv")).unwrap();
    assert_eq!(columns, ["r", "eta", "rho", "u"]);
    assert!((rows[0][1] - 0.02).abs() < 1e-15);
    assert_eq!(run(dir.path(), "solve-bl", INFLOW, "bl").status.code(), Some(0));
    let (columns, rows) = read_table(&dir.path().join("bl/bl_profile.csv")).unwrap();
    assert_eq!(columns, ["y", "eta_hat"]);
    assert_eq!(rows[0][0], 0.0);
}

#[test]
fn verify_and_decay_pass_on_the_inflow_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "verify", INFLOW, "v");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("layer duhamel cross-check"));
    let out = run(dir.path(), "decay", INFLOW, "d");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = fs::read_to_string(dir.path().join("d/decay_ns.csv")).unwrap();
    assert!(text.lines().last().unwrap().starts_with("# slope="));
}

#[test]
fn failed_rate_window_exits_with_one() {
    // on a very coarse far-field grid the discretization error swamps the
    // O(mu) signal, so the fitted slope collapses
    let config = format!("{OUTFLOW}points_per_decade = 16\nmu_list = 0.004, 0.002, 0.001, 0.0005\n");
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "outflow-limit", &config, "o");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(1), "{stdout}{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout.contains("slope"));
    let text = fs::read_to_string(dir.path().join("o/outflow_eta.csv")).unwrap();
    assert!(text.contains("param,error"));
    assert!(text.trim_end().ends_with("pass=false"));
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), "solve-everything", OUTFLOW, "x").status.code(), Some(2));
    let out = run(dir.path(), "solve-euler", "n = 1\n", "y");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`n`"));
    let out = run(dir.path(), "solve-euler", &format!("{OUTFLOW}R_max = 10\n"), "z");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("R_max"));
}
