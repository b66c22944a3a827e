use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsat"))
        .args(args)
        .output()
        .expect("failed to run qsat")
}

fn ok(args: &[&str]) -> String {
    let out = qsat(args);
    assert!(
        out.status.success(),
        "qsat {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn generate(dir: &Path, vars: u32, clauses: usize, seed: u64) -> std::path::PathBuf {
    let file = dir.join(format!("n{vars}m{clauses}s{seed}.cnf"));
    ok(&[
        "gen",
        "--vars",
        &vars.to_string(),
        "--clauses",
        &clauses.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path(&file),
    ]);
    file
}

#[test]
fn gen_is_deterministic_dimacs() {
    let a = ok(&["gen", "--vars", "10", "--clauses", "42", "--seed", "5"]);
    let b = ok(&["gen", "--vars", "10", "--clauses", "42", "--seed", "5"]);
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("p cnf 10 42"));
    let clauses: Vec<&str> = lines.collect();
    assert_eq!(clauses.len(), 42);
    assert!(clauses.iter().all(|l| l.split_whitespace().count() == 4 && l.ends_with(" 0")));
}

#[test]
fn solve_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("one.cnf");
    fs::write(&file, "p cnf 3 1\n1 2 3 0\n").unwrap();
    let v: Value = serde_json::from_str(&ok(&["solve", path(&file), "--json"])).unwrap();
    assert_eq!(v["satisfiable"], true);
    assert_eq!(v["dpll_decisions"], 1);

    // all eight sign patterns over three variables
    let mut text = String::from("p cnf 3 8\n");
    for mask in 0..8 {
        let lits: Vec<String> = (0..3).map(|i| if mask >> i & 1 == 1 { format!("-{}", i + 1) } else { format!("{}", i + 1) }).collect();
        text.push_str(&format!("{} 0\n", lits.join(" ")));
    }
    fs::write(&file, text).unwrap();
    let v: Value = serde_json::from_str(&ok(&["solve", path(&file), "--json"])).unwrap();
    assert_eq!(v["satisfiable"], false);
}

#[test]
fn malformed_dimacs_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.cnf");
    fs::write(&file, "p cnf 3 1\n1 2 0\n").unwrap();
    let out = qsat(&["solve", path(&file)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn missing_input_exits_with_io_error() {
    let out = qsat(&["solve", "/nonexistent/input.cnf"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn bad_arguments_exit_with_config_error() {
    assert_eq!(qsat(&["gen", "--vars", "2", "--clauses", "1"]).status.code(), Some(2));
    assert_eq!(qsat(&["gen", "--vars"]).status.code(), Some(2));
}

#[test]
fn spectrum_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate(dir.path(), 5, 10, 3);
    let v: Value = serde_json::from_str(&ok(&["spectrum", path(&file), "--s", "0"])).unwrap();
    let eig: Vec<f64> = serde_json::from_value(v["eigenvalues"].clone()).unwrap();
    assert_eq!(eig.len(), 32);
    assert!(eig[0].abs() < 1e-9);
    let out = qsat(&["spectrum", path(&file), "--s", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_and_fit_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let file = generate(dir.path(), 8, 34, 11);
    let sweep = dir.path().join("sweep.json");
    let svg = dir.path().join("levels.svg");
    ok(&["sweep", path(&file), "--points", "12", "--seed", "11", "--out", path(&sweep), "--svg", path(&svg)]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&sweep).unwrap()).unwrap();
    assert_eq!(v["n"], 8);
    assert_eq!(v["m"], 34);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["s_grid"].as_array().unwrap().len(), 12);
    assert_eq!(v["spectra"].as_array().unwrap().len(), 12);
    assert_eq!(v["spectra"][0].as_array().unwrap().len(), 256);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let report = dir.path().join("fit.json");
    let hist = dir.path().join("hist.csv");
    ok(&["fit", path(&sweep), "--out", path(&report), "--hist-index", "6", "--hist-csv", path(&hist)]);
    let r: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let fits = r["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 12);
    // s = 0 is dominated by the degenerate spectrum of the driver term
    assert_eq!(fits[0]["valid"], false);
    let q_max = r["q_max"].as_f64().unwrap();
    let best = fits.iter().filter(|f| f["valid"] == true).map(|f| f["q"].as_f64().unwrap()).fold(0.0, f64::max);
    assert_eq!(q_max, best);
    let csv = fs::read_to_string(&hist).unwrap();
    assert!(csv.starts_with("bin_left,bin_right,count,brody_density_at_fit\n"));
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn baseline_csv_shape() {
    let csv = ok(&["baseline", "--n", "10", "--f-min", "2", "--f-max", "3", "--f-step", "0.5", "--instances", "5"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,f,m,median_dpll,mean_dpll,sat_fraction,count");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("10,2,20,"));
}

#[test]
fn plot_renders_curve() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    fs::write(
        &curve,
        "f,m,mean_q_max,stderr_q_max,median_dpll,sat_fraction,count\n1,8,0.4,0.05,3,1,20\n4.25,34,0.9,0.04,9,0.5,20\n",
    )
    .unwrap();
    let out = dir.path().join("fig.svg");
    ok(&["plot", path(&curve), "--out", path(&out), "--cost-panel"]);
    let svg = fs::read_to_string(&out).unwrap();
    assert_eq!(svg.matches("class=\"marker\"").count(), 2);
    assert_eq!(svg.matches("class=\"cost-marker\"").count(), 2);

    fs::write(&curve, "f,m,mean_q_max,stderr_q_max,median_dpll,sat_fraction,count\n").unwrap();
    assert_eq!(qsat(&["plot", path(&curve), "--out", path(&out)]).status.code(), Some(2));
}

#[test]
fn gp_validate_small() {
    let v: Value =
        serde_json::from_str(&ok(&["gp-validate", "--dim", "64", "--samples", "4", "--families", "200"])).unwrap();
    assert!(v["goe_q"].as_f64().unwrap() > 0.5);
    assert!(v["poisson_q"].as_f64().unwrap() < 0.3);
    assert!((v["rescale_idempotence"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["covariance_checks"].as_array().unwrap().len(), 12);
}

#[test]
fn reproduce_fig2_small_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"n": 6, "f_grid": [1.0, 4.0], "instances_per_f": 2, "interpolation_points": 6, "seed": 3}"#)
        .unwrap();
    let out = dir.path().join("out");
    let stdout = ok(&["reproduce-fig2", "--config", path(&config), "--jobs", "2", "--out", path(&out)]);
    let csv = fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(stdout, csv);
    assert_eq!(csv.lines().count(), 3);
    for name in ["instances.jsonl", "failures.json", "fig2.svg", "config.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let records = fs::read_to_string(out.join("instances.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 4);
    let first: Value = serde_json::from_str(records.lines().next().unwrap()).unwrap();
    for key in ["n", "m", "seed", "config_hash", "q_max", "dpll_decisions"] {
        assert!(first.get(key).is_some(), "{key} missing");
    }
}
