use hammersley::exec::Executor;
use hammersley::harness::output::{render, VARIANCE_SCAN_COLUMNS};
use hammersley::harness::{run, run_once, Experiment, ExperimentConfig, Format, VerdictKind};
use hammersley::Error;

fn cfg(e: Experiment) -> ExperimentConfig {
    ExperimentConfig::defaults(e)
}

fn field(row: &hammersley::harness::Row, key: &str) -> f64 {
    row[key].as_f64().unwrap_or_else(|| panic!("{key} missing"))
}

#[test]
fn defaults_validate() {
    for e in Experiment::ALL {
        cfg(e).validate().unwrap();
    }
}

#[test]
fn bad_configs_are_config_errors() {
    let mut c = cfg(Experiment::VarianceScan);
    c.p = 1.5;
    assert!(matches!(run(&c), Err(Error::Config(_))));
    let mut c = cfg(Experiment::Clt);
    c.alpha = 0.5;
    assert!(matches!(run(&c), Err(Error::Config(_))));
    let mut c = cfg(Experiment::FlatEdge);
    c.flat_slope = 0.7;
    assert!(matches!(run(&c), Err(Error::Config(_))));
    let mut c = cfg(Experiment::OracleSelftest);
    c.n_grid = vec![3, 2];
    assert!(matches!(run(&c), Err(Error::Config(_))));
}

#[test]
fn degenerate_boundary_has_zero_variance() {
    let mut c = cfg(Experiment::VarianceScan);
    c.u = 1.0;
    c.n_grid = vec![16, 32, 64];
    c.samples = 200;
    let r = run(&c).unwrap();
    let v = r.verdict("zero_variance").unwrap();
    assert_eq!(v.kind, VerdictKind::Exact);
    assert!(v.passed);
    for row in &r.rows {
        assert_eq!(field(row, "var_G"), 0.0);
        assert_eq!(field(row, "mean_G"), field(row, "m"));
    }
    let mut c = cfg(Experiment::Identity);
    c.u = 1.0;
    c.n_grid = vec![16];
    c.samples = 200;
    assert_eq!(run(&c).unwrap().exit_code(), 0);
}

#[test]
fn variance_scan_csv_header() {
    let mut c = cfg(Experiment::VarianceScan);
    c.n_grid = vec![8, 16, 32];
    c.samples = 400;
    let r = run(&c).unwrap();
    let text = String::from_utf8(render(&r, Format::Csv).unwrap()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), VARIANCE_SCAN_COLUMNS.join(","));
    assert_eq!(lines.count(), 3);
}

#[test]
fn json_shape() {
    let mut c = cfg(Experiment::Coupling);
    c.n_grid = vec![6];
    c.samples = 100;
    let r = run(&c).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&render(&r, Format::Json).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["experiment"], "coupling");
    assert_eq!(v["config"]["samples"], 100);
    assert!(v["config"].get("workers").is_none());
    assert!(v["rows"].as_array().unwrap().len() > 5);
    assert!(v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x["passed"].is_boolean()));
}

#[test]
fn output_is_independent_of_worker_count() {
    let mut c = cfg(Experiment::Identity);
    c.n_grid = vec![12];
    c.samples = 3000;
    let one = run_once(&c, c.seed, &Executor::new(1)).unwrap();
    let three = run_once(&c, c.seed, &Executor::new(3)).unwrap();
    assert_eq!(one.rows, three.rows);
    let seq = run_once(&c, c.seed, &Executor::sequential()).unwrap();
    assert_eq!(one.rows, seq.rows);
}

#[test]
fn doubling_samples_is_stable() {
    // Estimates at n and 2n samples agree within their combined error.
    let mut c = cfg(Experiment::Identity);
    c.n_grid = vec![16];
    c.samples = 4000;
    let small = run(&c).unwrap();
    c.samples = 8000;
    c.seed += 1;
    let large = run(&c).unwrap();
    for (a, b) in small.rows.iter().zip(&large.rows).take(2) {
        for (key, se) in [("var_G", "var_stderr"), ("A_cov", "A_stderr")] {
            let z = (field(a, key) - field(b, key)).abs() / field(a, se).hypot(field(b, se));
            assert!(z < 4.0, "{key}: z = {z}");
        }
    }
}

#[test]
fn flat_conditional_variance_matches_plain_at_small_n() {
    // Failures are frequent at N = 20, so the plain estimate is usable.
    let mut c = cfg(Experiment::FlatEdge);
    c.n_grid = vec![20, 30, 40];
    c.samples = 20_000;
    let r = run(&c).unwrap();
    assert!(r.verdict("bounded_by_rows").unwrap().passed);
    let row = &r.rows[0];
    let (plain, cond, se) = (field(row, "var_G_plain"), field(row, "var_G"), field(row, "var_stderr"));
    let plain_se = field(row, "var_plain_stderr");
    assert!(plain > 0.0);
    assert!((plain - cond).abs() < 4.0 * se.hypot(plain_se), "{plain} vs {cond}");
    let hat = field(row, "p_full_hat");
    let exact = field(row, "p_full_exact");
    assert!((hat - exact).abs() < 4.0 * (exact * (1.0 - exact) / 20_000.0).sqrt() + 1e-12);
}

#[test]
fn statistical_failure_is_retried_once() {
    // Off the characteristic direction the variance grows linearly, so the
    // exponent window fails on both passes.
    let mut c = cfg(Experiment::VarianceScan);
    c.n_grid = vec![64, 128, 256, 512];
    c.samples = 1000;
    c.characteristic = false;
    c.p = 0.3;
    c.u = 0.8;
    let r = run(&c).unwrap();
    let v = r.verdict("variance_slope").unwrap();
    assert!(!v.passed);
    assert_eq!(v.attempts, 2);
    assert_eq!(v.seed, r.metadata.retry_seed.unwrap());
    assert!(v.detail.contains("first pass"));
    assert_eq!(r.verdict("slope_stderr").unwrap().attempts, 1);
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn passing_run_has_no_retry() {
    let mut c = cfg(Experiment::Coupling);
    c.n_grid = vec![6];
    c.samples = 100;
    let r = run(&c).unwrap();
    assert!(r.metadata.retry_seed.is_none());
    assert!(r.verdicts.iter().all(|v| v.attempts == 1));
    assert_eq!(r.exit_code(), 0);
}
