//! Acceptance suite. Runs every criterion at full scale, prints one line per
//! criterion and exits non-zero if any fails.

use std::io::Write;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hammersley::harness::output::render;
use hammersley::harness::{run, Experiment, ExperimentConfig, ExperimentResult, Format, VerdictKind};
use hammersley::passage::burke::{exact_burke, standard_cases};
use hammersley::rng::{substream, uniform, Stream};
use hammersley::theory::{shape_boundary, shape_pp};

struct Line {
    passed: bool,
    summary: String,
}

fn verdicts_pass(r: &ExperimentResult, names: &[&str]) -> Line {
    let mut passed = true;
    let mut parts = Vec::new();
    for name in names {
        match r.verdict(name) {
            Some(v) => {
                passed &= v.passed;
                parts.push(format!("{name}={:.4}", v.statistic));
            }
            None => {
                passed = false;
                parts.push(format!("{name} missing"));
            }
        }
    }
    Line {
        passed,
        summary: parts.join(" "),
    }
}

fn all_gates_pass(r: &ExperimentResult, kind: Option<VerdictKind>) -> Line {
    let gates: Vec<_> = r
        .verdicts
        .iter()
        .filter(|v| v.kind != VerdictKind::Report && kind.map_or(true, |k| v.kind == k))
        .collect();
    let failed: Vec<_> = gates.iter().filter(|v| !v.passed).map(|v| v.name.as_str()).collect();
    Line {
        passed: failed.is_empty() && !gates.is_empty(),
        summary: if failed.is_empty() {
            format!("{} checks", gates.len())
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn experiment(e: Experiment) -> ExperimentResult {
    run(&ExperimentConfig::defaults(e)).expect("default configuration runs")
}

fn oracle_equivalence() -> Line {
    let r = experiment(Experiment::OracleSelftest);
    verdicts_pass(&r, &["passage_matches_enumeration", "bulk_passage_matches_enumeration"])
}

fn exact_burke_identity() -> Line {
    let checks: Vec<_> = standard_cases().into_iter().map(|(p, u)| exact_burke(p, u)).collect();
    let failures: usize = checks.iter().map(|c| c.factorization_failures).sum();
    Line {
        passed: checks.iter().all(|c| c.holds),
        summary: format!("{} parameter pairs, {failures} factorization failures", checks.len()),
    }
}

fn statistical_burke() -> Line {
    let r = experiment(Experiment::Burke);
    verdicts_pass(
        &r,
        &[
            "path_I_mean_z",
            "path_J_mean_z",
            "alpha_mean_z",
            "north_edge_mean_z",
            "marginal_max_z",
            "pairwise_pass_fraction",
        ],
    )
}

fn variance_identity() -> Line {
    let r = experiment(Experiment::Identity);
    verdicts_pass(&r, &["identity_residual_z", "estimator_agreement_z"])
}

fn characteristic_exponent() -> Line {
    let r = experiment(Experiment::VarianceScan);
    verdicts_pass(&r, &["variance_slope", "slope_stderr"])
}

fn off_characteristic_clt() -> Line {
    let r = experiment(Experiment::Clt);
    verdicts_pass(&r, &["ks_normal", "variance_slope"])
}

fn flat_edge() -> Line {
    let r = experiment(Experiment::FlatEdge);
    verdicts_pass(&r, &["p_full", "variance_decreasing", "bounded_by_rows"])
}

fn exit_tails() -> Line {
    let r = experiment(Experiment::ExitTails);
    verdicts_pass(&r, &["tail_slope", "exit_scale_ratio"])
}

fn path_fluctuations() -> Line {
    let r = experiment(Experiment::PathFluct);
    verdicts_pass(&r, &["fluctuation_slope", "deviation_tail_slope"])
}

fn coupling_invariants() -> Line {
    let r = experiment(Experiment::Coupling);
    all_gates_pass(&r, Some(VerdictKind::Exact))
}

/// Golden-section minimization of `u -> shape_boundary(p, u, 1, x)` after a
/// coarse scan, compared with the closed form.
fn closed_form_shape() -> Line {
    let mut rng = substream(1, Stream::Auxiliary, 11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = 0.05 + 0.9 * uniform(&mut rng);
        let x = p + (1.0 - p) * uniform(&mut rng);
        let f = |u: f64| shape_boundary(p, u, 1.0, x).unwrap();
        let grid = 20_000;
        let k = (1..=grid)
            .min_by(|&a, &b| f(a as f64 / grid as f64).total_cmp(&f(b as f64 / grid as f64)))
            .unwrap();
        let (mut a, mut b) = (
            ((k - 1) as f64 / grid as f64).max(1e-9),
            ((k + 1) as f64 / grid as f64).min(1.0),
        );
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let brute = f(0.5 * (a + b)).min(f(k as f64 / grid as f64));
        worst = worst.max((brute - shape_pp(p, 1.0, x).unwrap()).abs());
    }
    Line {
        passed: worst < 1e-4,
        summary: format!("max gap {worst:.3e} over 20 draws"),
    }
}

fn small(e: Experiment) -> ExperimentConfig {
    let mut c = ExperimentConfig::defaults(e);
    match e {
        Experiment::OracleSelftest => c.n_grid = vec![1, 2, 3],
        Experiment::Coupling => {
            c.n_grid = vec![10];
            c.samples = 200;
        }
        Experiment::Burke | Experiment::Identity => {
            c.n_grid = vec![12];
            c.samples = 2_000;
        }
        Experiment::FlatEdge => {
            c.n_grid = vec![20, 30, 40];
            c.samples = 2_000;
        }
        _ => {
            c.n_grid = vec![16, 24, 32];
            c.samples = 1_000;
        }
    }
    c
}

fn reproducibility() -> Line {
    let mut mismatched = Vec::new();
    for e in Experiment::ALL {
        let mut bytes = Vec::new();
        for workers in [1, 3, 1] {
            let mut c = small(e);
            c.workers = workers;
            let r = run(&c).expect("small configuration runs");
            bytes.push((render(&r, Format::Json).unwrap(), render(&r, Format::Csv).unwrap()));
        }
        if bytes.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(e.name());
        }
    }
    Line {
        passed: mismatched.is_empty(),
        summary: if mismatched.is_empty() {
            format!("{} experiments identical at 1 and 3 workers", Experiment::ALL.len())
        } else {
            format!("differ: {}", mismatched.join(", "))
        },
    }
}

type Criterion = (&'static str, Option<u64>, fn() -> Line);

const CRITERIA: [Criterion; 12] = [
    ("oracle equivalence", Some(60), oracle_equivalence),
    ("exact Burke identity", Some(1), exact_burke_identity),
    ("statistical Burke suite", Some(300), statistical_burke),
    ("variance identity", Some(600), variance_identity),
    ("characteristic variance exponent", Some(1800), characteristic_exponent),
    ("off-characteristic CLT", Some(900), off_characteristic_clt),
    ("flat edge", Some(300), flat_edge),
    ("exit tails", Some(1200), exit_tails),
    ("path fluctuations", Some(1200), path_fluctuations),
    ("coupling and ordering invariants", Some(300), coupling_invariants),
    ("closed-form shape cross-check", Some(1), closed_form_shape),
    ("reproducibility", None, reproducibility),
];

fn main() -> ExitCode {
    // Honour `cargo test -- <filter>` on criterion names.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut stderr = std::io::stderr();
    let mut failures = 0;
    for (k, (name, budget, check)) in CRITERIA.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let line = check();
        let elapsed = start.elapsed();
        let in_budget = budget.map_or(true, |b| elapsed <= Duration::from_secs(b));
        let passed = line.passed && in_budget;
        failures += !passed as usize;
        let budget = budget.map_or(String::new(), |b| format!(", budget {b} s"));
        writeln!(
            stderr,
            "{} {:>2} {name}: {} ({:.1} s{budget})",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            line.summary,
            elapsed.as_secs_f64()
        )
        .unwrap();
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        writeln!(stderr, "{failures} criteria failed").unwrap();
        ExitCode::FAILURE
    }
}
