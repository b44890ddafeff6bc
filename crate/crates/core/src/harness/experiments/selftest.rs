use serde_json::json;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{dims, sample_rng};
use crate::env::{sample_environment, transpose, Dims, Environment, Params};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::geometry::{
    cluster_flags, cluster_flags_by_enumeration, curve_above, downmost_maximal_path, exit_point, level_crossings,
    upmost_maximal_path, Axis, LatticePath, PathKind,
};
use crate::harness::config::ExperimentConfig;
use crate::harness::result::{row, Outcome, Verdict};
use crate::passage::oracle::{enumerate_lpp, variational_passage};
use crate::passage::rolling::{passage_summary, RollingOptions};
use crate::passage::{compass, compute_bulk_passage, compute_passage, Mode};
use crate::rng::{substream, uniform, Stream};
use crate::theory::{shape_boundary, shape_pp, variance_identity_rhs, variance_identity_rhs_east};

const GRID: [f64; 3] = [0.25, 0.5, 0.75];
const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    instances: u64,
    passage: u64,
    bulk: u64,
    variational: u64,
    downmost: u64,
    upmost: u64,
    rolling: u64,
    transpose: u64,
    clusters: u64,
    cluster_instances: u64,
}

impl Counts {
    fn add(&mut self, o: &Counts) {
        self.instances += o.instances;
        self.passage += o.passage;
        self.bulk += o.bulk;
        self.variational += o.variational;
        self.downmost += o.downmost;
        self.upmost += o.upmost;
        self.rolling += o.rolling;
        self.transpose += o.transpose;
        self.clusters += o.clusters;
        self.cluster_instances += o.cluster_instances;
    }
}

fn as_path(sites: &[(usize, usize)]) -> LatticePath {
    LatticePath {
        sites: sites.to_vec(),
        kind: PathKind::Maximal,
    }
}

fn check_instance(env: &Environment, with_clusters: bool) -> Result<Counts> {
    let mut c = Counts {
        instances: 1,
        ..Counts::default()
    };
    let d = env.dims();
    let field = compute_passage(env);
    let exact = enumerate_lpp(env, Mode::Boundary)?;
    c.passage += (field.last() != exact.value) as u64;
    let start = Mode::Bulk { start: (1, 1) };
    c.bulk += (compute_bulk_passage(env, (1, 1))?.last() != enumerate_lpp(env, start)?.value) as u64;
    let zero_axes = env.clone().into_bulk_only();
    c.bulk += (compute_passage(&zero_axes).last() != enumerate_lpp(&zero_axes, Mode::Boundary)?.value) as u64;
    c.variational += (variational_passage(env) != field.last()) as u64;

    // The constructed paths are maximal and extreme among all maximal paths.
    let down = downmost_maximal_path(&field, env);
    let up = upmost_maximal_path(&field, env);
    c.downmost += (!exact.paths.contains(&down.sites)) as u64;
    c.upmost += (!exact.paths.contains(&up.sites)) as u64;
    for p in &exact.paths {
        let other = as_path(p);
        c.downmost += (!curve_above(&other, &down)) as u64;
        c.upmost += (!curve_above(&up, &other)) as u64;
    }

    // Rolling kernel against the full pipeline.
    for level in 0..=d.n {
        let r = passage_summary(env, RollingOptions { level: Some(level) });
        let e = exit_point(&down);
        let eu = exit_point(&up);
        let south_zeros = (1..=e.e1).filter(|&i| env.weight(i, 0) == 0).count() as u32;
        let west_zeros = (1..=eu.e2).filter(|&j| env.weight(0, j) == 0).count() as u32;
        let crossing = level_crossings(&down, level, Axis::Horizontal)?;
        let ok = r.g == field.last()
            && r.compass == compass(&field)
            && r.exit == e
            && r.exit_up == eu
            && r.south_zeros == south_zeros
            && r.west_zeros == west_zeros
            && r.crossing == Some(crossing);
        c.rolling += (!ok) as u64;
    }

    // The up-most exit is the mirrored down-most exit of the transpose.
    let t = transpose(env);
    let ft = compute_passage(&t);
    let et = exit_point(&downmost_maximal_path(&ft, &t));
    let eu = exit_point(&up);
    c.transpose += (et.e1 != eu.e2 || et.e2 != eu.e1) as u64;

    if with_clusters {
        c.cluster_instances += 1;
        c.clusters += (cluster_flags(&field, env) != cluster_flags_by_enumeration(env)?) as u64;
    }
    Ok(c)
}

/// Exact moments by summing over every environment of a tiny rectangle.
struct Moments {
    var_g: f64,
    a_exit: f64,
    a_cov: f64,
    a_east_exit: f64,
    a_east_cov: f64,
}

fn exact_moments(params: Params, d: Dims) -> Moments {
    let law = params.law();
    let sites: Vec<(usize, usize)> = (0..=d.n)
        .flat_map(|j| (0..=d.m).map(move |i| (i, j)))
        .filter(|&s| s != (0, 0))
        .collect();
    let (u, l) = (params.u(), params.west());
    let v = u * (1.0 - u);
    let mut e = [0.0f64; 11];
    for mask in 0u32..(1 << sites.len()) {
        let bit = |i: usize, j: usize| {
            sites
                .iter()
                .position(|&s| s == (i, j))
                .is_some_and(|k| mask >> k & 1 == 1)
        };
        let env = Environment::from_fn(d, bit);
        let mut prob = 1.0;
        for (k, &(i, j)) in sites.iter().enumerate() {
            let q = law.threshold(i, j);
            prob *= if mask >> k & 1 == 1 { q } else { 1.0 - q };
        }
        let r = passage_summary(&env, Default::default());
        let (g, s, nn, w, ee) = (
            r.g as f64,
            r.compass.s as f64,
            r.compass.n as f64,
            r.compass.w as f64,
            r.compass.e as f64,
        );
        let vals = [
            g,
            g * g,
            r.south_zeros as f64,
            s,
            nn,
            s * nn,
            r.west_zeros as f64,
            w,
            ee,
            w * ee,
            1.0,
        ];
        for (acc, x) in e.iter_mut().zip(vals) {
            *acc += prob * x;
        }
    }
    Moments {
        var_g: e[1] - e[0] * e[0],
        a_exit: e[2] / (1.0 - u),
        a_cov: (e[5] - e[3] * e[4]) / v,
        a_east_exit: -l * e[6] / v,
        a_east_cov: -(e[9] - e[7] * e[8]) / v,
    }
}

/// Exhaustive check of `P(L = n) = P(Bin(m, p) >= n)` on zero-axis rectangles.
fn flat_formula_gap(p: f64, m: usize, n: usize) -> Result<f64> {
    let d = dims(m, n)?;
    let bulk: Vec<(usize, usize)> = (1..=n).flat_map(|j| (1..=m).map(move |i| (i, j))).collect();
    let mut prob_full = 0.0;
    for mask in 0u32..(1 << bulk.len()) {
        let env = Environment::from_fn(d, |i, j| {
            bulk.iter()
                .position(|&s| s == (i, j))
                .is_some_and(|k| mask >> k & 1 == 1)
        });
        let ones = mask.count_ones() as i32;
        let prob = p.powi(ones) * (1.0 - p).powi(bulk.len() as i32 - ones);
        if compute_passage(&env).last() as usize == n {
            prob_full += prob;
        }
    }
    let law = Binomial::new(p, m as u64).map_err(|e| Error::Param(e.to_string()))?;
    let exact = if n == 0 { 1.0 } else { law.sf(n as u64 - 1) };
    Ok((prob_full - exact).abs())
}

/// Minimum of `u -> shape_boundary(p, u, 1, x)` over a fine grid, refined by
/// golden-section search around the best grid point.
fn brute_force_min(p: f64, x: f64) -> Result<f64> {
    let f = |u: f64| shape_boundary(p, u, 1.0, x);
    let steps = 100_000;
    let mut best = (f64::INFINITY, 1.0);
    for k in 1..=steps {
        let u = k as f64 / steps as f64;
        let v = f(u)?;
        if v < best.0 {
            best = (v, u);
        }
    }
    let h = 1.0 / steps as f64;
    let (mut a, mut b) = ((best.1 - h).max(1e-12), (best.1 + h).min(1.0));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c)? < f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(best.0.min(f((a + b) / 2.0)?))
}

pub(crate) fn oracle_selftest(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let mut out = Outcome::default();
    let pairs: Vec<(f64, f64)> = GRID.iter().flat_map(|&p| GRID.iter().map(move |&u| (p, u))).collect();
    let mut shapes = Vec::new();
    for &m in &cfg.n_grid {
        for &n in &cfg.n_grid {
            shapes.push((m, n));
        }
    }
    let jobs: Vec<(usize, usize)> = (0..shapes.len())
        .flat_map(|s| (0..pairs.len()).map(move |q| (s, q)))
        .collect();
    let parts = exec.map(jobs.len(), |job| -> Result<Counts> {
        let (s, q) = jobs[job];
        let (m, n) = shapes[s];
        let (p, u) = pairs[q];
        let params = Params::new(p, u)?;
        let d = Dims::new(m, n)?;
        let mut c = Counts::default();
        for k in 0..cfg.samples {
            let mut rng = sample_rng(seed, Stream::Environment, job, k);
            let env = sample_environment(params, d, &mut rng);
            c.add(&check_instance(&env, m <= 4 && n <= 4 && k < 20)?);
        }
        Ok(c)
    });
    let mut c = Counts::default();
    for part in parts {
        c.add(&part?);
    }
    let checks = [
        ("passage_matches_enumeration", c.passage, c.instances),
        ("bulk_passage_matches_enumeration", c.bulk, c.instances),
        ("variational_form", c.variational, c.instances),
        ("downmost_path_extreme", c.downmost, c.instances),
        ("upmost_path_extreme", c.upmost, c.instances),
        ("rolling_matches_full", c.rolling, c.instances),
        ("upmost_exit_is_transposed_exit", c.transpose, c.instances),
        ("cluster_flags_match_enumeration", c.clusters, c.cluster_instances),
    ];
    for (name, bad, inst) in checks {
        out.push_row(row([
            ("check", json!(name)),
            ("instances", json!(inst)),
            ("violations", json!(bad)),
        ]));
        out.push(Verdict::exact(name, bad).with_samples(inst as usize));
    }

    // Variance identities in exact arithmetic over all environments.
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &(p, u) in &[(0.5, 0.5), (0.25, 0.75), (0.75, 0.25)] {
        let params = Params::new(p, u)?;
        for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (2, 3), (3, 3)] {
            let mo = exact_moments(params, Dims::new(m, n)?);
            let gaps = [
                mo.var_g - variance_identity_rhs(p, u, m, n, mo.a_exit),
                mo.a_exit - mo.a_cov,
                mo.var_g - variance_identity_rhs_east(p, u, m, n, mo.a_east_exit),
                mo.a_east_exit - mo.a_east_cov,
            ];
            let gap = gaps.iter().fold(0.0f64, |a, g| a.max(g.abs()));
            out.push_row(row([
                ("check", json!("variance_identity_exact")),
                ("p", json!(p)),
                ("u", json!(u)),
                ("m", json!(m)),
                ("n", json!(n)),
                ("var_G", json!(mo.var_g)),
                ("A_exit", json!(mo.a_exit)),
                ("A_east_exit", json!(mo.a_east_exit)),
                ("max_gap", json!(gap)),
            ]));
            worst = worst.max(gap);
            cases += 1;
        }
    }
    out.push(
        Verdict::exact("variance_identity_exact", (worst > TOL) as u64)
            .with_samples(cases)
            .with_detail(format!("largest gap {worst}")),
    );

    // Flat-edge probability formula, exhaustively.
    let mut flat_worst: f64 = 0.0;
    for p in GRID {
        for (m, n) in [(1, 1), (2, 1), (3, 1), (3, 2), (4, 2), (4, 3)] {
            flat_worst = flat_worst.max(flat_formula_gap(p, m, n)?);
        }
    }
    out.push(
        Verdict::exact("flat_probability_formula", (flat_worst > TOL) as u64)
            .with_detail(format!("largest gap {flat_worst}")),
    );

    // Minimizing the boundary shape over u recovers the bulk shape.
    let mut rng = substream(seed, Stream::Auxiliary, 0);
    let mut shape_worst: f64 = 0.0;
    for _ in 0..20 {
        let p = 0.05 + 0.9 * uniform(&mut rng);
        let x = p + (1.0 - p) * (1.0 - uniform(&mut rng));
        let gap = (brute_force_min(p, x)? - shape_pp(p, 1.0, x)?).abs();
        out.push_row(row([
            ("check", json!("shape_minimization")),
            ("p", json!(p)),
            ("x", json!(x)),
            ("max_gap", json!(gap)),
        ]));
        shape_worst = shape_worst.max(gap);
    }
    out.push(
        Verdict::exact("shape_minimization", (shape_worst > 1e-4) as u64)
            .with_samples(20)
            .with_detail(format!("largest gap {shape_worst}")),
    );
    Ok(out)
}
