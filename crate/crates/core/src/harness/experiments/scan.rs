use serde_json::json;

use super::{as_f64, dims, endpoint, rolling_samples};
use crate::env::Law;
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::harness::config::ExperimentConfig;
use crate::harness::result::{row, Outcome, Verdict};
use crate::stats::{ks_statistic, ks_statistic_lattice, loglog_slope, normal_cdf, quantile, summarize};
use crate::theory::{characteristic_endpoint, shape_boundary, shape_pp};

/// Delta-method stderr of a log-log slope from per-point relative errors.
fn propagated_slope_stderr(xs: &[f64], rel: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mean = lx.iter().sum::<f64>() / lx.len() as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mean).powi(2)).sum();
    lx.iter()
        .zip(rel)
        .map(|(x, r)| ((x - mean) / sxx * r).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn variance_scan(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let law = cfg.params()?.law();
    let mut out = Outcome::default();
    let (mut xs, mut vars, mut rel) = (Vec::new(), Vec::new(), Vec::new());
    let mut nonzero = 0u64;
    for (b, &big_n) in cfg.n_grid.iter().enumerate() {
        let (m, n) = endpoint(cfg, big_n)?;
        let runs = rolling_samples(exec, seed, b, law, dims(m, n)?, cfg.samples, Default::default());
        let s = summarize(&as_f64(runs.iter().map(|r| r.g)))?;
        out.push_row(row([
            ("N", json!(big_n)),
            ("m", json!(m)),
            ("n", json!(n)),
            ("samples", json!(cfg.samples)),
            ("mean_G", json!(s.mean)),
            ("var_G", json!(s.variance)),
            ("var_stderr", json!(s.stderr_variance)),
            ("seed", json!(seed)),
        ]));
        nonzero += (s.variance != 0.0) as u64;
        xs.push(big_n as f64);
        vars.push(s.variance);
        rel.push(s.stderr_variance / s.variance);
    }
    let total = cfg.samples * cfg.n_grid.len();
    if cfg.u >= 1.0 {
        out.push(
            Verdict::exact("zero_variance", nonzero)
                .with_samples(total)
                .with_detail("u = 1 makes G = m deterministic"),
        );
        return Ok(out);
    }
    if xs.len() >= 3 {
        let pts: Vec<(f64, f64)> = xs.iter().copied().zip(vars.iter().copied()).collect();
        let fit = loglog_slope(&pts)?;
        out.push(
            Verdict::within("variance_slope", fit.slope, 0.55, 0.80)
                .with_samples(total)
                .with_detail(format!("r^2 = {}", fit.r_squared)),
        );
        out.push(Verdict::below("slope_stderr", fit.slope_stderr, 0.06).with_samples(total));
        out.push(
            Verdict::report("slope_stderr_sampling", propagated_slope_stderr(&xs, &rel))
                .with_samples(total)
                .with_detail("delta-method stderr from the per-N variance errors"),
        );
    }
    Ok(out)
}

pub(crate) fn clt(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let params = cfg.params()?;
    let law = params.law();
    let (u, l) = (params.u(), params.west());
    let limit = if cfg.c < 0.0 { u * (1.0 - u) } else { l * (1.0 - l) };
    let mut out = Outcome::default();
    let (mut xs, mut vars) = (Vec::new(), Vec::new());
    let mut last = None;
    for (b, &big_n) in cfg.n_grid.iter().enumerate() {
        let (m, n0) = characteristic_endpoint(cfg.p, cfg.u, big_n)?;
        let shift = (cfg.c * (big_n as f64).powf(cfg.alpha)).floor() as i64;
        let n = n0 as i64 + shift;
        if n < 1 {
            return Err(Error::Config(format!("offset {shift} leaves no rows at N = {big_n}")));
        }
        let n = n as usize;
        let runs = rolling_samples(exec, seed, b, law, dims(m, n)?, cfg.samples, Default::default());
        let g = as_f64(runs.iter().map(|r| r.g));
        let s = summarize(&g)?;
        let scale = (big_n as f64).powf(cfg.alpha);
        out.push_row(row([
            ("N", json!(big_n)),
            ("m", json!(m)),
            ("n", json!(n)),
            ("samples", json!(cfg.samples)),
            ("mean_G", json!(s.mean)),
            ("var_G", json!(s.variance)),
            ("var_stderr", json!(s.stderr_variance)),
            ("var_over_N_alpha", json!(s.variance / scale)),
            ("limit_candidate", json!(limit)),
            ("limit_candidate_abs_c", json!(cfg.c.abs() * limit)),
            ("seed", json!(seed)),
        ]));
        xs.push(big_n as f64);
        vars.push(s.variance);
        last = Some((big_n, g, s));
    }
    let (big_n, g, s) = last.expect("grid is non-empty");
    let half = (big_n as f64).powf(cfg.alpha / 2.0);
    let z: Vec<f64> = g.iter().map(|x| (x - s.mean) / half).collect();
    let sd = s.variance.sqrt() / half;
    let ks = ks_statistic(&z, |x| normal_cdf(x, 0.0, sd))?;
    out.push(
        Verdict::below("ks_normal", ks, 0.05)
            .with_samples(cfg.samples)
            .with_detail(format!("N = {big_n}, best-fit sd {sd}")),
    );
    let ks_lattice = ks_statistic_lattice(&g, |x| normal_cdf(x, s.mean, s.variance.sqrt()))?;
    out.push(
        Verdict::report("ks_normal_lattice", ks_lattice)
            .with_samples(cfg.samples)
            .with_detail("integer-valued G against the normal law discretized at half-integers"),
    );
    let v = s.variance / (big_n as f64).powf(cfg.alpha);
    out.push(
        Verdict::report("limit_variance", v)
            .with_samples(cfg.samples)
            .with_detail(format!(
                "candidates: {limit} (no |c|) and {} (with |c|); relative gaps {} and {}",
                cfg.c.abs() * limit,
                (v - limit) / limit,
                (v - cfg.c.abs() * limit) / (cfg.c.abs() * limit)
            )),
    );
    if xs.len() >= 3 {
        let pts: Vec<(f64, f64)> = xs.into_iter().zip(vars).collect();
        let fit = loglog_slope(&pts)?;
        out.push(
            Verdict::within("variance_slope", fit.slope, 0.8, 1.0)
                .with_samples(cfg.samples * pts.len())
                .with_detail(format!("slope stderr {}", fit.slope_stderr)),
        );
    }
    Ok(out)
}

fn deviation_row(label: &str, big_n: usize, m: usize, n: usize, centre: f64, devs: &[f64]) -> crate::harness::Row {
    let scale = (big_n as f64).powf(1.0 / 3.0);
    let scaled: Vec<f64> = devs.iter().map(|d| d.abs() * scale).collect();
    row([
        ("check", json!(label)),
        ("N", json!(big_n)),
        ("m", json!(m)),
        ("n", json!(n)),
        ("samples", json!(devs.len())),
        ("centre", json!(centre)),
        ("mean_deviation", json!(devs.iter().sum::<f64>() / devs.len() as f64)),
        ("scaled_q50", json!(quantile(&scaled, 0.5))),
        ("scaled_q90", json!(quantile(&scaled, 0.9))),
        ("scaled_q99", json!(quantile(&scaled, 0.99))),
    ])
}

pub(crate) fn shape_lln(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let params = cfg.params()?;
    let (p, u, l) = (params.p(), params.u(), params.west());
    let big_n = *cfg.n_grid.last().expect("grid is non-empty");
    let nf = big_n as f64;
    let band = 5.0 * nf.powf(-1.0 / 3.0);
    let mut out = Outcome::default();
    let within = |devs: &[f64]| devs.iter().filter(|d| d.abs() <= band).count() as f64 / devs.len() as f64;

    // Boundary model at the characteristic corner.
    let (m, n) = characteristic_endpoint(p, u, big_n)?;
    let centre = u + n as f64 / m as f64 * l;
    let runs = rolling_samples(
        exec,
        seed,
        0,
        params.law(),
        dims(m, n)?,
        cfg.samples,
        Default::default(),
    );
    let devs: Vec<f64> = runs.iter().map(|r| r.g as f64 / nf - centre).collect();
    out.push_row(deviation_row("boundary_characteristic", big_n, m, n, centre, &devs));
    out.push(
        Verdict::at_least("boundary_band_fraction", within(&devs), 0.99)
            .with_samples(cfg.samples)
            .with_detail(format!("band 5 N^(-1/3) = {band}")),
    );

    // Bulk model on the diagonal.
    let bulk = Law::bulk_only(p);
    let centre = shape_pp(p, 1.0, 1.0)?;
    let runs = rolling_samples(
        exec,
        seed,
        1,
        bulk,
        dims(big_n, big_n)?,
        cfg.samples,
        Default::default(),
    );
    let devs: Vec<f64> = runs.iter().map(|r| r.g as f64 / nf - centre).collect();
    out.push_row(deviation_row("bulk_diagonal", big_n, big_n, big_n, centre, &devs));
    out.push(
        Verdict::at_least("bulk_band_fraction", within(&devs), 0.95)
            .with_samples(cfg.samples)
            .with_detail(format!("band 5 N^(-1/3) = {band}")),
    );

    // Bulk model in the flat direction (1, 0.3).
    let n_flat = (0.3 * nf).floor() as usize;
    let centre = shape_pp(p, 1.0, 0.3)?;
    let runs = rolling_samples(
        exec,
        seed,
        2,
        bulk,
        dims(big_n, n_flat)?,
        cfg.samples,
        Default::default(),
    );
    let devs: Vec<f64> = runs.iter().map(|r| r.g as f64 / nf - centre).collect();
    let mean_dev = devs.iter().sum::<f64>() / devs.len() as f64;
    out.push_row(deviation_row("bulk_flat", big_n, big_n, n_flat, centre, &devs));
    out.push(Verdict::below("flat_mean_deviation", mean_dev.abs(), 1e-2).with_samples(cfg.samples));

    // Further directions on the smallest grid size, reported only.
    let small = cfg.n_grid[0];
    let sf = small as f64;
    for (k, t) in [0.25, 0.5, 1.5, 2.0, 3.0].into_iter().enumerate() {
        let n = (t * sf).floor() as usize;
        let centre = shape_boundary(p, u, 1.0, t)?;
        let runs = rolling_samples(
            exec,
            seed,
            10 + k,
            params.law(),
            dims(small, n)?,
            cfg.samples,
            Default::default(),
        );
        let devs: Vec<f64> = runs.iter().map(|r| r.g as f64 / sf - centre).collect();
        out.push_row(deviation_row(&format!("boundary_t{t}"), small, small, n, centre, &devs));
        let centre = shape_pp(p, 1.0, t)?;
        let runs = rolling_samples(
            exec,
            seed,
            20 + k,
            bulk,
            dims(small, n)?,
            cfg.samples,
            Default::default(),
        );
        let devs: Vec<f64> = runs.iter().map(|r| r.g as f64 / sf - centre).collect();
        out.push_row(deviation_row(&format!("bulk_t{t}"), small, small, n, centre, &devs));
    }
    Ok(out)
}
