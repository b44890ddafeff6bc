use serde_json::json;

use super::{as_f64, dims, endpoint, rolling_samples, LEVEL};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::harness::config::ExperimentConfig;
use crate::harness::result::{row, Outcome, Verdict};
use crate::passage::rolling::RollingOptions;
use crate::stats::{chi_square_homogeneity, exceedance, loglog_slope, summarize};

/// Grid size at which tail slopes are gated.
const TAIL_N: usize = 512;

fn gate_index(grid: &[usize]) -> usize {
    grid.iter().position(|&n| n == TAIL_N).unwrap_or(grid.len() - 1)
}

/// Log-log slope over the points with positive probability.
fn tail_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    if pos.len() < 3 {
        return None;
    }
    loglog_slope(&pos).ok().map(|f| f.slope)
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

pub(crate) fn exit_tails(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let law = cfg.params()?.law();
    let mut out = Outcome::default();
    let gate = gate_index(&cfg.n_grid);
    let mut scale = Vec::new();
    let mut scale_e1 = Vec::new();
    let mut r_tail = Vec::new();
    let mut d_small = Vec::new();
    for (b, &big_n) in cfg.n_grid.iter().enumerate() {
        let (m, n) = endpoint(cfg, big_n)?;
        let runs = rolling_samples(exec, seed, b, law, dims(m, n)?, cfg.samples, Default::default());
        let n23 = (big_n as f64).powf(2.0 / 3.0);
        let e1 = as_f64(runs.iter().map(|r| r.exit.e1 as u32));
        let e2 = as_f64(runs.iter().map(|r| r.exit.e2 as u32));
        let both: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a.max(*b)).collect();
        let (s1, s2) = (summarize(&e1)?, summarize(&e2)?);
        out.push_row(row([
            ("kind", json!("scale")),
            ("N", json!(big_n)),
            ("m", json!(m)),
            ("n", json!(n)),
            ("samples", json!(cfg.samples)),
            ("mean_xi_e1", json!(s1.mean)),
            ("mean_xi_e2", json!(s2.mean)),
            ("mean_xi_e2_stderr", json!(s2.stderr_mean)),
            ("scaled_xi_e1", json!(s1.mean / n23)),
            ("scaled_xi_e2", json!(s2.mean / n23)),
        ]));
        scale.push(s2.mean / n23);
        scale_e1.push(s1.mean / n23);
        for &r in &cfg.r_grid {
            let q = exceedance(&e2, r * n23);
            out.push_row(row([
                ("kind", json!("upper_tail")),
                ("N", json!(big_n)),
                ("samples", json!(cfg.samples)),
                ("r", json!(r)),
                ("probability", json!(q)),
            ]));
            if b == gate {
                r_tail.push((r, q));
            }
        }
        for &delta in &cfg.delta_grid {
            let q = both.iter().filter(|&&x| x <= delta * n23).count() as f64 / both.len() as f64;
            out.push_row(row([
                ("kind", json!("small_exit")),
                ("N", json!(big_n)),
                ("samples", json!(cfg.samples)),
                ("delta", json!(delta)),
                ("probability", json!(q)),
            ]));
            if b == gate {
                d_small.push((delta, q));
            }
        }
    }
    let gate_n = cfg.n_grid[gate];
    match tail_slope(&r_tail) {
        Some(s) => out.push(
            Verdict::at_most("tail_slope", s, -2.0)
                .with_samples(cfg.samples)
                .with_detail(format!("N = {gate_n}, points {r_tail:?}")),
        ),
        None => out.push(
            Verdict::holds("tail_slope", false)
                .with_samples(cfg.samples)
                .with_detail(format!(
                    "fewer than 3 r-values with positive tail mass at N = {gate_n}: {r_tail:?}"
                )),
        ),
    }
    let mut d_sorted = d_small.clone();
    d_sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let probs: Vec<f64> = d_sorted.iter().map(|x| x.1).collect();
    out.push(
        Verdict::holds("small_exit_monotone", strictly_decreasing(&probs))
            .with_samples(cfg.samples)
            .with_detail(format!("N = {gate_n}, points {d_sorted:?}")),
    );
    let ratio = |xs: &[f64]| {
        let hi = xs.iter().copied().fold(f64::MIN, f64::max);
        let lo = xs.iter().copied().fold(f64::MAX, f64::min);
        hi / lo
    };
    out.push(
        Verdict::below("exit_scale_ratio", ratio(&scale), 2.0)
            .with_samples(cfg.samples * cfg.n_grid.len())
            .with_detail(format!("E[xi_e2] N^(-2/3) = {scale:?}")),
    );
    out.push(
        Verdict::report("exit_scale_ratio_e1", ratio(&scale_e1))
            .with_samples(cfg.samples * cfg.n_grid.len())
            .with_detail(format!("E[xi_e1] N^(-2/3) = {scale_e1:?}")),
    );
    Ok(out)
}

pub(crate) fn path_fluct(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let law = cfg.params()?.law();
    let mut out = Outcome::default();
    let gate = gate_index(&cfg.n_grid);
    let mut xs = Vec::new();
    let mut sds = Vec::new();
    let mut b_tail = Vec::new();
    let mut first = None;
    for (b, &big_n) in cfg.n_grid.iter().enumerate() {
        let (m, n) = endpoint(cfg, big_n)?;
        let level = (cfg.tau * n as f64).floor() as usize;
        let opts = RollingOptions { level: Some(level) };
        let runs = rolling_samples(exec, seed, b, law, dims(m, n)?, cfg.samples, opts);
        let cross: Vec<(usize, usize)> = runs.iter().map(|r| r.crossing.expect("level requested")).collect();
        let v0: Vec<f64> = cross.iter().map(|c| c.0 as f64).collect();
        let v1: Vec<f64> = cross.iter().map(|c| c.1 as f64).collect();
        let (s0, s1) = (summarize(&v0)?, summarize(&v1)?);
        let n23 = (big_n as f64).powf(2.0 / 3.0);
        let centre = level as f64 * m as f64 / n as f64;
        out.push_row(row([
            ("kind", json!("scale")),
            ("N", json!(big_n)),
            ("m", json!(m)),
            ("n", json!(n)),
            ("level", json!(level)),
            ("samples", json!(cfg.samples)),
            ("centre", json!(centre)),
            ("mean_v0", json!(s0.mean)),
            ("sd_v0", json!(s0.variance.sqrt())),
            ("mean_v1", json!(s1.mean)),
            ("sd_v1", json!(s1.variance.sqrt())),
            ("scaled_sd_v0", json!(s0.variance.sqrt() / n23)),
        ]));
        xs.push(big_n as f64);
        sds.push(s0.variance.sqrt());
        let dev: Vec<f64> = v0.iter().map(|v| (v - centre).abs()).collect();
        for &bb in &cfg.b_grid {
            let q = exceedance(&dev, bb * n23);
            out.push_row(row([
                ("kind", json!("deviation_tail")),
                ("N", json!(big_n)),
                ("samples", json!(cfg.samples)),
                ("b", json!(bb)),
                ("probability", json!(q)),
            ]));
            if b == gate {
                b_tail.push((bb, q));
            }
        }
        for &delta in &cfg.delta_grid {
            let q = exceedance(&dev, delta * n23);
            out.push_row(row([
                ("kind", json!("avoidance")),
                ("N", json!(big_n)),
                ("samples", json!(cfg.samples)),
                ("delta", json!(delta)),
                ("probability", json!(q)),
            ]));
        }
        if b == 0 {
            first = Some((m, n, level, v1));
        }
    }
    if xs.len() >= 3 {
        let pts: Vec<(f64, f64)> = xs.into_iter().zip(sds).collect();
        let fit = loglog_slope(&pts)?;
        out.push(
            Verdict::within("fluctuation_slope", fit.slope, 0.5, 0.85)
                .with_samples(cfg.samples * pts.len())
                .with_detail(format!("slope stderr {}", fit.slope_stderr)),
        );
    }
    let gate_n = cfg.n_grid[gate];
    let mut sorted = b_tail.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let probs: Vec<f64> = sorted.iter().map(|x| x.1).collect();
    out.push(
        Verdict::holds("deviation_tail_decreasing", strictly_decreasing(&probs))
            .with_samples(cfg.samples)
            .with_detail(format!("N = {gate_n}, points {sorted:?}")),
    );
    match tail_slope(&sorted) {
        Some(s) => out.push(
            Verdict::at_most("deviation_tail_slope", s, -2.0)
                .with_samples(cfg.samples)
                .with_detail(format!("N = {gate_n}")),
        ),
        None => out.push(
            Verdict::holds("deviation_tail_slope", false)
                .with_samples(cfg.samples)
                .with_detail(format!("fewer than 3 b-values with positive tail mass at N = {gate_n}")),
        ),
    }

    // At level 0 the crossing is the horizontal exit point.
    let (m, n, level, v1) = first.expect("grid is non-empty");
    let d = dims(m, n)?;
    let check = cfg.samples.min(1000);
    let zero = rolling_samples(exec, seed, 100, law, d, check, RollingOptions { level: Some(0) });
    let bad = zero.iter().filter(|r| r.crossing != Some((0, r.exit.e1))).count() as u64;
    out.push(Verdict::exact("level_zero_is_exit", bad).with_samples(check));

    // The exit of the system started at (k, level) has the law of the exit in
    // a fresh stationary system of the remaining size.
    let k = (cfg.tau * m as f64).floor() as usize;
    if k >= m || level >= n {
        return Err(Error::Config("tau leaves no room for the shifted system".into()));
    }
    let shifted: Vec<usize> = v1.iter().map(|&x| (x as usize).saturating_sub(k)).collect();
    let fresh = rolling_samples(
        exec,
        seed,
        101,
        law,
        dims(m - k, n - level)?,
        cfg.samples,
        Default::default(),
    );
    let fresh: Vec<usize> = fresh.iter().map(|r| r.exit.e1).collect();
    let top = shifted.iter().chain(&fresh).copied().max().unwrap_or(0);
    let hist = |xs: &[usize]| {
        let mut h = vec![0u64; top + 1];
        for &x in xs {
            h[x] += 1;
        }
        h
    };
    let chi = chi_square_homogeneity(&hist(&shifted), &hist(&fresh))?;
    out.push(
        Verdict::at_least("shifted_exit_law_p", chi.p_value, LEVEL)
            .with_samples(cfg.samples)
            .with_detail(format!(
                "corner ({k},{level}) in the {m}x{n} system vs a fresh {}x{} system; chi2 {} on {} dof",
                m - k,
                n - level,
                chi.statistic,
                chi.dof
            )),
    );
    Ok(out)
}
