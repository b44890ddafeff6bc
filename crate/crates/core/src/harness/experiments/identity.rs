use serde_json::json;

use super::{as_f64, dims, endpoint, influence_stderr, rolling_samples, sample_rng};
use crate::env::{perturb_south, sample_environment, PerturbationSpec};
use crate::error::Result;
use crate::exec::Executor;
use crate::harness::config::ExperimentConfig;
use crate::harness::result::{row, Outcome, Verdict};
use crate::passage::rolling::passage_summary;
use crate::rng::Stream;
use crate::stats::{covariance, linear_fit, summarize};
use crate::theory::{variance_identity_rhs, variance_identity_rhs_east};

const EPSILONS: [f64; 3] = [0.02, 0.01, 0.005];

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn identity(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let params = cfg.params()?;
    let (p, u, l) = (params.p(), params.u(), params.west());
    let (m, n) = endpoint(cfg, cfg.n_grid[0])?;
    let d = dims(m, n)?;
    let runs = rolling_samples(exec, seed, 0, params.law(), d, cfg.samples, Default::default());
    let g = as_f64(runs.iter().map(|r| r.g));
    let vg = summarize(&g)?;
    let mut out = Outcome::default();

    if u >= 1.0 {
        let rhs = variance_identity_rhs(p, u, m, n, 0.0);
        out.push_row(row([
            ("m", json!(m)),
            ("n", json!(n)),
            ("samples", json!(cfg.samples)),
            ("var_G", json!(vg.variance)),
            ("rhs", json!(rhs)),
        ]));
        let bad = (vg.variance != 0.0) as u64 + (rhs != 0.0) as u64;
        out.push(Verdict::exact("degenerate_identity", bad).with_samples(cfg.samples));
        return Ok(out);
    }

    let v = u * (1.0 - u);
    let s = as_f64(runs.iter().map(|r| r.compass.s));
    let north = as_f64(runs.iter().map(|r| r.compass.n));
    let w = as_f64(runs.iter().map(|r| r.compass.w));
    let east = as_f64(runs.iter().map(|r| r.compass.e));
    let sz = as_f64(runs.iter().map(|r| r.south_zeros));
    let wz = as_f64(runs.iter().map(|r| r.west_zeros));
    let gm = mean(&g);

    // North form.
    let a_hat = mean(&sz) / (1.0 - u);
    let cov_sn = covariance(&s, &north)?;
    let a_cov = cov_sn.covariance / v;
    let rhs = variance_identity_rhs(p, u, m, n, a_hat);
    let psi: Vec<f64> = g.iter().zip(&sz).map(|(x, z)| (x - gm).powi(2) - 2.0 * u * z).collect();
    let res_se = influence_stderr(&psi);
    let (sm, nm) = (mean(&s), mean(&north));
    let psi_a: Vec<f64> = (0..g.len())
        .map(|k| sz[k] / (1.0 - u) - (s[k] - sm) * (north[k] - nm) / v)
        .collect();
    let a_se = influence_stderr(&psi_a);

    // East form.
    let a_east = -l * mean(&wz) / v;
    let cov_we = covariance(&w, &east)?;
    let a_east_cov = -cov_we.covariance / v;
    let rhs_east = variance_identity_rhs_east(p, u, m, n, a_east);
    let psi_e: Vec<f64> = g.iter().zip(&wz).map(|(x, z)| (x - gm).powi(2) + 2.0 * l * z).collect();
    let res_east_se = influence_stderr(&psi_e);
    let (wm, em) = (mean(&w), mean(&east));
    let psi_ae: Vec<f64> = (0..g.len())
        .map(|k| -l * wz[k] / v + (w[k] - wm) * (east[k] - em) / v)
        .collect();
    let ae_se = influence_stderr(&psi_ae);

    out.push_row(row([
        ("form", json!("north")),
        ("m", json!(m)),
        ("n", json!(n)),
        ("samples", json!(cfg.samples)),
        ("var_G", json!(vg.variance)),
        ("var_stderr", json!(vg.stderr_variance)),
        ("A_exit", json!(a_hat)),
        ("A_cov", json!(a_cov)),
        ("A_stderr", json!(a_se)),
        ("rhs", json!(rhs)),
        ("residual", json!(vg.variance - rhs)),
        ("residual_stderr", json!(res_se)),
    ]));
    out.push_row(row([
        ("form", json!("east")),
        ("m", json!(m)),
        ("n", json!(n)),
        ("samples", json!(cfg.samples)),
        ("var_G", json!(vg.variance)),
        ("var_stderr", json!(vg.stderr_variance)),
        ("A_exit", json!(a_east)),
        ("A_cov", json!(a_east_cov)),
        ("A_stderr", json!(ae_se)),
        ("rhs", json!(rhs_east)),
        ("residual", json!(vg.variance - rhs_east)),
        ("residual_stderr", json!(res_east_se)),
    ]));
    let z = |x: f64, se: f64| x.abs() / se;
    out.push(
        Verdict::at_most("identity_residual_z", z(vg.variance - rhs, res_se), 3.0)
            .with_samples(cfg.samples)
            .with_detail(format!("Var {} vs rhs {rhs}", vg.variance)),
    );
    out.push(
        Verdict::at_most("estimator_agreement_z", z(a_hat - a_cov, a_se), 3.0)
            .with_samples(cfg.samples)
            .with_detail(format!("exit functional {a_hat} vs covariance {a_cov}")),
    );
    out.push(
        Verdict::at_most("east_residual_z", z(vg.variance - rhs_east, res_east_se), 3.0)
            .with_samples(cfg.samples)
            .with_detail(format!("Var {} vs rhs {rhs_east}", vg.variance)),
    );
    out.push(
        Verdict::at_most("east_estimator_agreement_z", z(a_east - a_east_cov, ae_se), 3.0)
            .with_samples(cfg.samples)
            .with_detail(format!("exit functional {a_east} vs covariance {a_east_cov}")),
    );

    // Finite-epsilon perturbation of the south axis, extrapolated to 0.
    let eps: Vec<f64> = EPSILONS.iter().copied().filter(|e| u + e < 1.0).collect();
    if eps.len() >= 2 {
        let deltas: Vec<Vec<f64>> = exec.map(cfg.samples, |k| {
            let mut rng = sample_rng(seed, Stream::Environment, 1, k);
            let env = sample_environment(params, d, &mut rng);
            let base = passage_summary(&env, Default::default()).g as f64;
            eps.iter()
                .enumerate()
                .map(|(e, &x)| {
                    let mut aux = sample_rng(seed, Stream::South, e, k);
                    let pert =
                        perturb_south(&env, PerturbationSpec::south(x), &mut aux).expect("epsilon validated above");
                    passage_summary(&pert, Default::default()).g as f64 - base
                })
                .collect()
        });
        let mut pts = Vec::new();
        for (e, &x) in eps.iter().enumerate() {
            let col: Vec<f64> = deltas.iter().map(|r| r[e] / x).collect();
            let s = summarize(&col)?;
            // The limit of E[dN]/eps is Cov(S, N)/(u(1-u)).
            out.push_row(row([
                ("form", json!("perturbation")),
                ("m", json!(m)),
                ("n", json!(n)),
                ("samples", json!(cfg.samples)),
                ("epsilon", json!(x)),
                ("A_exit", json!(s.mean)),
                ("A_stderr", json!(s.stderr_mean)),
            ]));
            pts.push((x, s.mean));
        }
        let intercept = if pts.len() >= 3 {
            linear_fit(&pts)?.intercept
        } else {
            let ((x0, y0), (x1, y1)) = (pts[0], pts[1]);
            y0 - x0 * (y1 - y0) / (x1 - x0)
        };
        out.push(
            Verdict::report("perturbation_extrapolated", intercept)
                .with_samples(cfg.samples)
                .with_detail(format!(
                    "linear extrapolation in epsilon; exit functional gives {a_hat}"
                )),
        );
    }
    Ok(out)
}
