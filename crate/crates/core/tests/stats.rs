use approx::assert_abs_diff_eq;
use hammersley::rng::{bernoulli, substream, uniform, Stream};
use hammersley::stats::{
    chi_square_homogeneity, chi_square_independence, covariance, ks_statistic, ks_statistic_lattice, loglog_slope,
    normal_cdf, quantile, summarize, ContingencyTable,
};
use statrs::distribution::{ContinuousCDF, Normal};

// Null rejection rates should sit near the nominal level.
const REPLICATES: u64 = 400;

fn rejection_rate(mut test: impl FnMut(u64) -> bool) -> f64 {
    (0..REPLICATES).filter(|&r| test(r)).count() as f64 / REPLICATES as f64
}

#[test]
fn independence_test_is_calibrated() {
    let rate = rejection_rate(|r| {
        let mut rng = substream(5, Stream::Auxiliary, r);
        let mut t = ContingencyTable::new(vec![2, 3]).unwrap();
        for _ in 0..500 {
            let a = bernoulli(&mut rng, 0.4) as usize;
            let b = (uniform(&mut rng) * 3.0) as usize;
            t.add(&[a, b]);
        }
        chi_square_independence(&t).unwrap().p_value < 0.05
    });
    assert!((0.025..=0.08).contains(&rate), "rate {rate}");
}

#[test]
fn independence_test_detects_dependence() {
    let mut rng = substream(6, Stream::Auxiliary, 0);
    let mut t = ContingencyTable::new(vec![2, 2]).unwrap();
    for _ in 0..2000 {
        let a = bernoulli(&mut rng, 0.5);
        let b = if bernoulli(&mut rng, 0.8) { a } else { !a };
        t.add(&[a as usize, b as usize]);
    }
    assert!(chi_square_independence(&t).unwrap().p_value < 1e-10);
}

#[test]
fn homogeneity_test_is_calibrated() {
    let rate = rejection_rate(|r| {
        let mut rng = substream(7, Stream::Auxiliary, r);
        let mut draw = || {
            let mut c = vec![0u64; 8];
            for _ in 0..400 {
                c[(0..7).take_while(|_| bernoulli(&mut rng, 0.45)).count()] += 1;
            }
            c
        };
        let (a, b) = (draw(), draw());
        chi_square_homogeneity(&a, &b).unwrap().p_value < 0.05
    });
    assert!((0.025..=0.08).contains(&rate), "rate {rate}");
}

#[test]
fn ks_matches_the_asymptotic_critical_value() {
    // sqrt(n) D has the Kolmogorov law; its 95% point is about 1.358.
    let n = 1000;
    let rate = rejection_rate(|r| {
        let mut rng = substream(8, Stream::Auxiliary, r);
        let xs: Vec<f64> = (0..n).map(|_| uniform(&mut rng)).collect();
        ks_statistic(&xs, |x| x.clamp(0.0, 1.0)).unwrap() * (n as f64).sqrt() > 1.358
    });
    assert!((0.025..=0.08).contains(&rate), "rate {rate}");
}

#[test]
fn ks_normal_against_statrs() {
    let mut rng = substream(9, Stream::Auxiliary, 0);
    let xs: Vec<f64> = (0..2000).map(|_| 2.0 * uniform(&mut rng) - 1.0).collect();
    let d = ks_statistic(&xs, |x| normal_cdf(x, 0.0, 0.5)).unwrap();
    let reference = Normal::new(0.0, 0.5).unwrap();
    let d_ref = ks_statistic(&xs, |x| reference.cdf(x)).unwrap();
    assert_abs_diff_eq!(d, d_ref, epsilon = 1e-12);
    assert!(d > 0.05);
}

#[test]
fn lattice_ks_on_a_binomial() {
    // Bin(400, 1/2) against its normal approximation with continuity correction.
    let mut rng = substream(10, Stream::Auxiliary, 0);
    let xs: Vec<f64> = (0..4000)
        .map(|_| (0..400).filter(|_| bernoulli(&mut rng, 0.5)).count() as f64)
        .collect();
    let d = ks_statistic_lattice(&xs, |x| normal_cdf(x, 200.0, 10.0)).unwrap();
    assert!(d < 0.03, "{d}");
    let raw = ks_statistic(&xs, |x| normal_cdf(x, 200.0, 10.0)).unwrap();
    assert!(raw > d);
    assert!(ks_statistic_lattice(&[0.5; 200], |x| x).is_err());
}

#[test]
fn loglog_recovers_a_power_law() {
    let pts: Vec<(f64, f64)> = [64.0, 128.0, 256.0, 512.0, 1024.0]
        .iter()
        .map(|&n: &f64| (n, 3.0 * n.powf(2.0 / 3.0)))
        .collect();
    let fit = loglog_slope(&pts).unwrap();
    assert_abs_diff_eq!(fit.slope, 2.0 / 3.0, epsilon = 1e-12);
    assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
    assert!(fit.slope_stderr < 1e-10);
    assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
}

#[test]
fn summaries_on_known_data() {
    let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
    let s = summarize(&xs).unwrap();
    assert_abs_diff_eq!(s.mean, 5.0);
    assert_abs_diff_eq!(s.variance, 32.0 / 7.0, epsilon = 1e-12);
    let c = covariance(&xs, &xs).unwrap();
    assert_abs_diff_eq!(c.covariance, s.variance, epsilon = 1e-12);
    assert_abs_diff_eq!(quantile(&xs, 0.5), 4.5);
    assert_abs_diff_eq!(quantile(&xs, 1.0), 9.0);
}

#[test]
fn variance_stderr_is_honest() {
    // Spread of sample variances across replicates vs the reported stderr.
    let mut vars = Vec::new();
    let mut reported = Vec::new();
    for r in 0..300 {
        let mut rng = substream(12, Stream::Auxiliary, r);
        let xs: Vec<f64> = (0..400)
            .map(|_| (0..10).filter(|_| bernoulli(&mut rng, 0.3)).count() as f64)
            .collect();
        let s = summarize(&xs).unwrap();
        vars.push(s.variance);
        reported.push(s.stderr_variance);
    }
    let spread = summarize(&vars).unwrap().variance.sqrt();
    let mean_reported = reported.iter().sum::<f64>() / reported.len() as f64;
    assert!(
        (mean_reported / spread - 1.0).abs() < 0.15,
        "{mean_reported} vs {spread}"
    );
    assert_abs_diff_eq!(summarize(&vars).unwrap().mean, 2.1, epsilon = 0.02);
}
