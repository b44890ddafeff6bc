//! The reversed environment is again a stationary boundary environment:
//! Ber(u) south, Ber(l) west, Ber(p) bulk, all independent.

use hammersley::env::{sample_environment, Dims, Params};
use hammersley::passage::{alpha_field, compute_passage, reversal_violations, reverse};
use hammersley::rng::{substream, Stream};
use hammersley::stats::chi_square_sf;

fn product_law(params: Params, sites: &[(usize, usize)], code: usize) -> f64 {
    sites
        .iter()
        .enumerate()
        .map(|(b, &(i, j))| {
            let q = match (i, j) {
                (_, 0) => params.u(),
                (0, _) => params.west(),
                _ => params.p(),
            };
            if code >> b & 1 == 1 {
                q
            } else {
                1.0 - q
            }
        })
        .product()
}

fn reversed_law_p_value(p: f64, u: f64, samples: usize, seed: u64) -> f64 {
    let params = Params::new(p, u).unwrap();
    let dims = Dims::new(2, 2).unwrap();
    let sites: Vec<(usize, usize)> = (0..=2)
        .flat_map(|j| (0..=2).map(move |i| (i, j)))
        .filter(|&s| s != (0, 0))
        .collect();
    let mut counts = vec![0u64; 1 << sites.len()];
    for k in 0..samples as u64 {
        let mut erng = substream(seed, Stream::Environment, k);
        let mut arng = substream(seed, Stream::Alpha, k);
        let env = sample_environment(params, dims, &mut erng);
        let f = compute_passage(&env);
        let alpha = alpha_field(&f, &env, &mut arng);
        let rev = reverse(&f, &env, &alpha);
        assert_eq!(reversal_violations(&f, &alpha, &rev), 0);
        let star = rev.environment();
        let code = sites
            .iter()
            .enumerate()
            .fold(0, |acc, (b, &(i, j))| acc | (star.weight(i, j) as usize) << b);
        counts[code] += 1;
    }
    let n = samples as f64;
    let stat: f64 = counts
        .iter()
        .enumerate()
        .map(|(code, &o)| {
            let e = n * product_law(params, &sites, code);
            (o as f64 - e).powi(2) / e
        })
        .sum();
    chi_square_sf(stat, counts.len() - 1)
}

#[test]
fn reversed_environment_has_the_forward_law() {
    for (p, u, seed) in [(0.5, 0.5, 1), (0.4, 0.6, 2), (0.7, 0.3, 3)] {
        let pv = reversed_law_p_value(p, u, 200_000, seed);
        assert!(pv > 1e-4, "p={p} u={u}: goodness-of-fit p-value {pv}");
    }
}

#[test]
fn reversal_is_exact_on_larger_rectangles() {
    let params = Params::new(0.35, 0.55).unwrap();
    for k in 0..200 {
        let mut erng = substream(11, Stream::Environment, k);
        let mut arng = substream(11, Stream::Alpha, k);
        let env = sample_environment(params, Dims::new(9, 13).unwrap(), &mut erng);
        let f = compute_passage(&env);
        let alpha = alpha_field(&f, &env, &mut arng);
        let rev = reverse(&f, &env, &alpha);
        assert_eq!(reversal_violations(&f, &alpha, &rev), 0);
        assert_eq!(compute_passage(rev.environment()).last(), f.last());
    }
}
