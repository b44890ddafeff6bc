//! One function per experiment. Each takes the validated config, the seed of
//! the current pass and the executor, and returns rows and verdicts.

mod burke;
mod coupling;
mod flat;
mod identity;
mod scan;
mod selftest;
mod tails;

pub(crate) use burke::burke;
pub(crate) use coupling::coupling;
pub(crate) use flat::flat_edge;
pub(crate) use identity::identity;
pub(crate) use scan::{clt, shape_lln, variance_scan};
pub(crate) use selftest::oracle_selftest;
pub(crate) use tails::{exit_tails, path_fluct};

use std::ops::Range;

use crate::env::{Dims, Law};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::harness::config::ExperimentConfig;
use crate::passage::rolling::{sample_passage_summary, PassageSummary, RollingOptions};
use crate::rng::{substream, SampleRng, Stream};
use crate::theory::characteristic_endpoint;

/// Generator for sample `k` of block `block`.
pub(super) fn sample_rng(seed: u64, stream: Stream, block: usize, k: usize) -> SampleRng {
    substream(seed, stream, ((block as u64) << 32) | k as u64)
}

/// Target corner for grid value `n`: characteristic or the square.
pub(super) fn endpoint(cfg: &ExperimentConfig, n: usize) -> Result<(usize, usize)> {
    if cfg.characteristic {
        characteristic_endpoint(cfg.p, cfg.u, n)
    } else {
        Ok((n, n))
    }
}

pub(super) fn dims(m: usize, n: usize) -> Result<Dims> {
    Dims::new(m, n).map_err(|e| Error::Config(e.to_string()))
}

/// Rolling summaries of `samples` independent environments.
pub(super) fn rolling_samples(
    exec: &Executor,
    seed: u64,
    block: usize,
    law: Law,
    dims: Dims,
    samples: usize,
    opts: RollingOptions,
) -> Vec<PassageSummary> {
    exec.map(samples, |k| {
        let mut rng = sample_rng(seed, Stream::Environment, block, k);
        sample_passage_summary(law, dims, opts, &mut rng)
    })
}

/// Split `0..count` into fixed chunks, evaluate `f` on each and return the
/// partial results in chunk order.
pub(super) fn chunked<A, F>(exec: &Executor, count: usize, chunk: usize, f: F) -> Vec<A>
where
    A: Send,
    F: Fn(Range<usize>) -> A + Sync + Send,
{
    let chunks = count.div_ceil(chunk);
    exec.map(chunks, |c| f(c * chunk..((c + 1) * chunk).min(count)))
}

pub(super) fn as_f64<T: Copy + Into<f64>>(xs: impl IntoIterator<Item = T>) -> Vec<f64> {
    xs.into_iter().map(Into::into).collect()
}

/// Standard error of the mean of per-sample influence values.
pub(super) fn influence_stderr(psi: &[f64]) -> f64 {
    let n = psi.len() as f64;
    let mean = psi.iter().sum::<f64>() / n;
    let var = psi.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

/// Two-sided normal quantile for level `alpha / tests` (Bonferroni).
pub(super) fn bonferroni_z(alpha: f64, tests: usize) -> f64 {
    use statrs::distribution::{ContinuousCDF, Normal};
    let nrm = Normal::new(0.0, 1.0).expect("standard normal");
    nrm.inverse_cdf(1.0 - alpha / (2.0 * tests as f64))
}

/// Significance level of every statistical gate.
pub(super) const LEVEL: f64 = 1e-3;
