//! Estimators and tests. Every reduction walks its input in index order so
//! results are bit-reproducible.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
}

pub fn summarize(xs: &[f64]) -> Result<SampleSummary> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 samples, got {n}")));
    }
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let mu4 = m4 / nf;
    // Var(s^2) ~ (mu4 - (n-3)/(n-1) sigma^4) / n
    let var_of_var = (mu4 - (nf - 3.0) / (nf - 1.0) * variance * variance) / nf;
    Ok(SampleSummary {
        count: n,
        mean,
        variance,
        stderr_mean: (variance / nf).sqrt(),
        stderr_variance: var_of_var.max(0.0).sqrt(),
    })
}

/// Sample covariance with a delta-method standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceSummary {
    pub count: usize,
    pub covariance: f64,
    pub stderr: f64,
}

pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<CovarianceSummary> {
    if xs.len() != ys.len() {
        return Err(Error::Data("covariance inputs differ in length".into()));
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::Data(format!("need at least 2 samples, got {n}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let products: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let s: f64 = products.iter().sum();
    let covariance = s / (nf - 1.0);
    let mean_prod = s / nf;
    let spread: f64 = products.iter().map(|p| (p - mean_prod) * (p - mean_prod)).sum::<f64>() / (nf - 1.0);
    Ok(CovarianceSummary {
        count: n,
        covariance,
        stderr: (spread / nf).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `y` on `x`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    let k = points.len();
    if k < 3 {
        return Err(Error::Data(format!("need at least 3 points, got {k}")));
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Data("all x values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|&(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (sse / (kf - 2.0) / sxx).sqrt();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(FitResult {
        slope,
        intercept,
        slope_stderr,
        r_squared,
    })
}

pub fn loglog_slope(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(Error::Data("log-log fit needs strictly positive coordinates".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    linear_fit(&logs)
}

/// Count table with two or three factors, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    shape: Vec<usize>,
    counts: Vec<u64>,
}

impl ContingencyTable {
    pub fn new(shape: Vec<usize>) -> Result<Self> {
        if !(2..=3).contains(&shape.len()) || shape.iter().any(|&s| s < 2) {
            return Err(Error::Data(format!("unsupported table shape {shape:?}")));
        }
        let len = shape.iter().product();
        Ok(ContingencyTable {
            shape,
            counts: vec![0; len],
        })
    }

    pub fn from_2d(rows: &[Vec<u64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut t = ContingencyTable::new(vec![r, c])?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Data("ragged table".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                t.counts[i * c + j] = v;
            }
        }
        Ok(t)
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn add(&mut self, idx: &[usize]) {
        let k = self.offset(idx);
        self.counts[k] += 1;
    }

    pub fn get(&self, idx: &[usize]) -> u64 {
        self.counts[self.offset(idx)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn marginal(&self, axis: usize) -> Vec<u64> {
        let mut out = vec![0u64; self.shape[axis]];
        for (flat, &c) in self.counts.iter().enumerate() {
            out[self.unravel(flat)[axis]] += c;
        }
        out
    }

    fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.shape.len()];
        for a in (0..self.shape.len()).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson test of (mutual) independence against the product of marginals.
pub fn chi_square_independence(table: &ContingencyTable) -> Result<ChiSquare> {
    let total = table.total() as f64;
    if total == 0.0 {
        return Err(Error::Data("empty table".into()));
    }
    let margins: Vec<Vec<u64>> = (0..table.shape.len()).map(|a| table.marginal(a)).collect();
    let mut statistic = 0.0;
    for (flat, &obs) in table.counts.iter().enumerate() {
        let idx = table.unravel(flat);
        let mut expected = total;
        for (a, &i) in idx.iter().enumerate() {
            expected *= margins[a][i] as f64 / total;
        }
        if expected < 5.0 {
            return Err(Error::Data(format!("sparse table: expected count {expected:.3} < 5")));
        }
        let d = obs as f64 - expected;
        statistic += d * d / expected;
    }
    let cells: usize = table.shape.iter().product();
    let dof = cells - 1 - table.shape.iter().map(|s| s - 1).sum::<usize>();
    let p_value = chi_square_sf(statistic, dof);
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
    })
}

pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    ChiSquared::new(dof as f64).map(|d| d.sf(statistic)).unwrap_or(f64::NAN)
}

/// Do two count vectors over the same categories come from one law? Adjacent
/// categories are pooled until every expected count is at least 5.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    if a.len() != b.len() {
        return Err(Error::Data("category counts differ in length".into()));
    }
    let (ta, tb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    if ta == 0.0 || tb == 0.0 {
        return Err(Error::Data("empty sample".into()));
    }
    let small = ta.min(tb) / (ta + tb);
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut cur = (0u64, 0u64);
    for (&x, &y) in a.iter().zip(b) {
        cur.0 += x;
        cur.1 += y;
        if (cur.0 + cur.1) as f64 * small >= 5.0 {
            bins.push(cur);
            cur = (0, 0);
        }
    }
    if cur.0 + cur.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }
    if bins.len() < 2 {
        return Ok(ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        });
    }
    let rows = vec![bins.iter().map(|b| b.0).collect(), bins.iter().map(|b| b.1).collect()];
    chi_square_independence(&ContingencyTable::from_2d(&rows)?)
}

/// Kolmogorov-Smirnov distance between the empirical law of `xs` and `cdf`.
pub fn ks_statistic(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let n = xs.len();
    if n < 100 {
        return Err(Error::Data(format!("need at least 100 samples, got {n}")));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k + 1) as f64 / nf - f).max(f - k as f64 / nf);
    }
    Ok(d)
}

/// Kolmogorov-Smirnov distance for integer-valued samples against the
/// continuous `cdf` discretized at half-integers, `P(X <= k) = cdf(k + 1/2)`.
pub fn ks_statistic_lattice(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let n = xs.len();
    if n < 100 {
        return Err(Error::Data(format!("need at least 100 samples, got {n}")));
    }
    if xs.iter().any(|x| x.fract() != 0.0) {
        return Err(Error::Data("lattice KS needs integer-valued samples".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let (lo, hi) = (sorted[0] as i64, sorted[n - 1] as i64);
    let nf = n as f64;
    let mut d = cdf(lo as f64 - 0.5);
    let mut idx = 0;
    for k in lo..=hi {
        while idx < n && sorted[idx] as i64 <= k {
            idx += 1;
        }
        d = d.max((idx as f64 / nf - cdf(k as f64 + 0.5)).abs());
    }
    Ok(d)
}

/// Empirical quantile by linear interpolation between order statistics.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < sorted.len() {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    } else {
        sorted[i]
    }
}

pub fn normal_cdf(x: f64, mean: f64, sd: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-(x - mean) / (sd * std::f64::consts::SQRT_2))
}

/// Fraction of `xs` strictly greater than `t`.
pub fn exceedance(xs: &[f64], t: f64) -> f64 {
    xs.iter().filter(|&&x| x > t).count() as f64 / xs.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn summary_basics() {
        let s = summarize(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!((s.mean, s.variance), (0.0, 0.0));
        let s = summarize(&[0.0, 1.0]).unwrap();
        assert_eq!((s.mean, s.variance), (0.5, 0.5));
        assert!(summarize(&[1.0]).is_err());
    }

    #[test]
    fn fits() {
        let pts: Vec<(f64, f64)> = [64.0f64, 128.0, 256.0]
            .iter()
            .map(|&x| (x, x.powf(2.0 / 3.0)))
            .collect();
        assert_abs_diff_eq!(loglog_slope(&pts).unwrap().slope, 2.0 / 3.0, epsilon = 1e-12);
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 5.0, 9.0].iter().map(|&x| (x, 3.5 * x)).collect();
        assert_abs_diff_eq!(loglog_slope(&pts).unwrap().slope, 1.0, epsilon = 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(loglog_slope(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn chi_square_proportional_table_is_zero() {
        let t = ContingencyTable::from_2d(&[vec![10, 20], vec![30, 60]]).unwrap();
        let c = chi_square_independence(&t).unwrap();
        assert_abs_diff_eq!(c.statistic, 0.0, epsilon = 1e-12);
        assert_eq!(c.dof, 1);
        assert_abs_diff_eq!(c.p_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn chi_square_three_way_dof() {
        let mut t = ContingencyTable::new(vec![2, 2, 2]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for _ in 0..10 {
                        t.add(&[a, b, c]);
                    }
                }
            }
        }
        let c = chi_square_independence(&t).unwrap();
        assert_eq!(c.dof, 4);
        assert_abs_diff_eq!(c.statistic, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn sparse_table_rejected() {
        let t = ContingencyTable::from_2d(&[vec![1, 2], vec![3, 4]]).unwrap();
        assert!(chi_square_independence(&t).is_err());
    }

    #[test]
    fn ks_constant_sample() {
        let xs = vec![0.0; 200];
        let d = ks_statistic(&xs, |x| normal_cdf(x, 0.0, 1.0)).unwrap();
        assert!(d >= 0.5);
        assert!(ks_statistic(&xs[..50], |x| x).is_err());
    }

    #[test]
    fn normal_cdf_values() {
        assert_abs_diff_eq!(normal_cdf(0.0, 0.0, 1.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(normal_cdf(1.959963984540054, 0.0, 1.0), 0.975, epsilon = 1e-9);
    }
}
