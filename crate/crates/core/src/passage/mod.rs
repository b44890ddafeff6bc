//! Passage times, increments, the alpha field and the reversed process.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::env::{Dims, Environment};
use crate::error::{Error, Result};
use crate::rng::bernoulli;

pub mod burke;
pub mod oracle;
pub mod rolling;

pub use oracle::{enumerate_lpp, variational_passage, Enumeration};
pub use rolling::{passage_summary, sample_passage_summary, PassageSummary, RollingOptions};

pub type Site = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Paths start at the origin and collect axis weights while on an axis.
    Boundary,
    /// Paths start at `start`, collect only bulk weights entered diagonally.
    Bulk { start: Site },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageField {
    dims: Dims,
    mode: Mode,
    origin: Site,
    stride: usize,
    g: Vec<u32>,
}

impl PassageField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Lower-left corner of the region the field covers.
    pub fn origin(&self) -> Site {
        self.origin
    }

    #[inline]
    pub fn g(&self, i: usize, j: usize) -> u32 {
        debug_assert!(i >= self.origin.0 && j >= self.origin.1);
        self.g[(j - self.origin.1) * self.stride + (i - self.origin.0)]
    }

    /// `G(m,n)`.
    pub fn last(&self) -> u32 {
        self.g(self.dims.m, self.dims.n)
    }

    /// `I_{i,j} = G_{i,j} - G_{i-1,j}`.
    #[inline]
    pub fn i_inc(&self, i: usize, j: usize) -> u8 {
        (self.g(i, j) - self.g(i - 1, j)) as u8
    }

    /// `J_{i,j} = G_{i,j} - G_{i,j-1}`.
    #[inline]
    pub fn j_inc(&self, i: usize, j: usize) -> u8 {
        (self.g(i, j) - self.g(i, j - 1)) as u8
    }
}

/// Passage field of the boundary model: axis partial sums, then the
/// three-way max recursion in the bulk.
pub fn compute_passage(env: &Environment) -> PassageField {
    let d = env.dims();
    let w = d.width();
    let mut g = vec![0u32; d.len()];
    for i in 1..=d.m {
        g[i] = g[i - 1] + env.weight(i, 0) as u32;
    }
    for j in 1..=d.n {
        let row = j * w;
        g[row] = g[row - w] + env.weight(0, j) as u32;
        for i in 1..=d.m {
            let diag = g[row - w + i - 1] + env.weight(i, j) as u32;
            g[row + i] = g[row + i - 1].max(g[row - w + i]).max(diag);
        }
    }
    PassageField {
        dims: d,
        mode: Mode::Boundary,
        origin: (0, 0),
        stride: w,
        g,
    }
}

/// Passage field started at a bulk site; the start weight never counts and
/// only diagonal entries collect.
pub fn compute_bulk_passage(env: &Environment, start: Site) -> Result<PassageField> {
    let d = env.dims();
    let (a, b) = start;
    if a == 0 || b == 0 || a > d.m || b > d.n {
        return Err(Error::Site(a, b));
    }
    let w = d.m - a + 1;
    let h = d.n - b + 1;
    let mut g = vec![0u32; w * h];
    for y in 1..h {
        for x in 1..w {
            let diag = g[(y - 1) * w + x - 1] + env.weight(a + x, b + y) as u32;
            g[y * w + x] = g[y * w + x - 1].max(g[(y - 1) * w + x]).max(diag);
        }
    }
    Ok(PassageField {
        dims: d,
        mode: Mode::Bulk { start },
        origin: start,
        stride: w,
        g,
    })
}

/// One cell of the increment recursion: returns `(I, J)` from the weight, the
/// incoming vertical increment on the west and horizontal increment on the
/// south.
#[inline]
pub fn increment_step(omega: u8, j_west: u8, i_south: u8) -> (u8, u8) {
    let top = omega.max(j_west).max(i_south);
    (top - j_west, top - i_south)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompassIncrements {
    pub w: u32,
    pub n: u32,
    pub e: u32,
    pub s: u32,
}

pub fn compass(field: &PassageField) -> CompassIncrements {
    let d = field.dims();
    let o = field.origin();
    let top = field.last();
    let w = field.g(o.0, d.n);
    let s = field.g(d.m, o.1);
    CompassIncrements {
        w,
        n: top - w,
        e: top - s,
        s,
    }
}

/// Alpha bits on `[0..m-1] x [0..n-1]`; `get(i-1, j-1)` is the bit attached
/// to cell `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaField {
    m: usize,
    n: usize,
    bits: Vec<u8>,
}

impl AlphaField {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[j * self.m + i]
    }

    pub fn extents(&self) -> (usize, usize) {
        (self.m, self.n)
    }
}

/// Classification of the triple `(w_{i,j}, I_{i,j-1}, J_{i-1,j})` feeding
/// the alpha bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaCase {
    Forced,
    Zero,
    Fresh,
}

#[inline]
pub fn alpha_case(omega: u8, i_south: u8, j_west: u8) -> AlphaCase {
    match (omega, i_south, j_west) {
        (_, 1, 1) => AlphaCase::Forced,
        (0, 0, 0) => AlphaCase::Zero,
        _ => AlphaCase::Fresh,
    }
}

pub fn alpha_field<R: RngCore + ?Sized>(field: &PassageField, env: &Environment, rng: &mut R) -> AlphaField {
    let d = env.dims();
    let p = env.law().bulk;
    let mut bits = Vec::with_capacity(d.m * d.n);
    for j in 1..=d.n {
        for i in 1..=d.m {
            let bit = match alpha_case(env.weight(i, j), field.i_inc(i, j - 1), field.j_inc(i - 1, j)) {
                AlphaCase::Forced => 1,
                AlphaCase::Zero => 0,
                AlphaCase::Fresh => bernoulli(rng, p) as u8,
            };
            bits.push(bit);
        }
    }
    AlphaField { m: d.m, n: d.n, bits }
}

/// The process seen from `(m,n)` looking back: `G*_{i,j} = G_{m,n} - G_{m-i,n-j}`,
/// with environment built from the north/east increments on the axes and the
/// alpha bits in the bulk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReversedField {
    dims: Dims,
    g_star: Vec<u32>,
    env: Environment,
}

impl ReversedField {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn g(&self, i: usize, j: usize) -> u32 {
        self.g_star[self.dims.index(i, j)]
    }

    /// `I*_{i,j} = G*_{i,j} - G*_{i-1,j}`.
    pub fn i_inc(&self, i: usize, j: usize) -> u8 {
        (self.g(i, j) - self.g(i - 1, j)) as u8
    }

    /// `J*_{i,j} = G*_{i,j} - G*_{i,j-1}`.
    pub fn j_inc(&self, i: usize, j: usize) -> u8 {
        (self.g(i, j) - self.g(i, j - 1)) as u8
    }

    /// Environment `w*` of the reversed process.
    pub fn environment(&self) -> &Environment {
        &self.env
    }
}

pub fn reverse(field: &PassageField, env: &Environment, alpha: &AlphaField) -> ReversedField {
    let d = env.dims();
    let top = field.last();
    let mut g_star = vec![0u32; d.len()];
    for j in 0..=d.n {
        for i in 0..=d.m {
            g_star[d.index(i, j)] = top - field.g(d.m - i, d.n - j);
        }
    }
    let star = Environment::from_fn(d, |i, j| match (i, j) {
        (_, 0) => field.i_inc(d.m - i + 1, d.n) == 1,
        (0, _) => field.j_inc(d.m, d.n - j + 1) == 1,
        _ => alpha.get(d.m - i, d.n - j) == 1,
    });
    ReversedField {
        dims: d,
        g_star,
        env: star,
    }
}

/// Count cells where the reversed process breaks one of its defining
/// identities: the index maps for `I*`, `J*`, the increment recursion driven
/// by `w*`, and agreement of `G*` with the passage field of `w*`.
pub fn reversal_violations(field: &PassageField, alpha: &AlphaField, rev: &ReversedField) -> usize {
    let d = rev.dims();
    let (m, n) = (d.m, d.n);
    let star = rev.environment();
    let mut bad = 0;
    for j in 0..=n {
        for i in 0..=m {
            if rev.g(i, j) != field.last() - field.g(m - i, n - j) {
                bad += 1;
            }
            if i >= 1 && rev.i_inc(i, j) != field.i_inc(m - i + 1, n - j) {
                bad += 1;
            }
            if j >= 1 && rev.j_inc(i, j) != field.j_inc(m - i, n - j + 1) {
                bad += 1;
            }
            if i >= 1 && j >= 1 {
                if star.weight(i, j) != alpha.get(m - i, n - j) {
                    bad += 1;
                }
                let (ii, jj) = increment_step(star.weight(i, j), rev.j_inc(i - 1, j), rev.i_inc(i, j - 1));
                if ii != rev.i_inc(i, j) || jj != rev.j_inc(i, j) {
                    bad += 1;
                }
            }
        }
    }
    let recomputed = compute_passage(star);
    for j in 0..=n {
        for i in 0..=m {
            if recomputed.g(i, j) != rev.g(i, j) {
                bad += 1;
            }
        }
    }
    bad
}

/// Total axis weight up to the boundary site `w`.
pub fn boundary_sum(env: &Environment, w: Site) -> Result<u32> {
    let d = env.dims();
    let (x, y) = w;
    if (x != 0 && y != 0) || x > d.m || y > d.n {
        return Err(Error::Site(x, y));
    }
    let s: u32 = (1..=x).map(|i| env.weight(i, 0) as u32).sum();
    let t: u32 = (1..=y).map(|j| env.weight(0, j) as u32).sum();
    Ok(s + t)
}
