//! Two-row evaluation for Monte Carlo scans.
//!
//! Keeps only the previous and current row of `G` together with labels
//! propagated along the down-most (and up-most) maximal path predecessors.
//! Memory is `O(m)` and the environment is never materialized when sampling.

use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::env::{Dims, Environment, Law};
use crate::rng::uniform;

use super::CompassIncrements;

/// Exit point of a maximal path: the last axis site it visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Exit {
    pub e1: usize,
    pub e2: usize,
}

impl Exit {
    fn from_label(label: i64) -> Exit {
        if label >= 0 {
            Exit {
                e1: label as usize,
                e2: 0,
            }
        } else {
            Exit {
                e1: 0,
                e2: (-label) as usize,
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RollingOptions {
    /// Row whose entry/exit columns `(v0, v1)` on the down-most path are
    /// recorded.
    pub level: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassageSummary {
    pub g: u32,
    pub compass: CompassIncrements,
    /// Exit of the down-most maximal path.
    pub exit: Exit,
    /// Exit of the up-most maximal path.
    pub exit_up: Exit,
    /// Zeros on the south axis up to the down-most exit,
    /// `sum_{i <= xi_e1} (1 - w_{i,0})`.
    pub south_zeros: u32,
    /// Zeros on the west axis up to the up-most vertical exit.
    pub west_zeros: u32,
    /// `(v0, v1)` at the requested level.
    pub crossing: Option<(usize, usize)>,
}

#[derive(Clone, Copy)]
enum Pred {
    Down,
    Diag,
    Left,
}

struct Kernel {
    m: usize,
    level: Option<usize>,
    g_prev: Vec<u32>,
    g_cur: Vec<u32>,
    down_prev: Vec<i64>,
    down_cur: Vec<i64>,
    up_prev: Vec<i64>,
    up_cur: Vec<i64>,
    cr_prev: Vec<(u32, u32)>,
    cr_cur: Vec<(u32, u32)>,
    south_zero_prefix: Vec<u32>,
    west_zero_prefix: Vec<u32>,
}

impl Kernel {
    fn new(dims: Dims, level: Option<usize>) -> Self {
        let w = dims.width();
        let track = level.is_some();
        Kernel {
            m: dims.m,
            level,
            g_prev: vec![0; w],
            g_cur: vec![0; w],
            down_prev: vec![0; w],
            down_cur: vec![0; w],
            up_prev: vec![0; w],
            up_cur: vec![0; w],
            cr_prev: if track { vec![(0, 0); w] } else { Vec::new() },
            cr_cur: if track { vec![(0, 0); w] } else { Vec::new() },
            south_zero_prefix: vec![0; w],
            west_zero_prefix: Vec::with_capacity(w),
        }
    }

    fn south_row(&mut self, mut weight: impl FnMut(usize) -> u8) {
        self.west_zero_prefix.push(0);
        let _ = weight(0);
        for i in 1..=self.m {
            let w = weight(i);
            self.g_cur[i] = self.g_cur[i - 1] + w as u32;
            self.down_cur[i] = i as i64;
            self.up_cur[i] = i as i64;
            self.south_zero_prefix[i] = self.south_zero_prefix[i - 1] + (1 - w) as u32;
        }
        if self.level == Some(0) {
            for i in 0..=self.m {
                self.cr_cur[i] = (0, i as u32);
            }
        }
    }

    fn row(&mut self, j: usize, mut weight: impl FnMut(usize) -> u8) {
        std::mem::swap(&mut self.g_prev, &mut self.g_cur);
        std::mem::swap(&mut self.down_prev, &mut self.down_cur);
        std::mem::swap(&mut self.up_prev, &mut self.up_cur);
        std::mem::swap(&mut self.cr_prev, &mut self.cr_cur);

        let w0 = weight(0);
        self.g_cur[0] = self.g_prev[0] + w0 as u32;
        self.down_cur[0] = -(j as i64);
        self.up_cur[0] = -(j as i64);
        let wz = *self.west_zero_prefix.last().unwrap() + (1 - w0) as u32;
        self.west_zero_prefix.push(wz);

        let track = self.level.map(|l| j >= l);
        let on_level = self.level == Some(j);
        if let Some(true) = track {
            self.cr_cur[0] = if on_level { (0, 0) } else { self.cr_prev[0] };
        }

        for i in 1..=self.m {
            let w = weight(i);
            let left = self.g_cur[i - 1];
            let down = self.g_prev[i];
            let diag = self.g_prev[i - 1] + w as u32;
            let g = left.max(down).max(diag);
            self.g_cur[i] = g;

            let pd = if g == down {
                Pred::Down
            } else if w == 1 {
                Pred::Diag
            } else {
                Pred::Left
            };
            let pu = if g == left {
                Pred::Left
            } else if w == 1 {
                Pred::Diag
            } else {
                Pred::Down
            };
            self.down_cur[i] = match pd {
                Pred::Down => self.down_prev[i],
                Pred::Diag => self.down_prev[i - 1],
                Pred::Left => self.down_cur[i - 1],
            };
            self.up_cur[i] = match pu {
                Pred::Down => self.up_prev[i],
                Pred::Diag => self.up_prev[i - 1],
                Pred::Left => self.up_cur[i - 1],
            };
            if let Some(true) = track {
                self.cr_cur[i] = if on_level {
                    match pd {
                        Pred::Left => (self.cr_cur[i - 1].0, i as u32),
                        _ => (i as u32, i as u32),
                    }
                } else {
                    match pd {
                        Pred::Down => self.cr_prev[i],
                        Pred::Diag => self.cr_prev[i - 1],
                        Pred::Left => self.cr_cur[i - 1],
                    }
                };
            }
        }
    }

    fn finish(&self, n: usize) -> PassageSummary {
        let m = self.m;
        let g = self.g_cur[m];
        let w = self.g_cur[0];
        let s = if n == 0 { g } else { self.south_total() };
        let exit = Exit::from_label(self.down_cur[m]);
        let exit_up = Exit::from_label(self.up_cur[m]);
        PassageSummary {
            g,
            compass: CompassIncrements {
                w,
                n: g - w,
                e: g - s,
                s,
            },
            exit,
            exit_up,
            south_zeros: self.south_zero_prefix[exit.e1],
            west_zeros: self.west_zero_prefix[exit_up.e2],
            crossing: self.level.map(|_| {
                let (a, b) = self.cr_cur[m];
                (a as usize, b as usize)
            }),
        }
    }

    fn south_total(&self) -> u32 {
        // G_{m,0} = m - zeros on the south axis.
        self.m as u32 - self.south_zero_prefix[self.m]
    }
}

fn run(dims: Dims, opts: RollingOptions, mut weight: impl FnMut(usize, usize) -> u8) -> PassageSummary {
    if let Some(l) = opts.level {
        assert!(l <= dims.n, "level {l} outside 0..={}", dims.n);
    }
    let mut k = Kernel::new(dims, opts.level);
    k.south_row(|i| weight(i, 0));
    for j in 1..=dims.n {
        k.row(j, |i| weight(i, j));
    }
    k.finish(dims.n)
}

/// Rolling evaluation over a materialized environment.
pub fn passage_summary(env: &Environment, opts: RollingOptions) -> PassageSummary {
    run(env.dims(), opts, |i, j| env.weight(i, j))
}

/// Draw the environment row by row from `rng` (same order and thresholds as
/// [`crate::env::sample_environment`]) and evaluate it on the fly.
pub fn sample_passage_summary<R: RngCore + ?Sized>(
    law: Law,
    dims: Dims,
    opts: RollingOptions,
    rng: &mut R,
) -> PassageSummary {
    run(dims, opts, |i, j| (uniform(rng) < law.threshold(i, j)) as u8)
}
