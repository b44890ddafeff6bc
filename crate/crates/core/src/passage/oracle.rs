//! Exhaustive path enumeration, used as ground truth on small rectangles.

use crate::env::Environment;
use crate::error::{Error, Result};

use super::{compute_bulk_passage, Mode, Site};

pub const ENUMERATION_LIMIT: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub value: u32,
    /// Every path attaining `value`, each listed from start to `(m,n)`.
    pub paths: Vec<Vec<Site>>,
}

/// Weight picked up when stepping from `from` to `to`.
#[inline]
pub fn step_gain(env: &Environment, mode: Mode, from: Site, to: Site) -> u32 {
    let diagonal = to.0 == from.0 + 1 && to.1 == from.1 + 1;
    let on_axis = to.0 == 0 || to.1 == 0;
    let collects = match mode {
        Mode::Boundary => diagonal || on_axis,
        Mode::Bulk { .. } => diagonal,
    };
    if collects {
        env.weight(to.0, to.1) as u32
    } else {
        0
    }
}

/// Weight of a path under the collection rule of `mode`.
pub fn path_weight(env: &Environment, mode: Mode, sites: &[Site]) -> u32 {
    sites.windows(2).map(|w| step_gain(env, mode, w[0], w[1])).sum()
}

pub fn enumerate_lpp(env: &Environment, mode: Mode) -> Result<Enumeration> {
    let d = env.dims();
    enumerate_to(env, mode, (d.m, d.n))
}

/// Enumeration towards an arbitrary end point inside the rectangle.
pub fn enumerate_to(env: &Environment, mode: Mode, end: Site) -> Result<Enumeration> {
    let d = env.dims();
    if end.0 > d.m || end.1 > d.n {
        return Err(Error::Site(end.0, end.1));
    }
    let start = match mode {
        Mode::Boundary => (0, 0),
        Mode::Bulk { start } => {
            if start.0 == 0 || start.1 == 0 || start.0 > end.0 || start.1 > end.1 {
                return Err(Error::Site(start.0, start.1));
            }
            start
        }
    };
    let steps = (end.0 - start.0) + (end.1 - start.1);
    if steps > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            steps,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best = Enumeration {
        value: 0,
        paths: Vec::new(),
    };
    let mut path = vec![start];
    walk(env, mode, end, &mut path, 0, &mut best);
    Ok(best)
}

fn walk(env: &Environment, mode: Mode, end: Site, path: &mut Vec<Site>, acc: u32, best: &mut Enumeration) {
    let here = *path.last().unwrap();
    if here == end {
        if acc > best.value || best.paths.is_empty() {
            best.value = acc;
            best.paths.clear();
        }
        if acc == best.value {
            best.paths.push(path.clone());
        }
        return;
    }
    for (dx, dy) in [(1, 0), (0, 1), (1, 1)] {
        let next = (here.0 + dx, here.1 + dy);
        if next.0 > end.0 || next.1 > end.1 {
            continue;
        }
        let gain = step_gain(env, mode, here, next);
        path.push(next);
        walk(env, mode, end, path, acc + gain, best);
        path.pop();
    }
}

/// Passage time written as a maximum over where the path leaves the axes:
/// along the south axis up to `k` then a vertical or diagonal step into row
/// 1, or the same along the west axis, followed by a bulk passage time that
/// does not count its start weight.
pub fn variational_passage(env: &Environment) -> u32 {
    let d = env.dims();
    let mut best = 0;
    let mut s = 0u32;
    for k in 1..=d.m {
        let prev = s;
        s += env.weight(k, 0) as u32;
        let rest = compute_bulk_passage(env, (k, 1)).expect("bulk start").last();
        best = best.max(s + rest).max(prev + env.weight(k, 1) as u32 + rest);
    }
    let mut w = 0u32;
    for k in 1..=d.n {
        let prev = w;
        w += env.weight(0, k) as u32;
        let rest = compute_bulk_passage(env, (1, k)).expect("bulk start").last();
        best = best.max(w + rest).max(prev + env.weight(1, k) as u32 + rest);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::Dims;

    #[test]
    fn one_by_one_zero_has_three_maximal_paths() {
        let env = Environment::from_fn(Dims::new(1, 1).unwrap(), |_, _| false);
        let e = enumerate_lpp(&env, Mode::Boundary).unwrap();
        assert_eq!(e.value, 0);
        assert_eq!(e.paths.len(), 3);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let env = Environment::from_fn(Dims::new(8, 7).unwrap(), |_, _| false);
        assert!(matches!(
            enumerate_lpp(&env, Mode::Boundary),
            Err(Error::TooLarge { .. })
        ));
        assert!(enumerate_lpp(&env, Mode::Bulk { start: (1, 1) }).is_ok());
    }
}
