//! Paths on the lattice: maximal paths, exit points, level crossings, the
//! competition interface and the cluster boundary.

use serde::{Deserialize, Serialize};

use crate::env::{Dims, Environment};
use crate::error::{Error, Result};
use crate::passage::oracle::{enumerate_to, path_weight};
use crate::passage::rolling::Exit;
use crate::passage::{Mode, PassageField, Site};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Maximal,
    Interface,
    ClusterBoundary,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePath {
    pub sites: Vec<Site>,
    pub kind: PathKind,
}

impl LatticePath {
    /// Every step is `e1`, `e2` or `e1 + e2`.
    pub fn is_admissible(&self) -> bool {
        self.sites.windows(2).all(|w| {
            let dx = w[1].0 as isize - w[0].0 as isize;
            let dy = w[1].1 as isize - w[0].1 as isize;
            matches!((dx, dy), (1, 0) | (0, 1) | (1, 1))
        })
    }

    pub fn end(&self) -> Site {
        *self.sites.last().expect("path has at least one site")
    }

    /// Collected weight under the boundary-model rule.
    pub fn weight(&self, env: &Environment) -> u32 {
        path_weight(env, Mode::Boundary, &self.sites)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Horizontal,
    Vertical,
}

/// Exit point and level crossings of one path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStats {
    pub xi_e1: usize,
    pub xi_e2: usize,
    pub v0: usize,
    pub v1: usize,
    pub w0: usize,
    pub w1: usize,
}

pub fn path_stats(path: &LatticePath, row: usize, column: usize) -> Result<PathStats> {
    let exit = exit_point(path);
    let (v0, v1) = level_crossings(path, row, Axis::Horizontal)?;
    let (w0, w1) = level_crossings(path, column, Axis::Vertical)?;
    Ok(PathStats {
        xi_e1: exit.e1,
        xi_e2: exit.e2,
        v0,
        v1,
        w0,
        w1,
    })
}

/// Backward from `(m,n)`: down if `J = 0`, else diagonal if `w = 1`, else
/// left; once on an axis, straight to the origin.
pub fn downmost_maximal_path(field: &PassageField, env: &Environment) -> LatticePath {
    backward_path(field, env, true)
}

/// Mirror image of the down-most rule: left if `I = 0`, else diagonal if
/// `w = 1`, else down.
pub fn upmost_maximal_path(field: &PassageField, env: &Environment) -> LatticePath {
    backward_path(field, env, false)
}

fn backward_path(field: &PassageField, env: &Environment, down_first: bool) -> LatticePath {
    let d = field.dims();
    let (mut i, mut j) = (d.m, d.n);
    let mut sites = vec![(i, j)];
    while i > 0 && j > 0 {
        let prefer = if down_first {
            field.j_inc(i, j)
        } else {
            field.i_inc(i, j)
        };
        if prefer == 0 {
            if down_first {
                j -= 1;
            } else {
                i -= 1;
            }
        } else if env.weight(i, j) == 1 {
            i -= 1;
            j -= 1;
        } else if down_first {
            i -= 1;
        } else {
            j -= 1;
        }
        sites.push((i, j));
    }
    while i > 0 {
        i -= 1;
        sites.push((i, 0));
    }
    while j > 0 {
        j -= 1;
        sites.push((0, j));
    }
    sites.reverse();
    LatticePath {
        sites,
        kind: PathKind::Maximal,
    }
}

/// Last axis site on the path.
pub fn exit_point(path: &LatticePath) -> Exit {
    let last = path
        .sites
        .iter()
        .rev()
        .find(|s| s.0 == 0 || s.1 == 0)
        .copied()
        .unwrap_or((0, 0));
    if last.1 == 0 {
        Exit { e1: last.0, e2: 0 }
    } else {
        Exit { e1: 0, e2: last.1 }
    }
}

/// Smallest and largest coordinate of the path on a row (`Horizontal`) or a
/// column (`Vertical`).
pub fn level_crossings(path: &LatticePath, level: usize, axis: Axis) -> Result<(usize, usize)> {
    let hits = path.sites.iter().filter_map(|&(x, y)| match axis {
        Axis::Horizontal if y == level => Some(x),
        Axis::Vertical if x == level => Some(y),
        _ => None,
    });
    let mut lo = usize::MAX;
    let mut hi = 0;
    let mut any = false;
    for h in hits {
        any = true;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    if !any {
        return Err(Error::Param(format!("path does not meet {axis:?} level {level}")));
    }
    Ok((lo, hi))
}

/// Follows the smaller of the two neighbouring passage times; ties go up when
/// both equal the current value and diagonal otherwise. Stops on the top row
/// or the right column.
pub fn competition_interface(field: &PassageField) -> LatticePath {
    let d = field.dims();
    let (mut x, mut y) = (0, 0);
    let mut sites = vec![(0, 0)];
    while x < d.m && y < d.n {
        let here = field.g(x, y);
        let up = field.g(x, y + 1);
        let right = field.g(x + 1, y);
        if up < right || (up == right && up == here) {
            y += 1;
        } else if right < up {
            x += 1;
        } else {
            x += 1;
            y += 1;
        }
        sites.push((x, y));
    }
    LatticePath {
        sites,
        kind: PathKind::Interface,
    }
}

/// Where the interface first meets the top row and the right column; `None`
/// stands for infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterfaceProjection {
    pub v_of_n: Option<usize>,
    pub w_of_m: Option<usize>,
}

impl InterfaceProjection {
    /// `v(n) >= m` implies `w(m) < n`, read literally.
    pub fn literal_dichotomy(&self, dims: Dims) -> bool {
        let v_big = self.v_of_n.map_or(true, |v| v >= dims.m);
        let w_small = self.w_of_m.is_some_and(|w| w < dims.n);
        !v_big || w_small
    }

    /// The interface leaves through the top edge left of the corner, through
    /// the right edge below it, or through the corner itself.
    pub fn exits_consistently(&self, dims: Dims) -> bool {
        match (self.v_of_n, self.w_of_m) {
            (Some(v), None) => v < dims.m,
            (None, Some(w)) => w < dims.n,
            (Some(v), Some(w)) => v == dims.m && w == dims.n,
            (None, None) => false,
        }
    }
}

pub fn interface_projections(interface: &LatticePath, dims: Dims) -> InterfaceProjection {
    let v_of_n = interface.sites.iter().filter(|s| s.1 == dims.n).map(|s| s.0).min();
    let w_of_m = interface.sites.iter().filter(|s| s.0 == dims.m).map(|s| s.1).min();
    InterfaceProjection { v_of_n, w_of_m }
}

/// For each site, whether some maximal path from the origin reaches it with a
/// vertical or diagonal first step. The origin counts as a member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clusters {
    dims: Dims,
    up: Vec<bool>,
}

impl Clusters {
    pub fn non_horizontal(&self, i: usize, j: usize) -> bool {
        self.up[self.dims.index(i, j)]
    }
}

pub fn cluster_flags(field: &PassageField, env: &Environment) -> Clusters {
    let d = field.dims();
    let mut up = vec![false; d.len()];
    up[0] = true;
    for j in 1..=d.n {
        up[d.index(0, j)] = true;
    }
    for j in 1..=d.n {
        for i in 1..=d.m {
            let g = field.g(i, j);
            let mut flag = false;
            let preds = [
                ((i - 1, j), 0u32),
                ((i, j - 1), 0),
                ((i - 1, j - 1), env.weight(i, j) as u32),
            ];
            for (k, (q, gain)) in preds.into_iter().enumerate() {
                if field.g(q.0, q.1) + gain != g {
                    continue;
                }
                flag |= if q == (0, 0) { k != 0 } else { up[d.index(q.0, q.1)] };
            }
            up[d.index(i, j)] = flag;
        }
    }
    Clusters { dims: d, up }
}

/// Same flags read off the full list of maximal paths (small rectangles only).
pub fn cluster_flags_by_enumeration(env: &Environment) -> Result<Clusters> {
    let d = env.dims();
    let mut up = vec![false; d.len()];
    up[0] = true;
    for j in 0..=d.n {
        for i in 0..=d.m {
            if (i, j) == (0, 0) {
                continue;
            }
            let e = enumerate_to(env, Mode::Boundary, (i, j))?;
            up[d.index(i, j)] = e.paths.iter().any(|p| p[1] != (1, 0));
        }
    }
    Ok(Clusters { dims: d, up })
}

/// Separating curve between the two clusters: horizontal run along each row
/// while the next site still has a non-horizontal maximal path, then a level
/// change chosen from the local `(w, I, J)` pattern.
pub fn cluster_boundary(field: &PassageField, env: &Environment) -> LatticePath {
    let clusters = cluster_flags(field, env);
    cluster_boundary_from(field, env, &clusters)
}

pub fn cluster_boundary_from(field: &PassageField, env: &Environment, clusters: &Clusters) -> LatticePath {
    let d = field.dims();
    let (mut x, mut y) = (0usize, 0usize);
    let mut sites = vec![(0, 0)];
    while x < d.m && y < d.n {
        if y >= 1 && clusters.non_horizontal(x + 1, y) {
            x += 1;
            sites.push((x, y));
            continue;
        }
        let (w, i_in, j_in) = (env.weight(x + 1, y + 1), field.i_inc(x + 1, y), field.j_inc(x, y + 1));
        match (w, i_in, j_in) {
            (1, 0, 1) | (0, 0, 1) => x += 1,
            (0, 1, 0) => y += 1,
            _ => {
                x += 1;
                y += 1;
            }
        }
        sites.push((x, y));
    }
    LatticePath {
        sites,
        kind: PathKind::ClusterBoundary,
    }
}

/// Position of a site relative to a curve that starts at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    On,
    Below,
    Unknown,
}

pub fn side_of(curve: &LatticePath, site: Site) -> Side {
    let (a, b) = site;
    if curve.sites.contains(&site) {
        return Side::On;
    }
    let column: Vec<usize> = curve.sites.iter().filter(|s| s.0 == a).map(|s| s.1).collect();
    if let (Some(&lo), Some(&hi)) = (column.iter().min(), column.iter().max()) {
        if b > hi {
            return Side::Above;
        }
        if b < lo {
            return Side::Below;
        }
        return Side::Unknown;
    }
    // Column beyond the truncated curve: the curve ended on the top row to
    // the left of `a`, so every lower row is below its continuation.
    let end = curve.end();
    if a > end.0 && b < end.1 {
        Side::Below
    } else {
        Side::Unknown
    }
}

/// `upper >= lower` as curves: on every shared column the y-range of `upper`
/// sits weakly above, and on every shared row its x-range sits weakly left.
pub fn curve_above(upper: &LatticePath, lower: &LatticePath) -> bool {
    let range = |p: &LatticePath, col: bool, k: usize| {
        let vals = p
            .sites
            .iter()
            .filter(|s| if col { s.0 == k } else { s.1 == k })
            .map(|s| if col { s.1 } else { s.0 });
        let mut lo = usize::MAX;
        let mut hi = 0;
        let mut any = false;
        for v in vals {
            any = true;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        any.then_some((lo, hi))
    };
    let max_x = upper.sites.iter().chain(&lower.sites).map(|s| s.0).max().unwrap_or(0);
    let max_y = upper.sites.iter().chain(&lower.sites).map(|s| s.1).max().unwrap_or(0);
    for k in 0..=max_x {
        if let (Some(u), Some(l)) = (range(upper, true, k), range(lower, true, k)) {
            if u.0 < l.0 || u.1 < l.1 {
                return false;
            }
        }
    }
    for k in 0..=max_y {
        if let (Some(u), Some(l)) = (range(upper, false, k), range(lower, false, k)) {
            if u.0 > l.0 || u.1 > l.1 {
                return false;
            }
        }
    }
    true
}
