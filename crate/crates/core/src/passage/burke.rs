//! Exact single-cell stationarity in rational arithmetic.
//!
//! The inputs of one cell (`w`, south increment `I`, west increment `J`, and
//! the auxiliary bit `beta`) take finitely many values, so the law of the
//! outputs can be computed exactly and compared with the product law.

use num_rational::Ratio;
use num_traits::Signed;
use serde::Serialize;

use super::{alpha_case, increment_step, AlphaCase};

pub type Q = Ratio<i64>;

pub fn west_parameter_exact(p: Q, u: Q) -> Q {
    let one = Q::from_integer(1);
    let q = p * (one - u);
    q / (u + q)
}

fn bern(q: Q, x: u8) -> Q {
    if x == 1 {
        q
    } else {
        Q::from_integer(1) - q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurkeCheck {
    pub p: String,
    pub u: String,
    pub west: String,
    /// `P(I_out = a, J_out = b)` minus the product law, all entries.
    pub single_cell_max_gap: String,
    /// `P(alpha = a, I_out = b, J_out = c)` minus the product law.
    pub full_cell_max_gap: String,
    /// Number of `(g, h, k)` test-function triples (each `{0,1} -> {0,1}`)
    /// for which `E[g h k] != E g E h E k`.
    pub factorization_failures: usize,
    pub holds: bool,
}

/// Law of `(alpha, I_out, J_out)` as `joint[a][i][j]`.
pub fn output_law(p: Q, u: Q) -> [[[Q; 2]; 2]; 2] {
    let l = west_parameter_exact(p, u);
    let zero = Q::from_integer(0);
    let mut joint = [[[zero; 2]; 2]; 2];
    for omega in 0..2u8 {
        for i_in in 0..2u8 {
            for j_in in 0..2u8 {
                let base = bern(p, omega) * bern(u, i_in) * bern(l, j_in);
                let (i_out, j_out) = increment_step(omega, j_in, i_in);
                match alpha_case(omega, i_in, j_in) {
                    AlphaCase::Forced => joint[1][i_out as usize][j_out as usize] += base,
                    AlphaCase::Zero => joint[0][i_out as usize][j_out as usize] += base,
                    AlphaCase::Fresh => {
                        for beta in 0..2u8 {
                            joint[beta as usize][i_out as usize][j_out as usize] += base * bern(p, beta);
                        }
                    }
                }
            }
        }
    }
    joint
}

pub fn exact_burke(p: Q, u: Q) -> BurkeCheck {
    let l = west_parameter_exact(p, u);
    let joint = output_law(p, u);
    let zero = Q::from_integer(0);

    let mut full_gap = zero;
    let mut single_gap = zero;
    for i in 0..2u8 {
        for j in 0..2u8 {
            let pair = joint[0][i as usize][j as usize] + joint[1][i as usize][j as usize];
            let gap = (pair - bern(u, i) * bern(l, j)).abs();
            if gap > single_gap {
                single_gap = gap;
            }
            for a in 0..2u8 {
                let target = bern(p, a) * bern(u, i) * bern(l, j);
                let gap = (joint[a as usize][i as usize][j as usize] - target).abs();
                if gap > full_gap {
                    full_gap = gap;
                }
            }
        }
    }

    let fns: [[Q; 2]; 4] = [
        [zero, zero],
        [Q::from_integer(1), zero],
        [zero, Q::from_integer(1)],
        [Q::from_integer(1), Q::from_integer(1)],
    ];
    let mut failures = 0;
    for g in &fns {
        for h in &fns {
            for k in &fns {
                let mut lhs = zero;
                let (mut eg, mut eh, mut ek) = (zero, zero, zero);
                for a in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let w = joint[a][i][j];
                            lhs += g[a] * h[i] * k[j] * w;
                            eg += g[a] * w;
                            eh += h[i] * w;
                            ek += k[j] * w;
                        }
                    }
                }
                if lhs != eg * eh * ek {
                    failures += 1;
                }
            }
        }
    }

    BurkeCheck {
        p: p.to_string(),
        u: u.to_string(),
        west: l.to_string(),
        single_cell_max_gap: single_gap.to_string(),
        full_cell_max_gap: full_gap.to_string(),
        factorization_failures: failures,
        holds: single_gap == zero && full_gap == zero && failures == 0,
    }
}

/// The three parameter pairs used by the exact check.
pub fn standard_cases() -> [(Q, Q); 3] {
    [
        (Q::new(1, 2), Q::new(1, 2)),
        (Q::new(1, 4), Q::new(2, 3)),
        (Q::new(3, 4), Q::new(1, 3)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn west_parameter_values() {
        assert_eq!(west_parameter_exact(Q::new(1, 4), Q::new(2, 3)), Q::new(1, 9));
        assert_eq!(west_parameter_exact(Q::new(1, 2), Q::new(1, 2)), Q::new(1, 3));
    }

    #[test]
    fn law_sums_to_one() {
        for (p, u) in standard_cases() {
            let j = output_law(p, u);
            let total: Q = j.iter().flatten().flatten().copied().sum();
            assert_eq!(total, Q::from_integer(1));
        }
    }

    #[test]
    fn wrong_west_parameter_breaks_factorization() {
        // With J_in ~ Ber(1/2) instead of l(u) the outputs are not a product law.
        let p = Q::new(1, 2);
        let u = Q::new(1, 2);
        let l = Q::new(1, 2);
        let mut pair = [[Q::from_integer(0); 2]; 2];
        for w in 0..2u8 {
            for i in 0..2u8 {
                for j in 0..2u8 {
                    let (a, b) = increment_step(w, j, i);
                    pair[a as usize][b as usize] += bern(p, w) * bern(u, i) * bern(l, j);
                }
            }
        }
        let pi: Q = pair[1][0] + pair[1][1];
        let pj: Q = pair[0][1] + pair[1][1];
        assert_ne!(pair[1][1], pi * pj);
    }
}
