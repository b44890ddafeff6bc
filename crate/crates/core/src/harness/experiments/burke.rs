use rand_core::RngCore;
use serde_json::json;

use super::{bonferroni_z, chunked, dims, endpoint, sample_rng, LEVEL};
use crate::env::sample_environment;
use crate::error::Result;
use crate::exec::Executor;
use crate::harness::config::ExperimentConfig;
use crate::harness::result::{row, Outcome, Verdict};
use crate::passage::burke::{exact_burke, standard_cases};
use crate::passage::{alpha_field, compute_passage};
use crate::rng::{substream, uniform, Stream};
use crate::stats::{chi_square_independence, ContingencyTable};

const PAIRS: usize = 50;
const CHUNK: usize = 1000;

/// Which law a tracked variable should follow.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Group {
    PathI,
    PathJ,
    Alpha,
    North,
}

struct Layout {
    groups: Vec<Group>,
    /// Pairs among the path variables, then alpha-path pairs.
    pairs: Vec<(usize, usize)>,
}

/// Per-chunk tallies: ones per variable and 2x2 tables per pair.
#[derive(Clone)]
struct Tally {
    ones: Vec<u64>,
    tables: Vec<[u64; 4]>,
}

fn pick<R: RngCore>(rng: &mut R, len: usize) -> usize {
    ((uniform(rng) * len as f64) as usize).min(len - 1)
}

pub(crate) fn burke(cfg: &ExperimentConfig, seed: u64, exec: &Executor) -> Result<Outcome> {
    let mut out = Outcome::default();

    let mut exact_bad = 0u64;
    for (p, u) in standard_cases() {
        let c = exact_burke(p, u);
        exact_bad += (!c.holds) as u64;
        out.push_row(row([
            ("part", json!("exact")),
            ("p", json!(c.p)),
            ("u", json!(c.u)),
            ("west", json!(c.west)),
            ("single_cell_max_gap", json!(c.single_cell_max_gap)),
            ("full_cell_max_gap", json!(c.full_cell_max_gap)),
            ("factorization_failures", json!(c.factorization_failures)),
        ]));
    }
    out.push(
        Verdict::exact("exact_factorization", exact_bad).with_detail("rational arithmetic, three parameter pairs"),
    );

    let params = cfg.params()?;
    let (p, u, l) = (params.p(), params.u(), params.west());
    let (m, n) = endpoint(cfg, cfg.n_grid[0])?;
    let d = dims(m, n)?;
    // Down-right staircase from (0,n) to (m,0): I on horizontal edges, J on
    // vertical edges, then the alpha bits of the enclosed cells and the
    // north edge.
    let k_max = m.min(n);
    let mut stair_i = Vec::new();
    let mut stair_j = Vec::new();
    for k in 1..=k_max {
        stair_i.push((k, n - k + 1));
        stair_j.push((k, n - k + 1));
    }
    let mut alpha_sites = Vec::new();
    for b in 0..n {
        for a in 0..k_max {
            // cell (a+1, b+1) lies under the staircase
            if a + b < n {
                alpha_sites.push((a, b));
            }
        }
    }
    let mut groups = vec![Group::PathI; stair_i.len()];
    groups.extend(vec![Group::PathJ; stair_j.len()]);
    let path_len = groups.len();
    groups.extend(vec![Group::Alpha; alpha_sites.len()]);
    groups.extend(vec![Group::North; m]);

    let mut rng = substream(seed, Stream::Auxiliary, 0);
    let mut pairs = Vec::new();
    while pairs.len() < PAIRS {
        let (a, b) = (pick(&mut rng, path_len), pick(&mut rng, path_len));
        if a != b && !pairs.contains(&(a, b)) && !pairs.contains(&(b, a)) {
            pairs.push((a, b));
        }
    }
    while pairs.len() < 2 * PAIRS {
        let a = path_len + pick(&mut rng, alpha_sites.len());
        let b = pick(&mut rng, path_len);
        if !pairs.contains(&(a, b)) {
            pairs.push((a, b));
        }
    }
    let layout = Layout { groups, pairs };
    let vars = layout.groups.len();

    let tallies = chunked(exec, cfg.samples, CHUNK, |range| {
        let mut t = Tally {
            ones: vec![0; vars],
            tables: vec![[0; 4]; layout.pairs.len()],
        };
        let mut bits = vec![0u8; vars];
        for k in range {
            let mut rng = sample_rng(seed, Stream::Environment, 0, k);
            let env = sample_environment(params, d, &mut rng);
            let field = compute_passage(&env);
            let mut arng = sample_rng(seed, Stream::Alpha, 0, k);
            let alpha = alpha_field(&field, &env, &mut arng);
            let mut v = 0;
            for &(i, j) in &stair_i {
                bits[v] = field.i_inc(i, j);
                v += 1;
            }
            for &(i, j) in &stair_j {
                bits[v] = field.j_inc(i, j);
                v += 1;
            }
            for &(a, b) in &alpha_sites {
                bits[v] = alpha.get(a, b);
                v += 1;
            }
            for i in 1..=m {
                bits[v] = field.i_inc(i, n);
                v += 1;
            }
            for (o, b) in t.ones.iter_mut().zip(&bits) {
                *o += *b as u64;
            }
            for (tab, &(a, b)) in t.tables.iter_mut().zip(&layout.pairs) {
                tab[(2 * bits[a] + bits[b]) as usize] += 1;
            }
        }
        t
    });
    let mut total = Tally {
        ones: vec![0; vars],
        tables: vec![[0; 4]; layout.pairs.len()],
    };
    for t in tallies {
        for (a, b) in total.ones.iter_mut().zip(t.ones) {
            *a += b;
        }
        for (a, b) in total.tables.iter_mut().zip(t.tables) {
            for c in 0..4 {
                a[c] += b[c];
            }
        }
    }

    let samples = cfg.samples as f64;
    let target = |g: Group| match g {
        Group::PathI | Group::North => u,
        Group::PathJ => l,
        Group::Alpha => p,
    };
    let z_bound = bonferroni_z(LEVEL, vars);
    let mut worst: f64 = 0.0;
    for (name, group) in [
        ("path_I", Group::PathI),
        ("path_J", Group::PathJ),
        ("alpha", Group::Alpha),
        ("north_edge", Group::North),
    ] {
        let idx: Vec<usize> = (0..vars).filter(|&v| layout.groups[v] == group).collect();
        let q = target(group);
        let count = idx.len() as f64 * samples;
        let ones: u64 = idx.iter().map(|&v| total.ones[v]).sum();
        let mean = ones as f64 / count;
        let se = (q * (1.0 - q) / count).sqrt();
        let z = (mean - q) / se;
        for &v in &idx {
            let zv = (total.ones[v] as f64 / samples - q) / (q * (1.0 - q) / samples).sqrt();
            worst = worst.max(zv.abs());
        }
        out.push_row(row([
            ("part", json!("marginal")),
            ("group", json!(name)),
            ("variables", json!(idx.len())),
            ("samples", json!(cfg.samples)),
            ("target", json!(q)),
            ("mean", json!(mean)),
            ("stderr", json!(se)),
            ("z", json!(z)),
        ]));
        out.push(Verdict::at_most(&format!("{name}_mean_z"), z.abs(), 3.0).with_samples(cfg.samples));
    }
    out.push(
        Verdict::at_most("marginal_max_z", worst, z_bound)
            .with_samples(cfg.samples)
            .with_detail(format!("Bonferroni over {vars} variables at level {LEVEL}")),
    );

    let mut passed = [0usize; 2];
    for (k, tab) in total.tables.iter().enumerate() {
        let table = ContingencyTable::from_2d(&[vec![tab[0], tab[1]], vec![tab[2], tab[3]]])?;
        let chi = chi_square_independence(&table)?;
        let ok = chi.p_value > LEVEL;
        passed[k / PAIRS] += ok as usize;
        let (a, b) = layout.pairs[k];
        out.push_row(row([
            ("part", json!("pair")),
            ("group", json!(if k < PAIRS { "path_path" } else { "alpha_path" })),
            ("first", json!(a)),
            ("second", json!(b)),
            ("samples", json!(cfg.samples)),
            ("statistic", json!(chi.statistic)),
            ("p_value", json!(chi.p_value)),
        ]));
    }
    let frac = (passed[0] + passed[1]) as f64 / (2 * PAIRS) as f64;
    out.push(
        Verdict::at_least("pairwise_pass_fraction", frac, 0.96)
            .with_samples(cfg.samples)
            .with_detail(format!(
                "{} of {PAIRS} path pairs and {} of {PAIRS} alpha-path pairs pass at level {LEVEL}",
                passed[0], passed[1]
            )),
    );
    Ok(out)
}
