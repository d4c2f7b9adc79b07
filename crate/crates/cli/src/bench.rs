//! Operation-count sweeps over synthetic instances.

use std::time::Instant;

use mrset::evalexpr::{Catalog, EvalConfig};
use mrset::oracle;
use mrset::{Expr, MotherHash, MultiResSet, Op, WordWidth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `(((S0 & S1) & S2) ...)`
    And,
    /// `(((S0 | S1) | S2) ...)`
    Or,
    /// `((S0 & S1) | (S2 & S3)) ...`, pairs joined by unions.
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchConfig {
    /// Elements per set.
    pub sizes: Vec<usize>,
    /// Fraction of each set shared by all sets.
    pub overlap: f64,
    pub shape: Shape,
    pub m: usize,
    #[serde(rename = "W")]
    pub widths: Vec<u32>,
    pub trials: usize,
    pub seed: u64,
    pub w: u32,
    #[serde(rename = "C")]
    pub c: u32,
    pub rewrite: bool,
}

impl Default for BenchConfig {
    fn default() -> BenchConfig {
        BenchConfig {
            sizes: vec![1 << 14, 1 << 15],
            overlap: 0.0,
            shape: Shape::And,
            m: 2,
            widths: vec![64, 128, 256, 512],
            trials: 3,
            seed: 1,
            w: 64,
            c: mrset::multires::DEFAULT_C,
            rewrite: false,
        }
    }
}

/// Means over the trials of one `(W, n)` cell.
#[derive(Clone, Debug, Serialize)]
pub struct Cell {
    #[serde(rename = "W")]
    pub width: u32,
    pub n: usize,
    pub m: usize,
    pub r: u32,
    pub approx_word_ops: f64,
    /// Approximate-phase word ops divided by the total input size `n * m`.
    pub approx_ops_per_element: f64,
    pub word_ops: f64,
    pub exact_probes: f64,
    pub hash_probes: f64,
    /// Comparisons of the sorted-merge intersection (`and` shape only).
    pub baseline_comparisons: Option<f64>,
    pub candidates: f64,
    pub k: f64,
    pub k_prime: f64,
    /// Candidates per result occurrence, `sum |S'_i| / max(k', 1)`.
    pub candidate_inflation: f64,
    pub wall_ms: f64,
}

pub fn expression(shape: Shape, m: usize) -> Expr {
    let leaf = |i: usize| Expr::leaf(format!("S{i}"));
    let chain = |op: Op, items: Vec<Expr>| {
        let mut it = items.into_iter();
        let first = it.next().expect("nonempty");
        it.fold(first, |a, b| Expr::op(op, a, b))
    };
    match shape {
        Shape::And => chain(Op::Intersect, (0..m).map(leaf).collect()),
        Shape::Or => chain(Op::Union, (0..m).map(leaf).collect()),
        Shape::Mixed => {
            let pairs = (0..m)
                .step_by(2)
                .map(|i| if i + 1 < m { Expr::op(Op::Intersect, leaf(i), leaf(i + 1)) } else { leaf(i) })
                .collect();
            chain(Op::Union, pairs)
        }
    }
}

/// `m` sets of `n` elements sharing `round(overlap * n)` common elements,
/// plus a hash seed. Trial `t` draws from ChaCha8 stream `t` of the root
/// seed.
pub fn instance(seed: u64, trial: u64, n: usize, m: usize, overlap: f64, w: u32) -> (Vec<Vec<u64>>, [u8; 16]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mask = if w == 64 { u64::MAX } else { (1 << w) - 1 };
    let k = (overlap * n as f64).round() as usize;
    let common: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & mask).collect();
    let sets = (0..m)
        .map(|_| {
            let mut s = common.clone();
            s.extend((k..n).map(|_| rng.gen::<u64>() & mask));
            oracle::plain(s)
        })
        .collect();
    (sets, rng.gen())
}

pub fn run(cfg: &BenchConfig) -> Result<Vec<Cell>> {
    if cfg.m == 0 || cfg.trials == 0 || cfg.sizes.is_empty() || cfg.widths.is_empty() {
        return Err(CliError::BadParameter("m, trials, sizes and W must be nonempty".into()));
    }
    if !(0.0..=1.0).contains(&cfg.overlap) {
        return Err(CliError::BadParameter(format!("overlap {} not in [0, 1]", cfg.overlap)));
    }
    let widths = cfg
        .widths
        .iter()
        .map(|&b| WordWidth::new(b))
        .collect::<mrset::Result<Vec<_>>>()?;
    let expr = expression(cfg.shape, cfg.m);
    let eval = EvalConfig {
        c: cfg.c,
        rewrite: cfg.rewrite,
        ..EvalConfig::default()
    };
    let mut cells = Vec::new();
    for &n in &cfg.sizes {
        let mut acc: Vec<Cell> = Vec::new();
        for t in 0..cfg.trials {
            let (sets, seed) = instance(cfg.seed, t as u64, n, cfg.m, cfg.overlap, cfg.w);
            let hash = MotherHash::new(seed, cfg.w)?;
            let baseline = (cfg.shape == Shape::And).then(|| {
                let refs: Vec<&[u64]> = sets.iter().map(Vec::as_slice).collect();
                oracle::merge_intersect_baseline(&refs).1 as f64
            });
            for (wi, &width) in widths.iter().enumerate() {
                let mut cat = Catalog::new();
                for (i, s) in sets.iter().enumerate() {
                    cat.insert(MultiResSet::build(&format!("S{i}"), s, &hash, width)?)?;
                }
                let start = Instant::now();
                let (_, st) = mrset::query(&expr, &cat, &eval)?;
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                let total_in = (n * cfg.m) as f64;
                let cell = Cell {
                    width: width.bits(),
                    n,
                    m: cfg.m,
                    r: st.r_effective,
                    approx_word_ops: st.phases.approx.word_ops as f64,
                    approx_ops_per_element: st.phases.approx.word_ops as f64 / total_in.max(1.0),
                    word_ops: st.word_ops as f64,
                    exact_probes: st.phases.exact.hash_probes as f64,
                    hash_probes: st.hash_probes as f64,
                    baseline_comparisons: baseline,
                    candidates: st.candidates as f64,
                    k: st.k as f64,
                    k_prime: st.k_prime as f64,
                    candidate_inflation: st.candidates as f64 / (st.k_prime.max(1)) as f64,
                    wall_ms,
                };
                if t == 0 {
                    acc.push(cell);
                } else {
                    add(&mut acc[wi], &cell);
                }
            }
        }
        for mut c in acc {
            scale(&mut c, 1.0 / cfg.trials as f64);
            cells.push(c);
        }
    }
    Ok(cells)
}

fn add(a: &mut Cell, b: &Cell) {
    a.approx_word_ops += b.approx_word_ops;
    a.approx_ops_per_element += b.approx_ops_per_element;
    a.word_ops += b.word_ops;
    a.exact_probes += b.exact_probes;
    a.hash_probes += b.hash_probes;
    a.baseline_comparisons = a.baseline_comparisons.zip(b.baseline_comparisons).map(|(x, y)| x + y);
    a.candidates += b.candidates;
    a.k += b.k;
    a.k_prime += b.k_prime;
    a.candidate_inflation += b.candidate_inflation;
    a.wall_ms += b.wall_ms;
}

fn scale(a: &mut Cell, s: f64) {
    a.approx_word_ops *= s;
    a.approx_ops_per_element *= s;
    a.word_ops *= s;
    a.exact_probes *= s;
    a.hash_probes *= s;
    a.baseline_comparisons = a.baseline_comparisons.map(|x| x * s);
    a.candidates *= s;
    a.k *= s;
    a.k_prime *= s;
    a.candidate_inflation *= s;
    a.wall_ms *= s;
}

/// Trend checks: per-element approximate cost strictly decreasing in `W`
/// at each `n`, and approximate cost growing by `[1.7, 2.3]` when `n`
/// doubles at fixed `W`. Returns one message per violation.
pub fn check(cells: &[Cell]) -> Vec<String> {
    let mut bad = Vec::new();
    let mut by_n: Vec<&Cell> = cells.iter().collect();
    by_n.sort_by_key(|c| (c.n, c.width));
    for pair in by_n.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.n == b.n && b.approx_ops_per_element >= a.approx_ops_per_element {
            bad.push(format!(
                "n={}: W={} costs {:.3}/element, not below W={} at {:.3}",
                a.n, b.width, b.approx_ops_per_element, a.width, a.approx_ops_per_element
            ));
        }
    }
    let mut by_w = by_n;
    by_w.sort_by_key(|c| (c.width, c.n));
    for pair in by_w.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a.width == b.width && b.n == 2 * a.n {
            let ratio = b.approx_word_ops / a.approx_word_ops.max(1.0);
            if !(1.7..=2.3).contains(&ratio) {
                bad.push(format!("W={}: n {} -> {} changed cost by {ratio:.3}", a.width, a.n, b.n));
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        assert_eq!(expression(Shape::And, 3).to_string(), "((S0 & S1) & S2)");
        assert_eq!(expression(Shape::Or, 2).to_string(), "(S0 | S1)");
        assert_eq!(expression(Shape::Mixed, 5).to_string(), "(((S0 & S1) | (S2 & S3)) | S4)");
        assert_eq!(expression(Shape::And, 1).to_string(), "S0");
    }

    #[test]
    fn instances_are_deterministic() {
        let a = instance(3, 1, 100, 3, 0.25, 64);
        assert_eq!(a, instance(3, 1, 100, 3, 0.25, 64));
        assert_ne!(a, instance(3, 2, 100, 3, 0.25, 64));
        let both = oracle::merge_intersect(&a.0[0], &a.0[1]).0;
        assert!(both.len() >= 25);
    }

    #[test]
    fn small_sweep() {
        let cfg = BenchConfig {
            sizes: vec![256, 512],
            overlap: 0.1,
            m: 3,
            trials: 2,
            ..BenchConfig::default()
        };
        let cells = run(&cfg).unwrap();
        assert_eq!(cells.len(), 8);
        assert!(cells.iter().all(|c| c.k >= 25.0 && c.k_prime >= 3.0 * c.k));
    }
}
