use super::catalog::SetSource;
use super::EvalConfig;
use crate::error::{Error, Result};
use crate::expr::{Expr, Op};
use crate::multires::{choose_resolution, MultiResSet, ResolutionMode};
use crate::util::ceil_log2;
use crate::wordpar::WordWidth;

/// An expression with some intersections replaced by precomputed sets.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub expr: Expr,
    /// Sets named `$0`, `$1`, ... referenced by `expr`.
    pub virtual_sets: Vec<MultiResSet>,
    pub applied: usize,
}

/// Estimated costs of an all-leaf intersection over sets of the given
/// sizes at resolution `r`: `(probe, approximate)`. Probing is charged
/// `n' * m'` for smallest size `n'` and `m'` sets; the approximate cost is
/// the number of words the images occupy.
pub fn rewrite_costs(sizes: &[usize], r: u32, width: WordWidth) -> (u64, u64) {
    let wb = u64::from(width.bits());
    let smallest = sizes.iter().copied().min().unwrap_or(0) as u64;
    let probe = smallest * sizes.len() as u64;
    let approx = sizes
        .iter()
        .map(|&n| {
            let n = n as u64;
            let per = (i64::from(r) - i64::from(ceil_log2(n.max(1))) + i64::from(width.log2())).max(1) as u64;
            (n * per).div_ceil(wb)
        })
        .sum();
    (probe, approx)
}

/// Replaces every maximal subtree that is an intersection of leaves by a
/// virtual leaf when probing the smallest set is cheaper than taking part
/// in the approximate phase.
pub fn asymmetric_rewrite<S: SetSource + ?Sized>(expr: &Expr, sets: &S, cfg: &EvalConfig) -> Result<Rewrite> {
    let get = |n: &str| sets.get(n).ok_or_else(|| Error::UnknownSet(n.to_string()));
    let leaves = expr.leaves();
    let first = get(leaves[0])?;
    let total: usize = leaves.iter().map(|n| get(n).map(MultiResSet::len)).sum::<Result<usize>>()?;
    let w = first.mother_hash().w();
    let r = cfg
        .resolution
        .unwrap_or_else(|| choose_resolution(total, w, ResolutionMode::General, 0, cfg.c))
        .clamp(1, w);
    let mut out = Rewrite {
        expr: expr.clone(),
        virtual_sets: Vec::new(),
        applied: 0,
    };
    fn go<S: SetSource + ?Sized>(e: &Expr, sets: &S, r: u32, out: &mut Rewrite) -> Result<Expr> {
        let Expr::Node(op, a, b) = e else {
            return Ok(e.clone());
        };
        if *op == Op::Intersect && e.is_pure_intersection() {
            let mut members: Vec<&MultiResSet> = e.leaves().iter().map(|n| sets.get(n).expect("checked")).collect();
            let sizes: Vec<usize> = members.iter().map(|s| s.len()).collect();
            let (probe, approx) = rewrite_costs(&sizes, r, members[0].width());
            if probe >= approx {
                return Ok(e.clone());
            }
            members.sort_by_key(|s| s.len());
            let kept: Vec<u64> = members[0]
                .elements()
                .into_iter()
                .filter(|&x| members[1..].iter().all(|s| s.contains(x)))
                .collect();
            let name = format!("${}", out.virtual_sets.len());
            let set = MultiResSet::build(&name, &kept, members[0].mother_hash(), members[0].width())?;
            out.virtual_sets.push(set);
            out.applied += 1;
            return Ok(Expr::leaf(name));
        }
        Ok(Expr::op(*op, go(a, sets, r, out)?, go(b, sets, r, out)?))
    }
    out.expr = go(expr, sets, r, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evalexpr::Catalog;
    use crate::multires::MotherHash;

    #[test]
    fn cost_model() {
        // r=20, W=64: a set of 2^10 elements takes 2^10 * (20 - 10 + 6) / 64 words
        let (p, a) = rewrite_costs(&[1 << 10, 4], 20, WordWidth::W64);
        assert_eq!(p, 8);
        assert_eq!(a, 256 + (4 * 24u64).div_ceil(64));
        assert_eq!(rewrite_costs(&[0, 0], 5, WordWidth::W64), (0, 0));
        // general-mode r for 2*10^6 elements is 21 + 6 + 2 = 29
        let (p, a) = rewrite_costs(&[4, 1_000_000, 1_000_000], 29, WordWidth::W64);
        assert_eq!(p, 12);
        assert!(a > 400_000);
        // 2*10^5 elements: r = 18 + 6 + 2 = 26, each set costs 10^5 * 15 / 64
        let (p, a) = rewrite_costs(&[100_000, 100_000], 26, WordWidth::W64);
        assert_eq!(p, 200_000);
        assert_eq!(a, 2 * 23_438);
        assert!(p >= a);
    }

    #[test]
    fn rewrites_only_cheap_intersections() {
        let h = MotherHash::from_u64(9, 64).unwrap();
        let big: Vec<u64> = (0..5000).collect();
        let mut c = Catalog::new();
        for (n, v) in [("A", big.clone()), ("B", vec![3, 7, 90_000]), ("C", big.clone()), ("D", big)] {
            c.insert(MultiResSet::build(n, &v, &h, WordWidth::W64).unwrap()).unwrap();
        }
        let cfg = EvalConfig::default();
        let rw = asymmetric_rewrite(&"((A & B) | (C & D))".parse().unwrap(), &c, &cfg).unwrap();
        assert_eq!(rw.applied, 1);
        assert_eq!(rw.expr.to_string(), "($0 | (C & D))");
        assert_eq!(rw.virtual_sets[0].elements(), vec![3, 7]);
    }
}
