//! Brute-force reference implementations on plain `u64` values.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::{Expr, Op};
use crate::multires::MotherHash;

/// A sorted, distinct sequence.
pub type PlainSet = Vec<u64>;

/// Sorts and deduplicates.
pub fn plain(mut v: Vec<u64>) -> PlainSet {
    v.sort_unstable();
    v.dedup();
    v
}

/// Recursive scalar evaluation.
///
/// ```
/// use std::collections::BTreeMap;
/// use mrset::oracle::naive_evaluate;
///
/// let mut sets = BTreeMap::new();
/// sets.insert("A".to_string(), vec![1, 2]);
/// sets.insert("B".to_string(), vec![2, 3]);
/// sets.insert("C".to_string(), vec![9]);
/// let e = "((A & B) | C)".parse().unwrap();
/// assert_eq!(naive_evaluate(&e, &sets).unwrap(), vec![2, 9]);
/// ```
pub fn naive_evaluate(expr: &Expr, sets: &BTreeMap<String, PlainSet>) -> Result<PlainSet> {
    fn go(e: &Expr, sets: &BTreeMap<String, PlainSet>) -> Result<BTreeSet<u64>> {
        match e {
            Expr::Leaf(n) => Ok(sets
                .get(n)
                .ok_or_else(|| Error::UnknownSet(n.clone()))?
                .iter()
                .copied()
                .collect()),
            Expr::Node(op, a, b) => {
                let (a, b) = (go(a, sets)?, go(b, sets)?);
                Ok(match op {
                    Op::Union => a.union(&b).copied().collect(),
                    Op::Intersect => a.intersection(&b).copied().collect(),
                })
            }
        }
    }
    Ok(go(expr, sets)?.into_iter().collect())
}

/// `h_r(S)` as a plain set.
pub fn hash_image(set: &[u64], hash: &MotherHash, r: u32) -> PlainSet {
    plain(set.iter().map(|&x| hash.hash_r(x, r)).collect())
}

/// `f(h_r(S_1), ..., h_r(S_m))`, the expression evaluated on hash images.
pub fn image_evaluate(expr: &Expr, sets: &BTreeMap<String, PlainSet>, hash: &MotherHash, r: u32) -> Result<PlainSet> {
    let images = sets.iter().map(|(k, v)| (k.clone(), hash_image(v, hash, r))).collect();
    naive_evaluate(expr, &images)
}

/// Two-pointer intersection of sorted sets; returns the comparison count.
pub fn merge_intersect(a: &[u64], b: &[u64]) -> (PlainSet, u64) {
    let (mut i, mut j, mut cmp) = (0, 0, 0u64);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        cmp += 1;
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    (out, cmp)
}

/// Intersection of `m >= 2` sorted sets by pairwise merging, smallest
/// first. Returns the total comparison count.
pub fn merge_intersect_baseline(sets: &[&[u64]]) -> (PlainSet, u64) {
    let mut order: Vec<&[u64]> = sets.to_vec();
    order.sort_by_key(|s| s.len());
    let Some((first, rest)) = order.split_first() else {
        return (Vec::new(), 0);
    };
    let mut acc = first.to_vec();
    let mut total = 0;
    for s in rest {
        if acc.is_empty() {
            break;
        }
        let (next, c) = merge_intersect(&acc, s);
        acc = next;
        total += c;
    }
    (acc, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_examples() {
        let mut m = BTreeMap::new();
        m.insert("A".to_string(), vec![1, 2]);
        let a: Expr = "A".parse().unwrap();
        assert_eq!(naive_evaluate(&a, &m).unwrap(), vec![1, 2]);
        assert_eq!(naive_evaluate(&"(A & A)".parse().unwrap(), &m).unwrap(), vec![1, 2]);
        assert!(matches!(naive_evaluate(&"(A | B)".parse().unwrap(), &m), Err(Error::UnknownSet(_))));
    }

    #[test]
    fn baseline_examples() {
        let (r, c) = merge_intersect_baseline(&[&[1, 2, 3], &[2, 3, 4]]);
        assert_eq!(r, vec![2, 3]);
        assert!(c <= 6);
        let s = 100u64;
        let a: Vec<u64> = (0..s).map(|i| 2 * i).collect();
        let b: Vec<u64> = (0..s).map(|i| 2 * i + 1).collect();
        let (r, c) = merge_intersect_baseline(&[&a, &b]);
        assert!(r.is_empty() && c >= s);
        let (r, c) = merge_intersect_baseline(&[&a, &a]);
        assert_eq!(r, a);
        assert!(c <= 2 * s);
    }
}

/// Random instances for equivalence testing.
pub mod gen {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::{plain, PlainSet};
    use crate::expr::{Expr, Op};

    /// Set names `A`, `B`, ... for `m <= 26` sets.
    pub fn names(m: usize) -> Vec<String> {
        (0..m).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
    }

    /// A random binary tree with `leaves >= 1` leaves drawn from `names`,
    /// using every name at least once when `leaves >= names.len()`.
    pub fn random_expr(rng: &mut impl Rng, leaves: usize, names: &[String]) -> Expr {
        let mut pool: Vec<String> = names.iter().cycle().take(leaves.max(names.len())).cloned().collect();
        pool.truncate(leaves.max(1));
        pool.shuffle(rng);
        let mut items: Vec<Expr> = pool.into_iter().map(Expr::leaf).collect();
        while items.len() > 1 {
            let i = rng.gen_range(0..items.len() - 1);
            let b = items.remove(i + 1);
            let a = items.remove(i);
            let op = if rng.gen_bool(0.5) { Op::Union } else { Op::Intersect };
            items.insert(i, Expr::op(op, a, b));
        }
        items.pop().expect("one tree")
    }

    /// A random pure intersection of the given names, left-deep in random
    /// order.
    pub fn random_intersection(rng: &mut impl Rng, names: &[String]) -> Expr {
        let mut v = names.to_vec();
        v.shuffle(rng);
        let mut it = v.into_iter().map(Expr::leaf);
        let first = it.next().expect("at least one name");
        it.fold(first, |a, b| Expr::op(Op::Intersect, a, b))
    }

    /// `m` sets of log-uniform sizes in `[0, 2^max_log]` over `w`-bit values.
    /// Each element comes from a shared pool with probability `overlap` and
    /// is uniform otherwise.
    pub fn random_sets(rng: &mut impl Rng, m: usize, max_log: u32, overlap: f64, w: u32) -> Vec<PlainSet> {
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        let shared: Vec<u64> = (0..1usize << max_log).map(|_| rng.gen::<u64>() & mask).collect();
        (0..m)
            .map(|_| {
                let size = if rng.gen_bool(0.05) {
                    0
                } else {
                    (2f64.powf(rng.gen_range(0.0..=f64::from(max_log)))) as usize
                };
                plain(
                    (0..size)
                        .map(|_| {
                            if rng.gen_bool(overlap) {
                                shared[rng.gen_range(0..shared.len())]
                            } else {
                                rng.gen::<u64>() & mask
                            }
                        })
                        .collect(),
                )
            })
            .collect()
    }
}
