use std::borrow::Cow;

use super::catalog::check_compatible;
use super::{effective_resolution, EvalConfig, NodeStats, PhaseCounters, QueryStats};
use crate::bucketset::BucketedSet;
use crate::counter::OpCounter;
use crate::error::{bad, Result};
use crate::multires::{choose_resolution, MultiResSet, ResolutionMode};

/// Intersection of `m >= 2` sets. Intersects the images of all sets in
/// increasing size order, then checks the elements of the smallest set whose
/// hash survived against every other set.
pub fn intersect_fast(sets: &[&MultiResSet], cfg: &EvalConfig) -> Result<(Vec<u64>, QueryStats)> {
    if sets.len() < 2 {
        return Err(bad("intersect_fast needs at least two sets"));
    }
    for s in &sets[1..] {
        check_compatible(sets[0], s)?;
    }
    let start = OpCounter::snapshot();
    let mut order: Vec<usize> = (0..sets.len()).collect();
    order.sort_by_key(|&i| (sets[i].len(), i));
    let total: usize = sets.iter().map(|s| s.len()).sum();
    let smallest = sets[order[0]];
    let w = smallest.mother_hash().w();
    let r = cfg
        .resolution
        .unwrap_or_else(|| choose_resolution(total, w, ResolutionMode::Intersection, smallest.len(), cfg.c))
        .clamp(1, w);
    let r_eff = effective_resolution(sets.iter().copied(), r);

    let mut images = vec![0usize; sets.len()];
    let mut filtered = vec![0usize; sets.len()];
    let mut visited = Vec::new();
    let mut acc: Option<Cow<'_, BucketedSet>> = None;
    for &i in &order {
        visited.push(i);
        let (v, _) = sets[i].view(r_eff);
        images[i] = v.len();
        acc = Some(match acc {
            None => v,
            Some(a) => Cow::Owned(a.intersect(&v)?),
        });
        let a = acc.as_deref().expect("set above");
        filtered[i] = a.len();
        if a.is_empty() {
            break;
        }
    }
    let h = acc.expect("at least two sets");
    let t1 = OpCounter::snapshot();

    let mut cand = Vec::new();
    h.for_each(|v| cand.extend(smallest.lookup(v, r_eff)));
    let t2 = OpCounter::snapshot();

    let mut result: Vec<u64> = cand
        .iter()
        .copied()
        .filter(|&x| order[1..].iter().all(|&i| sets[i].contains(x)))
        .collect();
    result.sort_unstable();
    let t3 = OpCounter::snapshot();

    let k = result.len();
    let nodes = (0..sets.len())
        .map(|i| NodeStats {
            id: i,
            expr: sets[i].name().to_string(),
            image: images[i],
            filtered: filtered[i],
            candidates: (i == order[0]).then_some(cand.len()),
        })
        .collect();
    let skipped = order.iter().copied().filter(|i| !visited.contains(i)).collect();
    let total = OpCounter::since(start);
    Ok((
        result,
        QueryStats {
            method: "intersect_fast",
            mode: ResolutionMode::Intersection,
            r,
            r_effective: r_eff,
            clamped: r_eff < r,
            nodes,
            candidates: cand.len(),
            false_candidates: cand.len() - k,
            k,
            k_prime: k * sets.len(),
            word_ops: total.word_ops,
            hash_probes: total.hash_probes,
            phases: PhaseCounters {
                approx: t1 - start,
                filter: t2 - t1,
                exact: t3 - t2,
            },
            reductions: Vec::new(),
            skipped,
            visit_order: visited,
            rewrites_applied: 0,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multires::MotherHash;
    use crate::wordpar::WordWidth;

    #[test]
    fn matches_direct_intersection() {
        let h = MotherHash::from_u64(5, 64).unwrap();
        let a: Vec<u64> = (0..2000).map(|i| i * 3).collect();
        let b: Vec<u64> = (0..3000).map(|i| i * 5).collect();
        let c: Vec<u64> = (0..40).map(|i| i * 15 + 1).chain([0, 15, 30]).collect();
        let sets: Vec<MultiResSet> = [("A", &a), ("B", &b), ("C", &c)]
            .iter()
            .map(|(n, v)| MultiResSet::build(n, v, &h, WordWidth::W64).unwrap())
            .collect();
        let refs: Vec<&MultiResSet> = sets.iter().collect();
        let (res, st) = intersect_fast(&refs, &EvalConfig::default()).unwrap();
        assert_eq!(res, vec![0, 15, 30]);
        assert_eq!(st.k_prime, 9);
        assert_eq!(st.visit_order[0], 2);
        assert!(intersect_fast(&refs[..1], &EvalConfig::default()).is_err());
    }
}
