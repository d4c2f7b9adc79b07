//! Evaluation of union/intersection expressions over preprocessed sets.
//!
//! A query runs in three phases:
//!
//! 1. **Approximate**: evaluate the expression bottom-up on hash images
//!    `h_r(S_i)` with word-parallel bucketed set operations, giving an
//!    image `I_v` per node and `H` at the root.
//! 2. **Filter**: top-down, `I'_v = I_v ∩ I'_parent`; at each leaf, look up
//!    the elements whose hash lies in `I'_leaf`. These candidate sets `S'_i`
//!    are small and still contain everything the result needs.
//! 3. **Exact**: evaluate the expression on the candidates, element by
//!    element, by routing signals between intersection nodes.
//!
//! Hash collisions can only add candidates, never lose result elements, so
//! the output is always exact.
//!
//! ```
//! use mrset::evalexpr::{evaluate, Catalog, EvalConfig};
//! use mrset::multires::{MotherHash, MultiResSet};
//! use mrset::wordpar::WordWidth;
//!
//! let h = MotherHash::from_u64(1, 64).unwrap();
//! let mut cat = Catalog::new();
//! for (name, v) in [("A", vec![1, 2, 5]), ("B", vec![2, 3, 5]), ("C", vec![9])] {
//!     cat.insert(MultiResSet::build(name, &v, &h, WordWidth::W64).unwrap()).unwrap();
//! }
//! let expr = "((A & B) | C)".parse().unwrap();
//! let (result, stats) = evaluate(&expr, &cat, &EvalConfig::default()).unwrap();
//! assert_eq!(result, vec![2, 5, 9]);
//! assert_eq!(stats.k, 3);
//! ```

mod catalog;
mod fast;
mod rewrite;
mod tree;

use std::borrow::Cow;
use std::collections::HashMap;

use serde::Serialize;
use smallvec::SmallVec;

pub use catalog::{Catalog, SetSource};
pub use fast::intersect_fast;
pub use rewrite::{asymmetric_rewrite, rewrite_costs, Rewrite};
pub use tree::{annotate, Annotation, ExprTree, NodeKind, TreeNode};

use crate::bucketset::BucketedSet;
use crate::counter::{self, OpCounter};
use crate::error::{bad, Error, Result};
use crate::expr::{Expr, Op};
use crate::multires::{choose_resolution, MultiResSet, ResolutionMode, DEFAULT_C};
use catalog::{check_compatible, Overlay};

/// Which algorithm answers a query.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    /// The m-way intersection path for pure intersections, the general
    /// evaluator otherwise.
    #[default]
    Auto,
    General,
    /// Requires a pure intersection.
    Intersect,
}

#[derive(Clone, Debug)]
pub struct EvalConfig {
    /// Additive constant in the resolution formula.
    pub c: u32,
    /// Fixed resolution instead of the formula.
    pub resolution: Option<u32>,
    pub mode: QueryMode,
    /// Replace cheap all-leaf intersections by probing the smallest set.
    pub rewrite: bool,
    /// Shrink node images that exceed twice their `psi*` bound.
    pub reduce: bool,
}

impl Default for EvalConfig {
    fn default() -> EvalConfig {
        EvalConfig {
            c: DEFAULT_C,
            resolution: None,
            mode: QueryMode::Auto,
            rewrite: true,
            reduce: true,
        }
    }
}

/// Counter deltas per phase.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct PhaseCounters {
    pub approx: OpCounter,
    pub filter: OpCounter,
    pub exact: OpCounter,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodeStats {
    pub id: usize,
    pub expr: String,
    /// `|I_v|`.
    pub image: usize,
    /// `|I'_v|`.
    pub filtered: usize,
    /// `|S'_i|` at leaves.
    pub candidates: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QueryStats {
    pub method: &'static str,
    pub mode: ResolutionMode,
    pub r: u32,
    pub r_effective: u32,
    /// True when some set could not serve the requested resolution.
    pub clamped: bool,
    pub nodes: Vec<NodeStats>,
    /// Total candidate occurrences, `sum |S'_i|`.
    pub candidates: usize,
    pub false_candidates: usize,
    pub k: usize,
    pub k_prime: usize,
    pub word_ops: u64,
    pub hash_probes: u64,
    pub phases: PhaseCounters,
    pub reductions: Vec<usize>,
    pub skipped: Vec<usize>,
    pub visit_order: Vec<usize>,
    pub rewrites_applied: usize,
}

/// Largest resolution `<= r` every set can serve without clamping.
pub fn effective_resolution<'a>(sets: impl IntoIterator<Item = &'a MultiResSet>, r: u32) -> u32 {
    let mut r = r.max(1);
    for s in sets {
        r = r.min(s.mother_hash().w());
        if s.len() >= 2 {
            r = r.min(s.resolution_limit());
        }
    }
    r
}

/// Looks up every leaf and checks that all sets share one hash.
fn resolve_leaves<'a, S: SetSource + ?Sized>(tree: &ExprTree, sets: &'a S) -> Result<Vec<&'a MultiResSet>> {
    let mut out: Vec<&MultiResSet> = Vec::new();
    for i in tree.leaves() {
        let name = tree.leaf_name(i).expect("leaf");
        let s = sets.get(name).ok_or_else(|| Error::UnknownSet(name.to_string()))?;
        if let Some(first) = out.first() {
            check_compatible(first, s)?;
        }
        out.push(s);
    }
    Ok(out)
}

/// Results of the approximate phase.
#[derive(Clone, Debug)]
pub struct Approx<'a> {
    pub r: u32,
    /// `I_v` per node; `None` for nodes skipped after an empty operand.
    pub images: Vec<Option<Cow<'a, BucketedSet>>>,
    /// Nodes in the order they were entered.
    pub visit_order: Vec<usize>,
    /// Nodes whose image was intersected with their reduction partner.
    pub reductions: Vec<usize>,
    pub skipped: Vec<usize>,
}

impl Approx<'_> {
    /// `H`, the root image.
    pub fn root(&self) -> &BucketedSet {
        self.images[ExprTree::ROOT].as_deref().expect("root is always evaluated")
    }
}

/// Bottom-up evaluation on hash images at resolution `r` (clamped to what
/// every leaf can serve).
pub fn approx_evaluate<'a, S: SetSource + ?Sized>(
    tree: &ExprTree,
    ann: &Annotation,
    sets: &'a S,
    r: u32,
    reduce: bool,
) -> Result<Approx<'a>> {
    let leaves = resolve_leaves(tree, sets)?;
    let r = effective_resolution(leaves.iter().copied(), r);
    let width = leaves[0].width();
    let mut st = Approx {
        r,
        images: vec![None; tree.len()],
        visit_order: Vec::with_capacity(tree.len()),
        reductions: Vec::new(),
        skipped: Vec::new(),
    };
    fn skip(tree: &ExprTree, v: usize, out: &mut Vec<usize>) {
        out.push(v);
        if let Some((a, b)) = tree.node(v).children {
            skip(tree, a, out);
            skip(tree, b, out);
        }
    }
    fn go<'a, S: SetSource + ?Sized>(
        v: usize,
        tree: &ExprTree,
        ann: &Annotation,
        sets: &'a S,
        reduce: bool,
        width: crate::wordpar::WordWidth,
        st: &mut Approx<'a>,
    ) -> Result<()> {
        st.visit_order.push(v);
        let mut img: Cow<'a, BucketedSet> = match tree.node(v).kind {
            NodeKind::Leaf(ref name) => sets.get(name).expect("resolved").view(st.r).0,
            NodeKind::Op(op) => {
                let (first, second) = ann.visit_order(tree, v).expect("operator has children");
                go(first, tree, ann, sets, reduce, width, st)?;
                let a_empty = st.images[first].as_ref().is_none_or(|s| s.is_empty());
                if op == Op::Intersect && a_empty {
                    skip(tree, second, &mut st.skipped);
                    Cow::Owned(BucketedSet::empty(st.r, width)?)
                } else {
                    go(second, tree, ann, sets, reduce, width, st)?;
                    let x = st.images[first].as_deref().expect("evaluated");
                    let y = st.images[second].as_deref().expect("evaluated");
                    Cow::Owned(match op {
                        Op::Union => x.union(y)?,
                        Op::Intersect => y.intersect(x)?,
                    })
                }
            }
        };
        if let Some(p) = ann.reduce_partner[v].filter(|_| reduce) {
            if img.len() as u64 > 2 * ann.psi_star[v] {
                if let Some(partner) = st.images[p].as_deref() {
                    img = Cow::Owned(img.intersect(partner)?);
                    st.reductions.push(v);
                }
            }
        }
        st.images[v] = Some(img);
        Ok(())
    }
    go(ExprTree::ROOT, tree, ann, sets, reduce, width, &mut st)?;
    Ok(st)
}

/// Results of the filter phase.
#[derive(Clone, Debug)]
pub struct Filtered {
    /// `I'_v` per node (`None` when empty or skipped).
    pub images: Vec<Option<BucketedSet>>,
    /// `S'_i` at each leaf (empty for internal nodes).
    pub candidates: Vec<Vec<u64>>,
}

/// Top-down `I'_v = I_v ∩ I'_parent`, then candidate extraction at leaves.
pub fn filter_topdown<S: SetSource + ?Sized>(tree: &ExprTree, approx: &Approx<'_>, sets: &S) -> Result<Filtered> {
    let n = tree.len();
    let mut images: Vec<Option<BucketedSet>> = vec![None; n];
    let mut candidates = vec![Vec::new(); n];
    for v in 0..n {
        let Some(iv) = approx.images[v].as_deref() else {
            continue;
        };
        let fv = match tree.node(v).parent {
            None => iv.clone(),
            Some(p) => match &images[p] {
                Some(fp) => iv.intersect(fp)?,
                None => continue,
            },
        };
        if fv.is_empty() {
            continue;
        }
        if let Some(name) = tree.leaf_name(v) {
            let set = sets.get(name).ok_or_else(|| Error::UnknownSet(name.to_string()))?;
            let out = &mut candidates[v];
            fv.for_each(|h| out.extend(set.lookup(h, approx.r)));
        }
        images[v] = Some(fv);
    }
    Ok(Filtered { images, candidates })
}

/// Exact evaluation on candidate sets, one element at a time. Returns the
/// sorted result and `k'`, the candidate occurrences of result elements.
pub fn exact_evaluate(tree: &ExprTree, ann: &Annotation, candidates: &[Vec<u64>]) -> (Vec<u64>, usize) {
    let total: usize = candidates.iter().map(Vec::len).sum();
    let mut occ: HashMap<u64, SmallVec<[u32; 4]>> = HashMap::with_capacity(total);
    for (leaf, c) in candidates.iter().enumerate() {
        for &x in c {
            occ.entry(x).or_default().push(leaf as u32);
        }
    }
    counter::probes(total as u64);
    let mut mask = vec![0u8; tree.len()];
    let mut touched = Vec::new();
    let mut stack = Vec::new();
    let mut result = Vec::new();
    let mut k_prime = 0;
    for (&x, leaves) in &occ {
        stack.clear();
        stack.extend(leaves.iter().map(|&l| l as usize));
        let mut hit = false;
        while let Some(v) = stack.pop() {
            match ann.nia[v] {
                None => {
                    hit = true;
                    break;
                }
                Some(a) => {
                    let bit = 1u8 << ann.side[v];
                    if mask[a] & bit == 0 {
                        if mask[a] == 0 {
                            touched.push(a);
                        }
                        mask[a] |= bit;
                        if mask[a] == 3 {
                            stack.push(a);
                        }
                    }
                }
            }
        }
        for a in touched.drain(..) {
            mask[a] = 0;
        }
        if hit {
            result.push(x);
            k_prime += leaves.len();
        }
    }
    result.sort_unstable();
    (result, k_prime)
}

fn resolution_for(expr: &Expr, leaves: &[&MultiResSet], cfg: &EvalConfig) -> (ResolutionMode, u32) {
    let mode = if expr.is_pure_intersection() && leaves.len() >= 2 {
        ResolutionMode::Intersection
    } else {
        ResolutionMode::General
    };
    let total: usize = leaves.iter().map(|s| s.len()).sum();
    let min = leaves.iter().map(|s| s.len()).min().unwrap_or(0);
    let w = leaves[0].mother_hash().w();
    let r = cfg.resolution.unwrap_or_else(|| choose_resolution(total, w, mode, min, cfg.c));
    (mode, r.clamp(1, w))
}

/// Evaluates `expr` exactly with the three-phase algorithm.
pub fn evaluate<S: SetSource + ?Sized>(expr: &Expr, sets: &S, cfg: &EvalConfig) -> Result<(Vec<u64>, QueryStats)> {
    let start = OpCounter::snapshot();
    resolve_leaves(&ExprTree::new(expr), sets)?;
    let rw = if cfg.rewrite {
        asymmetric_rewrite(expr, sets, cfg)?
    } else {
        Rewrite {
            expr: expr.clone(),
            virtual_sets: Vec::new(),
            applied: 0,
        }
    };
    let overlay = Overlay {
        base: sets,
        extra: rw.virtual_sets.into_iter().map(|s| (s.name().to_string(), s)).collect(),
    };
    let tree = ExprTree::new(&rw.expr);
    let leaves = resolve_leaves(&tree, &overlay)?;
    let ann = annotate(&tree, |n| overlay.get(n).map(|s| s.len() as u64))?;
    let (mode, r) = resolution_for(&rw.expr, &leaves, cfg);
    let t0 = OpCounter::snapshot();
    let approx = approx_evaluate(&tree, &ann, &overlay, r, cfg.reduce)?;
    let t1 = OpCounter::snapshot();
    let filtered = filter_topdown(&tree, &approx, &overlay)?;
    let t2 = OpCounter::snapshot();
    let (result, k_prime) = exact_evaluate(&tree, &ann, &filtered.candidates);
    let t3 = OpCounter::snapshot();
    let candidates: usize = filtered.candidates.iter().map(Vec::len).sum();
    let nodes = (0..tree.len())
        .map(|v| NodeStats {
            id: v,
            expr: tree.subexpr(v).to_string(),
            image: approx.images[v].as_ref().map_or(0, |s| s.len()),
            filtered: filtered.images[v].as_ref().map_or(0, |s| s.len()),
            candidates: tree.leaf_name(v).map(|_| filtered.candidates[v].len()),
        })
        .collect();
    let total = OpCounter::since(start);
    Ok((
        result.clone(),
        QueryStats {
            method: "evaluate",
            mode,
            r,
            r_effective: approx.r,
            clamped: approx.r < r,
            nodes,
            candidates,
            false_candidates: candidates - k_prime,
            k: result.len(),
            k_prime,
            word_ops: total.word_ops,
            hash_probes: total.hash_probes,
            phases: PhaseCounters {
                approx: t1 - t0,
                filter: t2 - t1,
                exact: t3 - t2,
            },
            reductions: approx.reductions,
            skipped: approx.skipped,
            visit_order: approx.visit_order,
            rewrites_applied: rw.applied,
        },
    ))
}

/// Answers a query with the algorithm selected by `cfg.mode`.
pub fn query<S: SetSource + ?Sized>(expr: &Expr, sets: &S, cfg: &EvalConfig) -> Result<(Vec<u64>, QueryStats)> {
    let leaves = expr.leaves();
    let fast = match cfg.mode {
        QueryMode::General => false,
        QueryMode::Auto => expr.is_pure_intersection() && leaves.len() >= 2,
        QueryMode::Intersect => {
            if !expr.is_pure_intersection() {
                return Err(bad("intersect mode needs an expression built only from `&`"));
            }
            leaves.len() >= 2
        }
    };
    if !fast {
        return evaluate(expr, sets, cfg);
    }
    let resolved = leaves
        .iter()
        .map(|n| sets.get(n).ok_or_else(|| Error::UnknownSet(n.to_string())))
        .collect::<Result<Vec<_>>>()?;
    intersect_fast(&resolved, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multires::MotherHash;
    use crate::wordpar::WordWidth;

    fn catalog(sets: &[(&str, &[u64])], seed: u64) -> Catalog {
        let h = MotherHash::from_u64(seed, 64).unwrap();
        let mut c = Catalog::new();
        for (n, v) in sets {
            c.insert(MultiResSet::build(n, v, &h, WordWidth::W64).unwrap()).unwrap();
        }
        c
    }

    #[test]
    fn exact_routing_examples() {
        let t = ExprTree::new(&"((A & B) | C)".parse().unwrap());
        let ann = annotate(&t, |_| Some(1)).unwrap();
        // x in A and C, y only in A, z in A and B
        let mut cand = vec![Vec::new(); t.len()];
        cand[2] = vec![10, 20, 30];
        cand[3] = vec![30];
        cand[4] = vec![10];
        let (res, kp) = exact_evaluate(&t, &ann, &cand);
        assert_eq!(res, vec![10, 30]);
        assert_eq!(kp, 4);
    }

    #[test]
    fn evaluate_small_examples() {
        let c = catalog(&[("A", &[1, 2]), ("B", &[2, 3]), ("C", &[9]), ("E", &[])], 3);
        let q = |s: &str| evaluate(&s.parse().unwrap(), &c, &EvalConfig::default()).unwrap();
        assert_eq!(q("((A & B) | C)").0, vec![2, 9]);
        assert_eq!(q("A").0, vec![1, 2]);
        assert_eq!(q("(A & A)").0, vec![1, 2]);
        assert_eq!(q("(A & A)").1.k_prime, 4);
        let (r, s) = q("(E & E)");
        assert!(r.is_empty());
        assert_eq!(s.candidates, 0);
        assert!(matches!(
            evaluate(&"(A & Z)".parse().unwrap(), &c, &EvalConfig::default()),
            Err(Error::UnknownSet(n)) if n == "Z"
        ));
    }

    #[test]
    fn seed_mismatch_is_rejected() {
        let mut c = catalog(&[("A", &[1, 2])], 1);
        let h2 = MotherHash::from_u64(2, 64).unwrap();
        let b = MultiResSet::build("B", &[1], &h2, WordWidth::W64).unwrap();
        assert!(matches!(c.insert(b.clone()), Err(Error::SeedMismatch(_))));
        let mut m = HashMap::new();
        m.insert("A".to_string(), c.get("A").unwrap().clone());
        m.insert("B".to_string(), b);
        let e: Expr = "(A | B)".parse().unwrap();
        assert!(matches!(evaluate(&e, &m, &EvalConfig::default()), Err(Error::SeedMismatch(_))));
        c.insert(MultiResSet::build("A", &[7], c.get("A").unwrap().mother_hash(), WordWidth::W64).unwrap())
            .unwrap();
    }

    #[test]
    fn query_modes() {
        let c = catalog(&[("A", &[1, 2, 3]), ("B", &[2, 3, 4]), ("C", &[3, 5])], 4);
        let e: Expr = "((A & B) & C)".parse().unwrap();
        for mode in [QueryMode::Auto, QueryMode::General, QueryMode::Intersect] {
            let cfg = EvalConfig { mode, ..EvalConfig::default() };
            let (r, s) = query(&e, &c, &cfg).unwrap();
            assert_eq!(r, vec![3]);
            assert_eq!(s.method, if mode == QueryMode::General { "evaluate" } else { "intersect_fast" });
        }
        let u: Expr = "(A | B)".parse().unwrap();
        let cfg = EvalConfig { mode: QueryMode::Intersect, ..EvalConfig::default() };
        assert!(matches!(query(&u, &c, &cfg), Err(Error::BadParameter(_))));
    }
}
