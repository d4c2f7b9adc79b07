use std::collections::BTreeMap;

use mrset::evalexpr::{
    annotate, approx_evaluate, evaluate, exact_evaluate, filter_topdown, intersect_fast, query, Catalog, EvalConfig,
    ExprTree, QueryMode,
};
use mrset::oracle::{self, gen, PlainSet};
use mrset::{Expr, MotherHash, MultiResSet, WordWidth};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Instance {
    expr: Expr,
    plain: BTreeMap<String, PlainSet>,
    cat: Catalog,
    hash: MotherHash,
}

fn instance(seed: u64, leaves: usize, m: usize, max_log: u32, overlap: f64, w: u32, width: WordWidth) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = gen::names(m);
    let sets = gen::random_sets(&mut rng, m, max_log, overlap, w);
    let expr = gen::random_expr(&mut rng, leaves, &names);
    let hash = MotherHash::from_u64(rng.gen(), w).unwrap();
    let mut cat = Catalog::new();
    for (n, s) in names.iter().zip(&sets) {
        cat.insert(MultiResSet::build(n, s, &hash, width).unwrap()).unwrap();
    }
    let plain = names.into_iter().zip(sets).collect();
    Instance { expr, plain, cat, hash }
}

fn width() -> impl Strategy<Value = WordWidth> {
    prop_oneof![Just(WordWidth::W64), Just(WordWidth::W512)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn evaluate_matches_oracle(
        seed in any::<u64>(),
        leaves in 1usize..=8,
        m in 1usize..=5,
        max_log in 0u32..=8,
        overlap in 0.0f64..=1.0,
        w in prop_oneof![Just(64u32), Just(32), Just(16)],
        width in width(),
        tiny_r in prop::option::of(1u32..=6),
        rewrite in any::<bool>(),
        reduce in any::<bool>(),
    ) {
        let inst = instance(seed, leaves, m, max_log, overlap, w, width);
        let want = oracle::naive_evaluate(&inst.expr, &inst.plain).unwrap();
        let cfg = EvalConfig { resolution: tiny_r, rewrite, reduce, ..EvalConfig::default() };
        let (got, st) = evaluate(&inst.expr, &inst.cat, &cfg).unwrap();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(st.k, want.len());
        prop_assert!(st.k_prime >= st.k);
        prop_assert_eq!(st.false_candidates + st.k_prime, st.candidates);
        let (got, _) = query(&inst.expr, &inst.cat, &cfg).unwrap();
        prop_assert_eq!(&got, &want);
    }

    #[test]
    fn intersect_fast_matches_oracle(
        seed in any::<u64>(),
        m in 2usize..=6,
        max_log in 0u32..=9,
        overlap in 0.5f64..=1.0,
        width in width(),
        tiny_r in prop::option::of(1u32..=6),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = instance(seed, m, m, max_log, overlap, 64, width);
        let expr = gen::random_intersection(&mut rng, &gen::names(m));
        let want = oracle::naive_evaluate(&expr, &inst.plain).unwrap();
        let cfg = EvalConfig { resolution: tiny_r, ..EvalConfig::default() };
        let sets: Vec<&MultiResSet> = expr.leaves().iter().map(|n| inst.cat.get(n).unwrap()).collect();
        let (got, st) = intersect_fast(&sets, &cfg).unwrap();
        prop_assert_eq!(&got, &want);
        prop_assert_eq!(st.k_prime, want.len() * m);
        let gcfg = EvalConfig { mode: QueryMode::General, ..cfg };
        prop_assert_eq!(query(&expr, &inst.cat, &gcfg).unwrap().0, want);
    }

    /// `H` covers the image of the result, each `I'_v` lies inside `I_v`
    /// and `H`, candidates come from their own set, and the expression on
    /// candidates equals the expression on the inputs.
    #[test]
    fn superset_chain(
        seed in any::<u64>(),
        leaves in 1usize..=8,
        max_log in 0u32..=8,
        overlap in 0.0f64..=1.0,
        r in 1u32..=20,
        reduce in any::<bool>(),
    ) {
        let inst = instance(seed, leaves, 4, max_log, overlap, 64, WordWidth::W64);
        let want = oracle::naive_evaluate(&inst.expr, &inst.plain).unwrap();
        let tree = ExprTree::new(&inst.expr);
        let ann = annotate(&tree, |n| inst.cat.get(n).map(|s| s.len() as u64)).unwrap();
        let approx = approx_evaluate(&tree, &ann, &inst.cat, r, reduce).unwrap();
        let h = approx.root().flatten();
        for v in oracle::hash_image(&want, &inst.hash, approx.r) {
            prop_assert!(h.binary_search(&v).is_ok());
        }
        let filt = filter_topdown(&tree, &approx, &inst.cat).unwrap();
        for v in 0..tree.len() {
            if let Some(fv) = &filt.images[v] {
                let iv = approx.images[v].as_ref().unwrap().flatten();
                for x in fv.flatten() {
                    prop_assert!(iv.binary_search(&x).is_ok());
                    prop_assert!(h.binary_search(&x).is_ok());
                }
            }
        }
        let mut cand_sets = BTreeMap::new();
        for leaf in tree.leaves() {
            let name = tree.leaf_name(leaf).unwrap();
            let c = oracle::plain(filt.candidates[leaf].clone());
            prop_assert_eq!(c.len(), filt.candidates[leaf].len());
            for x in &c {
                prop_assert!(inst.plain[name].binary_search(x).is_ok());
            }
            cand_sets.insert(format!("L{leaf}"), c);
        }
        let relabeled = relabel(&tree, 0);
        prop_assert_eq!(&oracle::naive_evaluate(&relabeled, &cand_sets).unwrap(), &want);
        prop_assert_eq!(exact_evaluate(&tree, &ann, &filt.candidates).0, want);
    }

    #[test]
    fn traversal_visits_smaller_psi_star_first(seed in any::<u64>(), leaves in 2usize..=8) {
        let inst = instance(seed, leaves, 6, 8, 0.8, 64, WordWidth::W64);
        let tree = ExprTree::new(&inst.expr);
        let ann = annotate(&tree, |n| inst.cat.get(n).map(|s| s.len() as u64)).unwrap();
        let approx = approx_evaluate(&tree, &ann, &inst.cat, 12, true).unwrap();
        let pos = |v: usize| approx.visit_order.iter().position(|&x| x == v);
        for v in 0..tree.len() {
            let Some((l, r)) = tree.node(v).children else { continue };
            let (Some(pl), Some(pr)) = (pos(l), pos(r)) else { continue };
            let (first, second) = if pl < pr { (l, r) } else { (r, l) };
            prop_assert!(ann.psi_star[first] <= ann.psi_star[second]);
            if tree.is_intersection(v) {
                prop_assert!((ann.psi_star[first], ann.psi[first]) <= (ann.psi_star[second], ann.psi[second]));
            }
        }
    }

    /// psi never decreases through a union parent and never increases
    /// through an intersection parent.
    #[test]
    fn psi_monotone_along_paths(seed in any::<u64>(), leaves in 1usize..=8) {
        let inst = instance(seed, leaves, 5, 10, 0.5, 64, WordWidth::W64);
        let tree = ExprTree::new(&inst.expr);
        let ann = annotate(&tree, |n| inst.cat.get(n).map(|s| s.len() as u64)).unwrap();
        for v in 1..tree.len() {
            let p = tree.node(v).parent.unwrap();
            if tree.is_intersection(p) {
                prop_assert!(ann.psi[p] <= ann.psi[v]);
            } else {
                prop_assert!(ann.psi[p] >= ann.psi[v]);
            }
            if let Some(c) = ann.reduce_partner[v] {
                prop_assert_eq!(ann.psi[c], ann.psi_star[v]);
            }
        }
    }
}

/// The tree with leaf `i` renamed to `L{i}`.
fn relabel(tree: &ExprTree, v: usize) -> Expr {
    match tree.node(v).children {
        None => Expr::leaf(format!("L{v}")),
        Some((a, b)) => Expr::op(tree.op(v).unwrap(), relabel(tree, a), relabel(tree, b)),
    }
}

fn catalog(sets: &[(&str, Vec<u64>)], w: u32) -> (Catalog, MotherHash) {
    let h = MotherHash::from_u64(11, w).unwrap();
    let mut c = Catalog::new();
    for (n, v) in sets {
        c.insert(MultiResSet::build(n, v, &h, WordWidth::W64).unwrap()).unwrap();
    }
    (c, h)
}

#[test]
fn reduction_fires_and_preserves_result() {
    let b: Vec<u64> = (0..3000).map(|i| i * 2).collect();
    let c: Vec<u64> = (0..3000).map(|i| i * 2 + 1).collect();
    let (cat, _) = catalog(&[("A", vec![4, 7, 100_001]), ("B", b), ("C", c)], 64);
    let e: Expr = "(A & (B | C))".parse().unwrap();
    let on = EvalConfig { rewrite: false, ..EvalConfig::default() };
    let off = EvalConfig { reduce: false, ..on.clone() };
    let (r1, s1) = evaluate(&e, &cat, &on).unwrap();
    let (r2, s2) = evaluate(&e, &cat, &off).unwrap();
    assert_eq!(r1, vec![4, 7]);
    assert_eq!(r1, r2);
    // ids: 0 root, 1 A, 2 (B | C), 3 B, 4 C
    assert_eq!(s1.reductions, vec![3, 4]);
    assert!(s2.reductions.is_empty());
    assert_eq!(s1.visit_order, vec![0, 1, 2, 3, 4]);
    assert!(s1.nodes[3].image <= 6 && s2.nodes[3].image == 3000);
}

#[test]
fn disjoint_leaves_at_full_resolution() {
    let (cat, h) = catalog(&[("A", (0..500).collect()), ("B", (1000..1500).collect())], 64);
    let tree = ExprTree::new(&"(A & B)".parse().unwrap());
    let ann = annotate(&tree, |n| cat.get(n).map(|s| s.len() as u64)).unwrap();
    let a = approx_evaluate(&tree, &ann, &cat, 64, true).unwrap();
    // the finest stored image is the best any query can use
    assert_eq!(a.r, cat.get("A").unwrap().resolution_limit());
    let ha = oracle::hash_image(&(0..500).collect::<Vec<_>>(), &h, a.r);
    let hb = oracle::hash_image(&(1000..1500).collect::<Vec<_>>(), &h, a.r);
    assert!(oracle::merge_intersect(&ha, &hb).0.is_empty());
    assert!(a.root().is_empty());
    let f = filter_topdown(&tree, &a, &cat).unwrap();
    assert!(f.candidates.iter().all(Vec::is_empty));
}

#[test]
fn single_leaf_and_unfiltered_leaf() {
    let (cat, _) = catalog(&[("A", vec![3, 1, 4, 15, 9]), ("B", vec![2, 6])], 64);
    let tree = ExprTree::new(&"(A | B)".parse().unwrap());
    let ann = annotate(&tree, |n| cat.get(n).map(|s| s.len() as u64)).unwrap();
    let a = approx_evaluate(&tree, &ann, &cat, 30, true).unwrap();
    let f = filter_topdown(&tree, &a, &cat).unwrap();
    assert_eq!(oracle::plain(f.candidates[1].clone()), vec![1, 3, 4, 9, 15]);
    assert_eq!(oracle::plain(f.candidates[2].clone()), vec![2, 6]);
    let one = ExprTree::new(&Expr::leaf("A"));
    let ann = annotate(&one, |n| cat.get(n).map(|s| s.len() as u64)).unwrap();
    let a = approx_evaluate(&one, &ann, &cat, 30, true).unwrap();
    assert_eq!(a.root(), &*cat.get("A").unwrap().view(30).0);
}

#[test]
fn identical_sets_and_empty_sets() {
    let s: Vec<u64> = (0..700).map(|i| i * 31).collect();
    let (cat, _) = catalog(&[("A", s.clone()), ("B", s.clone()), ("C", s.clone()), ("E", vec![]), ("F", vec![])], 64);
    let cfg = EvalConfig { rewrite: false, ..EvalConfig::default() };
    for e in ["((A & B) & C)", "(A & (B & C))"] {
        let e: Expr = e.parse().unwrap();
        for mode in [QueryMode::General, QueryMode::Intersect] {
            let (r, st) = query(&e, &cat, &EvalConfig { mode, ..cfg.clone() }).unwrap();
            assert_eq!(r, s);
            assert_eq!(st.k_prime, 3 * s.len());
        }
    }
    let (r, st) = evaluate(&"(E | F)".parse().unwrap(), &cat, &cfg).unwrap();
    assert!(r.is_empty());
    assert_eq!(st.candidates, 0);
    let (r, st) = evaluate(&"(E & A)".parse().unwrap(), &cat, &cfg).unwrap();
    assert!(r.is_empty());
    assert_eq!(st.skipped.len(), 1);
}

#[test]
fn two_way_paths_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..20 {
        let sets = gen::random_sets(&mut rng, 2, 10, 0.7, 64);
        let (cat, _) = catalog(&[("A", sets[0].clone()), ("B", sets[1].clone())], 64);
        let e: Expr = "(A & B)".parse().unwrap();
        let g = evaluate(&e, &cat, &EvalConfig::default()).unwrap().0;
        let f = intersect_fast(&[cat.get("A").unwrap(), cat.get("B").unwrap()], &EvalConfig::default()).unwrap().0;
        assert_eq!(g, f);
        assert_eq!(g, oracle::merge_intersect(&sets[0], &sets[1]).0);
    }
}

#[test]
fn rewrite_preserves_result() {
    let big: Vec<u64> = (0..20_000).map(|i| i * 3).collect();
    let big2: Vec<u64> = (0..20_000).map(|i| i * 5).collect();
    let (cat, _) = catalog(&[("A", vec![0, 15, 16, 30]), ("B", big), ("C", big2), ("D", vec![15, 45])], 64);
    let e: Expr = "(((A & B) & C) | D)".parse().unwrap();
    let (r1, s1) = evaluate(&e, &cat, &EvalConfig::default()).unwrap();
    let (r2, s2) = evaluate(&e, &cat, &EvalConfig { rewrite: false, ..EvalConfig::default() }).unwrap();
    assert_eq!(s1.rewrites_applied, 1);
    assert_eq!(s2.rewrites_applied, 0);
    assert_eq!(r1, vec![0, 15, 30, 45]);
    assert_eq!(r1, r2);
}
