use std::collections::BTreeSet;

use mrset::wordpar::{Kernel, PackedArray, PackedSeq, PackedSet, WordWidth};
use proptest::prelude::*;

fn layout_strategy() -> impl Strategy<Value = (u32, WordWidth)> {
    prop_oneof![Just(64u32), Just(128), Just(256), Just(512)].prop_flat_map(|w| {
        let w = WordWidth::new(w).unwrap();
        (w.min_field_bits().max(3)..=16u32, Just(w))
    })
}

fn set_strategy(f: u32) -> impl Strategy<Value = Vec<u64>> {
    let max = 1u64 << f;
    prop::collection::btree_set(0..max, 0..200).prop_map(|s| s.into_iter().collect())
}

fn pair() -> impl Strategy<Value = (u32, WordWidth, Vec<u64>, Vec<u64>)> {
    layout_strategy().prop_flat_map(|(f, w)| (Just(f), Just(w), set_strategy(f), set_strategy(f)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn round_trip((f, w, a, _b) in pair()) {
        let s = PackedSeq::encode(&a, f, w).unwrap();
        prop_assert_eq!(s.decode(), a);
        s.as_array().validate().unwrap();
    }

    #[test]
    fn set_ops_match_btreeset((f, w, a, b) in pair()) {
        let pa = PackedSet::from_sorted(&a, f, w).unwrap();
        let pb = PackedSet::from_sorted(&b, f, w).unwrap();
        let sa: BTreeSet<u64> = a.iter().copied().collect();
        let sb: BTreeSet<u64> = b.iter().copied().collect();
        let u = pa.union(&pb).unwrap();
        let i = pa.intersect(&pb).unwrap();
        prop_assert_eq!(u.to_vec(), sa.union(&sb).copied().collect::<Vec<_>>());
        prop_assert_eq!(i.to_vec(), sa.intersection(&sb).copied().collect::<Vec<_>>());
        u.as_seq().as_array().validate().unwrap();
        i.as_seq().as_array().validate().unwrap();
    }

    #[test]
    fn merge_matches_sorted_concat((f, w, a, b) in pair()) {
        let m = PackedSeq::encode(&a, f, w).unwrap().merge(&PackedSeq::encode(&b, f, w).unwrap()).unwrap();
        let mut want = [a, b].concat();
        want.sort_unstable();
        prop_assert_eq!(m.decode(), want);
        m.as_array().validate().unwrap();
    }

    #[test]
    fn compaction_kernels_agree(
        (f, w) in layout_strategy(),
        raw in prop::collection::vec(prop::option::weighted(0.6, any::<u64>()), 0..300),
    ) {
        let fields: Vec<Option<u64>> = raw.iter().map(|o| o.map(|v| v & ((1 << f) - 1))).collect();
        let a = PackedArray::from_fields(&fields, f, w).unwrap();
        let x = a.compact_with(Kernel::WordParallel);
        let y = a.compact_with(Kernel::Scalar);
        prop_assert_eq!(&x, &y);
        x.validate().unwrap();
        let occupied: Vec<u64> = fields.iter().flatten().copied().collect();
        let got = x.fields();
        prop_assert_eq!(got.len(), fields.len());
        prop_assert_eq!(got.iter().flatten().copied().collect::<Vec<_>>(), occupied.clone());
        prop_assert!(got[..occupied.len()].iter().all(Option::is_some));
    }
}

#[test]
fn exhaustive_f3_subsets() {
    for bits in [16, 32] {
        let w = WordWidth::new(bits).unwrap();
        for x in 0u32..256 {
            let a: Vec<u64> = (0..8).filter(|i| x >> i & 1 == 1).collect();
            let pa = PackedSet::from_sorted(&a, 3, w).unwrap();
            for y in 0u32..256 {
                let b: Vec<u64> = (0..8).filter(|i| y >> i & 1 == 1).collect();
                let pb = PackedSet::from_sorted(&b, 3, w).unwrap();
                let u: Vec<u64> = (0..8).filter(|i| (x | y) >> i & 1 == 1).collect();
                let n: Vec<u64> = (0..8).filter(|i| (x & y) >> i & 1 == 1).collect();
                assert_eq!(pa.union(&pb).unwrap().to_vec(), u);
                assert_eq!(pa.intersect(&pb).unwrap().to_vec(), n);
            }
        }
    }
}
