//! Multi-resolution set representation.
//!
//! A preprocessed set keeps its hash image `h_r(S)` as a balanced bucketed
//! set at a handful of resolutions `r`, plus one table from hash values back
//! to elements. All sets in a query share one [`MotherHash`] `h*`;
//! `h_r(x)` is the top `r` bits of `h*(x)`, so any coarser image can be
//! derived from a finer stored one by dropping low bits.
//!
//! ```
//! use mrset::multires::{MotherHash, MultiResSet};
//! use mrset::wordpar::WordWidth;
//!
//! let h = MotherHash::from_u64(7, 64).unwrap();
//! let elems: Vec<u64> = (0..1000).map(|i| i * 7919).collect();
//! let s = MultiResSet::build("A", &elems, &h, WordWidth::W64).unwrap();
//! assert_eq!(s.grid_keys(), vec![11, 12, 14, 18, 26, 42]);
//!
//! let (view, r) = s.view(13);
//! assert_eq!(r, 13);
//! let x = elems[5];
//! assert!(view.flatten().contains(&h.hash_r(x, 13)));
//! assert!(s.lookup(h.hash_r(x, 13), 13).contains(&x));
//! ```

mod format;

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use smallvec::SmallVec;

use crate::bucketset::BucketedSet;
use crate::counter;
use crate::error::{bad, Error, Result};
use crate::util::{ceil_log2, floor_log2};
use crate::wordpar::WordWidth;

/// Default additive constant in the resolution formula.
pub const DEFAULT_C: u32 = 2;

/// The shared hash `h*(x) = ((a*x + c) mod 2^(2w)) div 2^w` with random
/// `2w`-bit `a`, `c`, a strongly universal family.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct MotherHash {
    seed: [u8; 16],
    w: u32,
    a: u128,
    c: u128,
    mask: u128,
}

impl std::fmt::Debug for MotherHash {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MotherHash(w={}, seed={:02x?})", self.w, self.seed)
    }
}

impl MotherHash {
    /// Draws `h*` for `w`-bit keys; `w` must be in `8..=64`.
    pub fn new(seed: [u8; 16], w: u32) -> Result<MotherHash> {
        if !(8..=64).contains(&w) {
            return Err(bad(format!("key width w={w} must be in 8..=64")));
        }
        let mut full = [0u8; 32];
        full[..16].copy_from_slice(&seed);
        let mut rng = ChaCha8Rng::from_seed(full);
        let mask = if w == 64 { u128::MAX } else { (1u128 << (2 * w)) - 1 };
        let a = rng.gen::<u128>() & mask;
        let c = rng.gen::<u128>() & mask;
        Ok(MotherHash { seed, w, a, c, mask })
    }

    /// Seed bytes are `s` little-endian followed by zeros.
    pub fn from_u64(s: u64, w: u32) -> Result<MotherHash> {
        let mut seed = [0u8; 16];
        seed[..8].copy_from_slice(&s.to_le_bytes());
        MotherHash::new(seed, w)
    }

    pub fn seed(&self) -> [u8; 16] {
        self.seed
    }

    /// Key width.
    pub fn w(&self) -> u32 {
        self.w
    }

    /// `h*(x)`, a `w`-bit value. `x` must fit in `w` bits.
    #[inline]
    pub fn hash(&self, x: u64) -> u64 {
        let v = self.a.wrapping_mul(u128::from(x)).wrapping_add(self.c) & self.mask;
        (v >> self.w) as u64
    }

    /// Top `r` bits of `h*(x)`.
    #[inline]
    pub fn hash_r(&self, x: u64, r: u32) -> u64 {
        debug_assert!((1..=self.w).contains(&r));
        self.hash(x) >> (self.w - r)
    }

    /// Checked form of [`MotherHash::hash_r`].
    pub fn try_hash_r(&self, x: u64, r: u32) -> Result<u64> {
        if !(1..=self.w).contains(&r) {
            return Err(bad(format!("resolution {r} outside 1..={}", self.w)));
        }
        if self.w < 64 && x >> self.w != 0 {
            return Err(Error::ValueOutOfRange { value: x, bits: self.w });
        }
        Ok(self.hash_r(x, r))
    }
}

/// How the resolution is derived from the input sizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResolutionMode {
    /// `log` of the total input size.
    General,
    /// `log` of the smallest set, for pure intersections.
    Intersection,
}

/// `min(w, ceil(log2 n) + ceil(log2 w) + c)` where `n` is the total size in
/// general mode and the smallest set size in intersection mode.
pub fn choose_resolution(total_n: usize, w: u32, mode: ResolutionMode, min_set_size: usize, c: u32) -> u32 {
    let n = match mode {
        ResolutionMode::General => total_n,
        ResolutionMode::Intersection => min_set_size,
    };
    (ceil_log2(n.max(1) as u64) + ceil_log2(u64::from(w)) + c).clamp(1, w)
}

/// Stored resolutions for a set of `n1` elements with `w`-bit keys.
pub fn grid_keys(n1: usize, w: u32) -> Vec<u32> {
    if n1 <= 1 {
        return vec![w.min(2)];
    }
    let lg = ceil_log2(n1 as u64);
    if lg >= w {
        return vec![w];
    }
    (0..=floor_log2(u64::from(w - lg))).map(|i| lg + (1 << i)).collect()
}

/// Hash value to elements: `2^lg` slots keyed by the top `lg` bits of `h*`,
/// with the elements of each slot stored contiguously in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct LookupTable {
    lg: u32,
    slot_start: Vec<u32>,
    chain: Vec<u64>,
}

impl LookupTable {
    fn build(sorted: &[u64], h: &MotherHash) -> LookupTable {
        let lg = ceil_log2(sorted.len() as u64);
        let slot = |x: u64| if lg == 0 { 0 } else { (h.hash(x) >> (h.w - lg)) as usize };
        let mut slot_start = vec![0u32; (1 << lg) + 1];
        for &x in sorted {
            slot_start[slot(x) + 1] += 1;
        }
        for i in 0..1 << lg {
            slot_start[i + 1] += slot_start[i];
        }
        let mut fill = slot_start.clone();
        let mut chain = vec![0u64; sorted.len()];
        for &x in sorted {
            let s = slot(x);
            chain[fill[s] as usize] = x;
            fill[s] += 1;
        }
        counter::probes(sorted.len() as u64);
        LookupTable { lg, slot_start, chain }
    }

    fn slots(&self, value: u64, r: u32) -> std::ops::Range<usize> {
        let (lo, hi) = if r >= self.lg {
            let s = value.checked_shr(r - self.lg).unwrap_or(0) as usize;
            (s, s + 1)
        } else {
            let span = self.lg - r;
            ((value << span) as usize, ((value + 1) << span) as usize)
        };
        self.slot_start[lo] as usize..self.slot_start[hi] as usize
    }
}

/// A preprocessed set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiResSet {
    name: String,
    hash: MotherHash,
    width: WordWidth,
    dedup: u64,
    grid: BTreeMap<u32, BucketedSet>,
    lookup: LookupTable,
}

impl MultiResSet {
    /// Preprocesses `elements` (any order; repeats are dropped and counted).
    ///
    /// The image at the largest grid key is built by hashing; each smaller
    /// key is derived from the next larger one by dropping low bits.
    pub fn build(name: &str, elements: &[u64], hash: &MotherHash, width: WordWidth) -> Result<MultiResSet> {
        let w = hash.w();
        if let Some(&x) = elements.iter().find(|&&x| w < 64 && x >> w != 0) {
            return Err(Error::ValueOutOfRange { value: x, bits: w });
        }
        let mut sorted = elements.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let dedup = (elements.len() - sorted.len()) as u64;
        let keys = grid_keys(sorted.len(), w);
        let top = *keys.last().expect("grid is never empty");
        let mut image: Vec<u64> = sorted.iter().map(|&x| hash.hash_r(x, top)).collect();
        counter::word_ops(sorted.len() as u64);
        image.sort_unstable();
        image.dedup();
        let mut grid = BTreeMap::new();
        let mut cur = BucketedSet::build_balanced(&image, top, width)?;
        for pair in keys.windows(2).rev() {
            let next = cur.shift_down(pair[1] - pair[0])?.into_balanced();
            grid.insert(pair[1], cur);
            cur = next;
        }
        grid.insert(keys[0], cur);
        Ok(MultiResSet {
            name: name.to_string(),
            hash: *hash,
            width,
            dedup,
            grid,
            lookup: LookupTable::build(&sorted, hash),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rename(&mut self, name: &str) {
        self.name = name.to_string();
    }

    /// `n1`, the number of distinct elements.
    pub fn len(&self) -> usize {
        self.lookup.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Repeated input elements dropped at build time.
    pub fn dedup_count(&self) -> u64 {
        self.dedup
    }

    pub fn mother_hash(&self) -> &MotherHash {
        &self.hash
    }

    pub fn width(&self) -> WordWidth {
        self.width
    }

    pub fn grid_keys(&self) -> Vec<u32> {
        self.grid.keys().copied().collect()
    }

    pub fn max_key(&self) -> u32 {
        *self.grid.keys().next_back().expect("grid is never empty")
    }

    /// Stored image at exactly `r`, if `r` is a grid key.
    pub fn stored(&self, r: u32) -> Option<&BucketedSet> {
        self.grid.get(&r)
    }

    /// The elements in increasing order.
    pub fn elements(&self) -> Vec<u64> {
        let mut v = self.lookup.chain.clone();
        v.sort_unstable();
        v
    }

    /// Highest resolution this set can serve without clamping.
    pub fn resolution_limit(&self) -> u32 {
        if self.len() <= 1 {
            self.hash.w()
        } else {
            self.max_key()
        }
    }

    /// `h_r(S)` at effective resolution `min(r, resolution_limit)`, which is
    /// returned alongside. Stored keys are returned as is; other values are
    /// derived from the next stored key above.
    pub fn view(&self, r: u32) -> (Cow<'_, BucketedSet>, u32) {
        let r = r.clamp(1, self.hash.w());
        if self.len() <= 1 {
            if let Some(s) = self.grid.get(&r) {
                return (Cow::Borrowed(s), r);
            }
            let img: Vec<u64> = self.lookup.chain.iter().map(|&x| self.hash.hash_r(x, r)).collect();
            counter::word_ops(1);
            let s = BucketedSet::build_balanced(&img, r, self.width).expect("valid image");
            return (Cow::Owned(s), r);
        }
        match self.grid.range(r..).next() {
            None => {
                let (&k, s) = self.grid.iter().next_back().expect("grid is never empty");
                (Cow::Borrowed(s), k)
            }
            Some((&k, s)) if k == r => (Cow::Borrowed(s), r),
            Some((&k, s)) => {
                let d = s.shift_down(k - r).expect("r >= 1").into_balanced();
                (Cow::Owned(d), r)
            }
        }
    }

    /// Elements `x` with `h_r(x) = value`. Counts one hash probe.
    pub fn lookup(&self, value: u64, r: u32) -> SmallVec<[u64; 4]> {
        counter::probes(1);
        let shift = self.hash.w() - r;
        self.lookup.chain[self.lookup.slots(value, r)]
            .iter()
            .copied()
            .filter(|&x| self.hash.hash(x) >> shift == value)
            .collect()
    }

    /// Membership test through the lookup table. Counts one hash probe.
    pub fn contains(&self, x: u64) -> bool {
        if self.hash.w() < 64 && x >> self.hash.w() != 0 {
            return false;
        }
        counter::probes(1);
        let lg = self.lookup.lg;
        let v = self.hash.hash(x).checked_shr(self.hash.w() - lg).unwrap_or(0);
        self.lookup.chain[self.lookup.slots(v, lg)].contains(&x)
    }

    /// Checks every stored image against direct hashing.
    pub fn verify(&self) -> Result<()> {
        let elems = self.elements();
        for (&r, s) in &self.grid {
            let mut want: Vec<u64> = elems.iter().map(|&x| self.hash.hash_r(x, r)).collect();
            want.sort_unstable();
            want.dedup();
            if s.flatten() != want {
                return Err(Error::Format(format!("image at r={r} does not match the elements")));
            }
            if s.l() != r || !s.is_balanced() {
                return Err(Error::Format(format!("image at r={r} has wrong parameters")));
            }
        }
        if self.grid_keys() != grid_keys(self.len(), self.hash.w()) {
            return Err(Error::Format("unexpected grid keys".into()));
        }
        Ok(())
    }

    /// True when both sets were built with the same hash and word width.
    pub fn compatible(&self, other: &MultiResSet) -> bool {
        self.hash == other.hash && self.width == other.width
    }
}
