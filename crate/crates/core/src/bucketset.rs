//! Bucketed sets: `2^b` buckets of packed low-bit remainders.
//!
//! A set of `l`-bit integers is split by its top `b` bits. Bucket `i` holds
//! `{ v mod 2^(l-b) : v div 2^(l-b) = i }` as a packed set. All buckets live
//! in one payload buffer addressed by a dense offset table, and an empty
//! bucket takes no payload words.
//!
//! When `l - b` is too small for a field to count the fields of a word, the
//! buckets use the smallest legal field width instead and the extra entry
//! bits stay zero.
//!
//! ```
//! use mrset::bucketset::BucketedSet;
//! use mrset::wordpar::WordWidth;
//!
//! let s = BucketedSet::build(&[3, 17, 18, 40], 6, 2, WordWidth::W64).unwrap();
//! assert_eq!(s.bucket(1), vec![1, 2]);
//! assert_eq!(s.rebucket(1).unwrap().flatten(), vec![3, 17, 18, 40]);
//! assert_eq!(s.project_div(3).unwrap().flatten(), vec![0, 2, 5]);
//! ```

use std::borrow::Cow;
use std::fmt;

use crate::counter;
use crate::error::{bad, Error, Result};
use crate::util::floor_log2;
use crate::wordpar::kernel::{FieldWriter, Masks, Repack};
use crate::wordpar::reg::Reg;
use crate::wordpar::{Kernels, Layout, PackedRef, SetOp, WordWidth};

/// Largest supported bucket-index width.
pub const MAX_BUCKET_BITS: u32 = 30;

#[derive(Clone, PartialEq, Eq)]
pub struct BucketedSet {
    l: u32,
    b: u32,
    layout: Layout,
    size: usize,
    /// Word offset of each bucket, plus the end offset.
    starts: Vec<u32>,
    lens: Vec<u32>,
    payload: Vec<u64>,
}

impl fmt::Debug for BucketedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BucketedSet(l={}, b={}, f={}, W={}, size={})",
            self.l,
            self.b,
            self.layout.f(),
            self.layout.width(),
            self.size
        )
    }
}

/// Field width used by buckets of `l - b` remainder bits.
fn field_bits(l: u32, b: u32, width: WordWidth) -> u32 {
    (l - b).max(width.min_field_bits())
}

/// `b` of a balanced set: largest `b <= log2 size - log2 W`, clamped to the
/// legal range for `l`.
pub fn balanced_b(size: usize, l: u32, width: WordWidth) -> u32 {
    let raw = floor_log2(size as u64).saturating_sub(width.log2());
    raw.clamp(min_b(l, width), l.min(MAX_BUCKET_BITS))
}

/// Smallest `b` whose remainders fit in a field.
pub fn min_b(l: u32, width: WordWidth) -> u32 {
    l.saturating_sub(width.max_field_bits())
}

fn check_params(l: u32, b: u32, width: WordWidth) -> Result<()> {
    if l == 0 || l > 64 {
        return Err(bad(format!("element width l={l} must be in 1..=64")));
    }
    if b > l || b > MAX_BUCKET_BITS {
        return Err(bad(format!("bucket bits b={b} invalid for l={l}")));
    }
    if b < min_b(l, width) {
        return Err(bad(format!(
            "remainders of {} bits do not fit in a {width}-bit word",
            l - b
        )));
    }
    Ok(())
}

/// Accumulates buckets in order into one payload.
struct Builder<'k> {
    m: &'k Masks,
    payload: Vec<u64>,
    starts: Vec<u32>,
    lens: Vec<u32>,
}

impl<'k> Builder<'k> {
    fn new(m: &'k Masks, buckets: usize, words_hint: usize) -> Builder<'k> {
        let mut starts = Vec::with_capacity(buckets + 1);
        starts.push(0);
        Builder {
            m,
            payload: Vec::with_capacity(words_hint * m.s.stride()),
            starts,
            lens: Vec::with_capacity(buckets),
        }
    }

    fn bucket(&mut self, fill: impl FnOnce(&mut FieldWriter<'_>)) {
        counter::word_ops(1);
        let mut w = FieldWriter::new(self.m, &mut self.payload);
        fill(&mut w);
        let n = w.finish();
        self.lens.push(u32::try_from(n).expect("bucket too large"));
        let words = self.payload.len() / self.m.s.stride();
        self.starts.push(u32::try_from(words).expect("payload too large"));
    }

    fn finish(self, l: u32, b: u32, layout: Layout) -> BucketedSet {
        debug_assert_eq!(self.lens.len(), 1 << b);
        let size = self.lens.iter().map(|&n| n as usize).sum();
        BucketedSet {
            l,
            b,
            layout,
            size,
            starts: self.starts,
            lens: self.lens,
            payload: self.payload,
        }
    }
}

impl BucketedSet {
    /// Builds from sorted distinct `l`-bit values.
    pub fn build(values: &[u64], l: u32, b: u32, width: WordWidth) -> Result<BucketedSet> {
        check_params(l, b, width)?;
        if let Some(i) = values.windows(2).position(|p| p[0] >= p[1]) {
            return Err(Error::NotSortedDistinct(i + 1));
        }
        if let Some(&v) = values.last() {
            if l < 64 && v >> l != 0 {
                return Err(Error::ValueOutOfRange { value: v, bits: l });
            }
        }
        Ok(BucketedSet::build_unchecked(values, l, b, width))
    }

    pub(crate) fn build_unchecked(values: &[u64], l: u32, b: u32, width: WordWidth) -> BucketedSet {
        let layout = Layout::new(field_bits(l, b, width), width).expect("checked parameters");
        let m = Masks::for_layout(&layout);
        let s = l - b;
        let low = if s == 0 { 0 } else { u64::MAX >> (64 - s) };
        let mut out = Builder::new(&m, 1 << b, layout.words_for(values.len()));
        let mut rest = values;
        for i in 0..1u64 << b {
            let n = rest.iter().take_while(|&&v| high(v, s) == i).count();
            out.bucket(|w| {
                for &v in &rest[..n] {
                    w.push_value(v & low);
                }
            });
            rest = &rest[n..];
        }
        out.finish(l, b, layout)
    }

    /// Balanced set from sorted distinct values.
    pub fn build_balanced(values: &[u64], l: u32, width: WordWidth) -> Result<BucketedSet> {
        BucketedSet::build(values, l, balanced_b(values.len(), l, width), width)
    }

    pub fn empty(l: u32, width: WordWidth) -> Result<BucketedSet> {
        BucketedSet::build(&[], l, min_b(l, width), width)
    }

    /// Element bit width.
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Bucket index bit width.
    pub fn b(&self) -> u32 {
        self.b
    }

    pub fn width(&self) -> WordWidth {
        self.layout.width()
    }

    /// Packed field layout of the buckets.
    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    /// True when `b` is the balanced choice for the current size.
    pub fn is_balanced(&self) -> bool {
        self.b == balanced_b(self.size, self.l, self.width())
    }

    pub fn bucket_count(&self) -> usize {
        1 << self.b
    }

    /// Payload size in simulated words.
    pub fn payload_words(&self) -> usize {
        self.payload.len() / self.width().limbs()
    }

    fn stride(&self) -> usize {
        self.width().limbs()
    }

    pub(crate) fn bucket_ref(&self, i: usize) -> PackedRef<'_> {
        let st = self.stride();
        PackedRef {
            words: &self.payload[self.starts[i] as usize * st..self.starts[i + 1] as usize * st],
            len: self.lens[i] as usize,
        }
    }

    /// Remainders stored in bucket `i`.
    pub fn bucket(&self, i: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.lens[i] as usize);
        self.decode_bucket(i, |r| out.push(r));
        out
    }

    fn decode_bucket(&self, i: usize, mut f: impl FnMut(u64)) {
        let r = self.bucket_ref(i);
        let k = self.layout.fields_per_word() as usize;
        let fb = self.layout.field_bits();
        let shape = self.width().shape();
        let mut left = r.len;
        for w in r.words.chunks(self.stride()) {
            let x = Reg::load(shape, w);
            for j in 0..left.min(k) {
                f(x.bits_const(j as u32 * fb, self.layout.f()));
            }
            left = left.saturating_sub(k);
        }
    }

    /// Calls `f` on every element in increasing order.
    pub fn for_each(&self, mut f: impl FnMut(u64)) {
        let s = self.l - self.b;
        for i in 0..self.bucket_count() {
            if self.lens[i] == 0 {
                continue;
            }
            let hi = if s == 64 { 0 } else { (i as u64) << s };
            self.decode_bucket(i, |r| f(hi | r));
        }
    }

    /// All elements in increasing order.
    pub fn flatten(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.size);
        self.for_each(|v| out.push(v));
        out
    }

    /// Converts to `2^new_b` buckets; the represented set is unchanged.
    pub fn rebucket(&self, new_b: u32) -> Result<BucketedSet> {
        check_params(self.l, new_b, self.width())?;
        Ok(match new_b.cmp(&self.b) {
            std::cmp::Ordering::Equal => self.clone(),
            std::cmp::Ordering::Greater => self.split(new_b),
            std::cmp::Ordering::Less => self.join(new_b),
        })
    }

    /// Rebucket to a larger `b`: cut every bucket at the boundaries of the
    /// next `d` bits, drop those bits and narrow the fields.
    fn split(&self, nb: u32) -> BucketedSet {
        let d = nb - self.b;
        let s = self.l - self.b;
        let s2 = s - d;
        let width = self.width();
        let old = Masks::for_layout(&self.layout);
        let layout = Layout::new(field_bits(self.l, nb, width), width).expect("checked");
        let new = Masks::for_layout(&layout);
        let repack = Repack::new(&old, &new);
        let narrowing = layout.f() < self.layout.f();
        let keep = old.broadcast(if s2 == 0 { 0 } else { (1u64 << s2) - 1 });
        let k = old.k as usize;
        let subs = 1usize << d;
        let mut out = Builder::new(&new, 1 << nb, layout.words_for(self.size) + (1 << nb));
        let mut cuts = vec![0usize; subs + 1];
        for i in 0..self.bucket_count() {
            let src = self.bucket_ref(i);
            if src.len == 0 {
                for _ in 0..subs {
                    out.bucket(|_| {});
                }
                continue;
            }
            // cuts[j] = first position whose top d bits are >= j
            let mut next = 1usize;
            let n_words = src.len.div_ceil(k);
            for w in 0..n_words {
                if next >= subs {
                    break;
                }
                let x = Reg::load(old.s, &src.words[w * old.s.stride()..(w + 1) * old.s.stride()]);
                let last = ((src.len - w * k).min(k) - 1) as u32;
                let top = (old.field(&x, last) >> s2) as usize;
                while next <= top {
                    let ge = old.ge(x, old.splat((next as u64) << s2));
                    let below = old.k - ge.count_ones();
                    cuts[next] = w * k + below as usize;
                    next += 1;
                }
            }
            for c in cuts.iter_mut().take(subs).skip(next) {
                *c = src.len;
            }
            cuts[subs] = src.len;
            for j in 0..subs {
                let (from, to) = (cuts[j], cuts[j + 1]);
                out.bucket(|w| {
                    let mut p = from;
                    while p < to {
                        let n = (to - p).min(k) as u32;
                        let mut e = old.read_chunk(src.words, p, n) & keep;
                        if narrowing {
                            e = repack.apply(e);
                        }
                        w.push(e, n);
                        p += n as usize;
                    }
                });
            }
        }
        out.finish(self.l, nb, layout)
    }

    /// Rebucket to a smaller `b`: widen every bucket's fields and prefix the
    /// bits that used to be the bucket index.
    fn join(&self, nb: u32) -> BucketedSet {
        let d = self.b - nb;
        let s = self.l - self.b;
        let width = self.width();
        let old = Masks::for_layout(&self.layout);
        let layout = Layout::new(field_bits(self.l, nb, width), width).expect("checked");
        let new = Masks::for_layout(&layout);
        let repack = Repack::new(&old, &new);
        let chunk = repack.chunk as usize;
        let mut out = Builder::new(&new, 1 << nb, layout.words_for(self.size) + (1 << nb));
        for i in 0..1usize << nb {
            out.bucket(|w| {
                for j in 0..1usize << d {
                    let src = self.bucket_ref((i << d) | j);
                    counter::word_ops(1);
                    if src.len == 0 {
                        continue;
                    }
                    let prefix = new.splat((j as u64) << s);
                    let mut p = 0;
                    while p < src.len {
                        let n = (src.len - p).min(chunk) as u32;
                        let e = repack.apply(old.read_chunk(src.words, p, n));
                        w.push(e | (prefix & new.low_fields(n)), n);
                        p += n as usize;
                    }
                }
            });
        }
        out.finish(self.l, nb, layout)
    }

    /// `{ v div 2^x }` as `(l - x)`-bit integers, for `b < x < l`.
    pub fn project_div(&self, x: u32) -> Result<BucketedSet> {
        if x <= self.b || x >= self.l {
            return Err(bad(format!(
                "projection by 2^{x} needs b < x < l (b={}, l={})",
                self.b, self.l
            )));
        }
        self.shift_down(x)
    }

    /// `{ v div 2^x }` as `(l - x)`-bit integers for any `x < l`.
    ///
    /// The bucket count is kept when `x <= l - b`; otherwise the set is first
    /// rebucketed so that every bucket index survives the shift.
    pub fn shift_down(&self, x: u32) -> Result<BucketedSet> {
        if x >= self.l {
            return Err(bad(format!("cannot shift {}-bit elements down by {x}", self.l)));
        }
        if x == 0 {
            return Ok(self.clone());
        }
        let s = self.l - self.b;
        if x > s {
            return self.rebucket(self.l - x)?.shift_down(x);
        }
        let l2 = self.l - x;
        let width = self.width();
        let old = Masks::for_layout(&self.layout);
        let layout = Layout::new(field_bits(l2, self.b, width), width).expect("checked");
        let new = Masks::for_layout(&layout);
        let repack = Repack::new(&old, &new);
        let narrowing = layout.f() < self.layout.f();
        let drop = old.entry.andn(old.broadcast((1u64 << x) - 1));
        let st = old.s.stride();
        let mut tmp = Vec::new();
        let mut out = Builder::new(&new, self.bucket_count(), self.payload_words());
        for i in 0..self.bucket_count() {
            let src = self.bucket_ref(i);
            out.bucket(|w| {
                if src.len == 0 {
                    return;
                }
                tmp.clear();
                for word in src.words.chunks(st) {
                    let v = Reg::load(old.s, word);
                    (((v & drop) >> x) | (v & old.h)).store(&mut tmp);
                }
                old.dedup_words(&tmp, tmp.len() / st, false, |e, c| {
                    w.push(if narrowing { repack.apply(e) } else { e }, c)
                });
            });
        }
        Ok(out.finish(l2, self.b, layout))
    }

    /// Rebuckets to the balanced `b` for the current size.
    pub fn balance(&self) -> BucketedSet {
        self.rebucket(balanced_b(self.size, self.l, self.width()))
            .expect("balanced b is always legal")
    }

    /// Like [`BucketedSet::balance`] but reuses `self` when already balanced.
    pub fn into_balanced(self) -> BucketedSet {
        if self.is_balanced() {
            self
        } else {
            self.balance()
        }
    }

    fn balanced_cow(&self) -> Cow<'_, BucketedSet> {
        if self.is_balanced() {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.balance())
        }
    }

    pub fn union(&self, other: &BucketedSet) -> Result<BucketedSet> {
        self.set_op(other, SetOp::Union)
    }

    pub fn intersect(&self, other: &BucketedSet) -> Result<BucketedSet> {
        self.set_op(other, SetOp::Intersect)
    }

    fn set_op(&self, other: &BucketedSet, op: SetOp) -> Result<BucketedSet> {
        if self.l != other.l || self.width() != other.width() {
            return Err(Error::ParameterMismatch(format!(
                "l={} W={} vs l={} W={}",
                self.l,
                self.width(),
                other.l,
                other.width()
            )));
        }
        match op {
            SetOp::Intersect if self.is_empty() || other.is_empty() => {
                return BucketedSet::empty(self.l, self.width())
            }
            SetOp::Union if other.is_empty() => return Ok(self.balanced_cow().into_owned()),
            SetOp::Union if self.is_empty() => return Ok(other.balanced_cow().into_owned()),
            _ => {}
        }
        let b = balanced_b(self.size + other.size, self.l, self.width());
        let x = self.rebucket_cow(b);
        let y = other.rebucket_cow(b);
        let kern = Kernels::new(x.layout);
        let mut out = Builder::new(&kern.m, 1 << b, x.payload_words() + y.payload_words());
        for i in 0..1usize << b {
            out.bucket(|w| kern.set_op(x.bucket_ref(i), y.bucket_ref(i), op, w));
        }
        let r = out.finish(self.l, b, x.layout);
        Ok(r.balanced_cow().into_owned())
    }

    fn rebucket_cow(&self, b: u32) -> Cow<'_, BucketedSet> {
        if self.b == b {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.rebucket(b).expect("legal b"))
        }
    }

    /// Raw parts for serialization: offsets (in words), lengths, payload limbs.
    pub(crate) fn parts(&self) -> (&[u32], &[u32], &[u64]) {
        (&self.starts, &self.lens, &self.payload)
    }

    /// Reassembles a set from serialized parts, checking the structure.
    pub(crate) fn from_parts(
        l: u32,
        b: u32,
        f: u32,
        width: WordWidth,
        starts: Vec<u32>,
        lens: Vec<u32>,
        payload: Vec<u64>,
    ) -> Result<BucketedSet> {
        check_params(l, b, width).map_err(|e| Error::Format(e.to_string()))?;
        if f != field_bits(l, b, width) {
            return Err(Error::Format(format!("field width {f} does not match l={l} b={b}")));
        }
        let layout = Layout::new(f, width)?;
        let nb = 1usize << b;
        if starts.len() != nb + 1 || lens.len() != nb || starts[0] != 0 {
            return Err(Error::Format("bucket table has the wrong shape".into()));
        }
        for i in 0..nb {
            let words = starts[i + 1].checked_sub(starts[i]);
            if words != Some(layout.words_for(lens[i] as usize) as u32) {
                return Err(Error::Format(format!("bucket {i} has inconsistent extent")));
            }
        }
        if starts[nb] as usize * width.limbs() != payload.len() {
            return Err(Error::Format("payload length does not match bucket table".into()));
        }
        let size = lens.iter().map(|&n| n as usize).sum();
        Ok(BucketedSet {
            l,
            b,
            layout,
            size,
            starts,
            lens,
            payload,
        })
    }

    /// Checks sortedness, range and field discipline of every bucket.
    pub fn validate(&self) -> Result<()> {
        let cap = if self.l - self.b == 64 { u64::MAX } else { (1u64 << (self.l - self.b)) - 1 };
        for i in 0..self.bucket_count() {
            let r = self.bucket_ref(i);
            let seq = crate::wordpar::PackedArray::from_raw(self.layout, r.words.to_vec(), r.len);
            seq.validate()?;
            let v = self.bucket(i);
            if v.windows(2).any(|p| p[0] >= p[1]) || v.iter().any(|&x| x > cap) {
                return Err(Error::Format(format!("bucket {i} is not a sorted set of remainders")));
            }
        }
        Ok(())
    }
}

fn high(v: u64, s: u32) -> u64 {
    if s >= 64 {
        0
    } else {
        v >> s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const W64: WordWidth = WordWidth::W64;

    fn buckets(s: &BucketedSet) -> Vec<Vec<u64>> {
        (0..s.bucket_count()).map(|i| s.bucket(i)).collect()
    }

    #[test]
    fn build_examples() {
        let s = BucketedSet::build(&[3, 17, 18, 40], 6, 2, W64).unwrap();
        assert_eq!(buckets(&s), vec![vec![3], vec![1, 2], vec![8], vec![]]);
        assert_eq!(s.flatten(), vec![3, 17, 18, 40]);
        let e = BucketedSet::build(&[], 6, 2, W64).unwrap();
        assert_eq!(buckets(&e), vec![Vec::<u64>::new(); 4]);
        let z = BucketedSet::build(&[0, 63], 6, 0, W64).unwrap();
        assert_eq!(buckets(&z), vec![vec![0, 63]]);
        s.validate().unwrap();
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(BucketedSet::build(&[2, 1], 6, 2, W64).is_err());
        assert!(BucketedSet::build(&[64], 6, 2, W64).is_err());
        assert!(BucketedSet::build(&[1], 6, 7, W64).is_err());
        assert!(BucketedSet::build(&[1], 64, 0, W64).is_err());
    }

    #[test]
    fn rebucket_examples() {
        let s = BucketedSet::build(&[3, 17, 18, 40], 6, 2, W64).unwrap();
        let r = s.rebucket(1).unwrap();
        assert_eq!(buckets(&r), vec![vec![3, 17, 18], vec![8]]);
        assert_eq!(s.rebucket(2).unwrap(), s);
        let z = BucketedSet::build(&[1, 9, 20, 33, 34, 60], 6, 0, W64).unwrap();
        assert_eq!(
            z.rebucket(2).unwrap(),
            BucketedSet::build(&z.flatten(), 6, 2, W64).unwrap()
        );
    }

    #[test]
    fn project_examples() {
        let s = BucketedSet::build(&[3, 17, 18, 40], 6, 1, W64).unwrap();
        let p = s.project_div(2).unwrap();
        assert_eq!(p.flatten(), vec![0, 4, 10]);
        assert_eq!((p.l(), p.b()), (4, 1));
        let one = BucketedSet::build(&[5], 6, 1, W64).unwrap();
        assert_eq!(one.project_div(5).unwrap().flatten(), vec![0]);
        assert!(one.project_div(1).is_err());
        assert!(one.project_div(6).is_err());
        let e = BucketedSet::build(&[], 6, 1, W64).unwrap();
        assert!(e.project_div(3).unwrap().is_empty());
    }

    #[test]
    fn shift_down_past_bucket_bits_rebuckets() {
        let v: Vec<u64> = (0..200).map(|i| i * 97 % 4096).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
        let s = BucketedSet::build(&v, 12, 8, W64).unwrap();
        let p = s.shift_down(7).unwrap();
        let mut want: Vec<u64> = v.iter().map(|x| x >> 7).collect();
        want.dedup();
        assert_eq!(p.flatten(), want);
        assert_eq!(p.l(), 5);
    }

    #[test]
    fn balance_formula() {
        assert_eq!(balanced_b(4096, 40, W64), 6);
        assert_eq!(balanced_b(100, 40, WordWidth::W512), 0);
        assert_eq!(balanced_b(0, 8, W64), 0);
        assert_eq!(balanced_b(10, 64, W64), 1);
    }

    #[test]
    fn set_op_examples() {
        let a = BucketedSet::build(&[1, 2, 3], 6, 0, W64).unwrap();
        let b = BucketedSet::build(&[2, 3, 4], 6, 1, W64).unwrap();
        assert_eq!(a.intersect(&b).unwrap().flatten(), vec![2, 3]);
        assert_eq!(a.union(&b).unwrap().flatten(), vec![1, 2, 3, 4]);
        let e = BucketedSet::empty(6, W64).unwrap();
        assert_eq!(a.union(&e).unwrap().flatten(), vec![1, 2, 3]);
        assert!(a.intersect(&e).unwrap().is_empty());
        let c = BucketedSet::build(&[1], 7, 0, W64).unwrap();
        assert!(matches!(a.union(&c), Err(Error::ParameterMismatch(_))));
    }

    #[test]
    fn exhaustive_l4_pairs() {
        for x in (0u32..1 << 16).step_by(257) {
            let a: Vec<u64> = (0..16).filter(|i| x >> i & 1 == 1).collect();
            let sa = BucketedSet::build_balanced(&a, 4, W64).unwrap();
            for y in (0u32..1 << 16).step_by(263) {
                let b: Vec<u64> = (0..16).filter(|i| y >> i & 1 == 1).collect();
                let sb = BucketedSet::build_balanced(&b, 4, W64).unwrap();
                let u: Vec<u64> = (0..16).filter(|i| (x | y) >> i & 1 == 1).collect();
                let n: Vec<u64> = (0..16).filter(|i| (x & y) >> i & 1 == 1).collect();
                assert_eq!(sa.union(&sb).unwrap().flatten(), u);
                assert_eq!(sa.intersect(&sb).unwrap().flatten(), n);
            }
        }
    }
}
