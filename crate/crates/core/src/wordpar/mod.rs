//! Packed arrays, sequences and sets over simulated `W`-bit words.
//!
//! A packed array with parameter `f` splits every word into
//! `K = floor(W / (f + 1))` fields numbered from the least significant end.
//! The top bit of a field is its test bit: `1` means vacant (and the entry
//! bits are zero), `0` means the entry holds an integer in `[0, 2^f)`.
//! Arrays longer than `K` continue in the next word.
//!
//! ```
//! use mrset::wordpar::{PackedSet, WordWidth};
//!
//! let w = WordWidth::new(64).unwrap();
//! let a = PackedSet::from_sorted(&[1, 4, 9], 5, w).unwrap();
//! let b = PackedSet::from_sorted(&[2, 4, 9, 30], 5, w).unwrap();
//! assert_eq!(a.union(&b).unwrap().to_vec(), vec![1, 2, 4, 9, 30]);
//! assert_eq!(a.intersect(&b).unwrap().to_vec(), vec![4, 9]);
//! ```

pub(crate) mod kernel;
pub(crate) mod reg;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{bad, Error, Result};
use crate::util::ceil_log2;
use kernel::{FieldWriter, Masks, MergeKernel};
use reg::{Reg, Shape};

/// Width of a simulated machine word in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct WordWidth(u32);

impl WordWidth {
    pub const W64: WordWidth = WordWidth(64);
    pub const W128: WordWidth = WordWidth(128);
    pub const W256: WordWidth = WordWidth(256);
    pub const W512: WordWidth = WordWidth(512);

    /// Accepts 8, 16 and 32 (single narrow words, handy for small
    /// experiments) and 64, 128, 256, 512 (one to eight 64-bit limbs).
    pub fn new(bits: u32) -> Result<WordWidth> {
        match bits {
            8 | 16 | 32 | 64 | 128 | 256 | 512 => Ok(WordWidth(bits)),
            _ => Err(bad(format!("unsupported word width {bits}"))),
        }
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn log2(self) -> u32 {
        self.0.trailing_zeros()
    }

    /// 64-bit limbs used to store one word.
    pub fn limbs(self) -> usize {
        self.0.div_ceil(64) as usize
    }

    pub(crate) fn shape(self) -> Shape {
        Shape::new(self.0, self.0)
    }

    /// Smallest entry width `f` whose fields can count the fields of a word.
    pub fn min_field_bits(self) -> u32 {
        (1..=self.max_field_bits())
            .find(|&f| f >= ceil_log2(u64::from(self.0 / (f + 1))))
            .expect("some field width is always valid")
    }

    /// Largest entry width: one field per word, entries at most 63 bits.
    pub fn max_field_bits(self) -> u32 {
        (self.0 - 1).min(63)
    }
}

impl TryFrom<u32> for WordWidth {
    type Error = Error;
    fn try_from(bits: u32) -> Result<WordWidth> {
        WordWidth::new(bits)
    }
}

impl From<WordWidth> for u32 {
    fn from(w: WordWidth) -> u32 {
        w.0
    }
}

impl fmt::Display for WordWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Field geometry: entry width `f` and word width `W`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    f: u32,
    width: WordWidth,
    k: u32,
}

impl Layout {
    /// Fails unless `1 <= f <= min(W - 1, 63)` and `f >= ceil(log2 K)`.
    pub fn new(f: u32, width: WordWidth) -> Result<Layout> {
        if f == 0 || f > width.max_field_bits() {
            return Err(bad(format!("field width {f} invalid for W={width}")));
        }
        let k = width.bits() / (f + 1);
        if f < ceil_log2(u64::from(k)) {
            return Err(bad(format!(
                "field width {f} cannot count the {k} fields of a {width}-bit word"
            )));
        }
        Ok(Layout { f, width, k })
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn field_bits(&self) -> u32 {
        self.f + 1
    }

    /// `K`, the number of fields in one word.
    pub fn fields_per_word(&self) -> u32 {
        self.k
    }

    pub fn width(&self) -> WordWidth {
        self.width
    }

    /// Words needed for `len` fields (zero for zero).
    pub fn words_for(&self, len: usize) -> usize {
        len.div_ceil(self.k as usize)
    }

    fn check_value(&self, v: u64) -> Result<()> {
        if v >> self.f != 0 {
            Err(Error::ValueOutOfRange {
                value: v,
                bits: self.f,
            })
        } else {
            Ok(())
        }
    }

    fn check_same(&self, other: &Layout) -> Result<()> {
        if self != other {
            Err(Error::ParameterMismatch(format!(
                "f={} W={} vs f={} W={}",
                self.f, self.width, other.f, other.width
            )))
        } else {
            Ok(())
        }
    }
}

/// Which compaction routine to run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Kernel {
    /// Prefix-count and `log K` rounds of masked shifts per word.
    #[default]
    WordParallel,
    /// Field-at-a-time reference path, for debugging.
    Scalar,
}

/// Borrowed view of a packed sequence stored in a larger buffer.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PackedRef<'a> {
    pub words: &'a [u64],
    pub len: usize,
}

/// Per-layout kernels, built once and shared across many buckets.
#[derive(Clone, Debug)]
pub(crate) struct Kernels {
    pub m: Masks,
    pub merge: MergeKernel,
}

/// Set operation applied after merging.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum SetOp {
    Union,
    Intersect,
}

impl Kernels {
    pub fn new(layout: Layout) -> Kernels {
        let m = Masks::for_layout(&layout);
        let merge = MergeKernel::new(&m);
        Kernels { m, merge }
    }

    /// Union or intersection of two packed sets, appended to `writer`:
    /// merge, mark duplicates, vacate, compact.
    pub fn set_op(&self, a: PackedRef<'_>, b: PackedRef<'_>, op: SetOp, writer: &mut FieldWriter<'_>) {
        match (a.len, b.len, op) {
            (0, _, SetOp::Intersect) | (_, 0, SetOp::Intersect) => {}
            (0, _, SetOp::Union) => writer.push_words(b.words, b.len),
            (_, 0, SetOp::Union) => writer.push_words(a.words, a.len),
            _ => {
                let mut merged = Vec::new();
                let mut mw = FieldWriter::new(&self.m, &mut merged);
                self.merge.merge(a.words, a.len, b.words, b.len, &mut mw);
                mw.finish();
                let n = merged.len() / self.m.s.stride();
                self.m
                    .dedup_words(&merged, n, op == SetOp::Intersect, |e, c| writer.push(e, c));
            }
        }
    }
}

/// A packed array: fields may be vacant anywhere.
#[derive(Clone, PartialEq, Eq)]
pub struct PackedArray {
    layout: Layout,
    words: Vec<u64>,
    len: usize,
}

impl fmt::Debug for PackedArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PackedArray")
            .field("f", &self.layout.f)
            .field("W", &self.layout.width.0)
            .field("fields", &self.fields())
            .finish()
    }
}

impl PackedArray {
    /// Builds an array of `fields.len()` fields; `None` is a vacant field.
    pub fn from_fields(fields: &[Option<u64>], f: u32, width: WordWidth) -> Result<PackedArray> {
        let layout = Layout::new(f, width)?;
        let m = Masks::for_layout(&layout);
        let k = layout.k as usize;
        let n_words = layout.words_for(fields.len()).max(1);
        let mut words = Vec::with_capacity(n_words * width.limbs());
        for w in 0..n_words {
            let mut r = Reg::zero(m.s);
            for i in 0..k {
                let pos = i as u32 * m.fb;
                match fields.get(w * k + i).copied().flatten() {
                    Some(v) => {
                        layout.check_value(v)?;
                        r.or_bits_const(pos, v);
                    }
                    None => r.set_bit(pos + layout.f),
                }
            }
            words.extend_from_slice(r.limbs());
        }
        Ok(PackedArray {
            layout,
            words,
            len: fields.len(),
        })
    }

    pub(crate) fn from_raw(layout: Layout, words: Vec<u64>, len: usize) -> PackedArray {
        PackedArray { layout, words, len }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Number of fields.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Raw storage: `W / 64` little-endian limbs per word (one limb for
    /// narrow words).
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn word(&self, i: usize) -> Reg {
        let st = self.layout.width.limbs();
        Reg::from_limbs(self.layout.width.shape(), &self.words[i * st..(i + 1) * st])
    }

    pub fn fields(&self) -> Vec<Option<u64>> {
        let fb = self.layout.field_bits();
        let k = self.layout.k as usize;
        (0..self.len)
            .map(|i| {
                let x = self.word(i / k).bits_const((i % k) as u32 * fb, fb);
                (x >> self.layout.f == 0).then_some(x)
            })
            .collect()
    }

    pub fn occupied(&self) -> usize {
        self.fields().iter().flatten().count()
    }

    /// Checks that vacant fields have zero entries and that every field in
    /// the padding past `len` is vacant.
    pub fn validate(&self) -> Result<()> {
        let fb = self.layout.field_bits();
        let k = self.layout.k as usize;
        let n_words = self.words.len() / self.layout.width.limbs();
        for w in 0..n_words {
            let x = self.word(w);
            for i in 0..k {
                let v = x.bits_const(i as u32 * fb, fb);
                let vacant = v >> self.layout.f == 1;
                if vacant && v != 1 << self.layout.f {
                    return Err(Error::Format(format!("vacant field {} has entry bits", w * k + i)));
                }
                if w * k + i >= self.len && !vacant {
                    return Err(Error::Format(format!("padding field {} is occupied", w * k + i)));
                }
            }
            let used = self.layout.k * fb;
            if used < self.layout.width.bits() && x.bits_const(used, self.layout.width.bits() - used) != 0 {
                return Err(Error::Format(format!("word {w} has bits above its fields")));
            }
        }
        Ok(())
    }

    /// Moves occupied fields to the front, preserving order; the rest
    /// become vacant. Length is unchanged.
    pub fn compact(&self) -> PackedArray {
        self.compact_with(Kernel::WordParallel)
    }

    pub fn compact_with(&self, kernel: Kernel) -> PackedArray {
        let m = Masks::for_layout(&self.layout);
        let mut words = Vec::with_capacity(self.words.len());
        let mut w = FieldWriter::new(&m, &mut words);
        let n_words = self.layout.words_for(self.len);
        match kernel {
            Kernel::WordParallel => {
                for i in 0..n_words {
                    let x = Reg::load(m.s, &self.words[i * m.s.stride()..(i + 1) * m.s.stride()]);
                    let (e, c) = m.compact_word(x);
                    w.push(e, c);
                }
            }
            Kernel::Scalar => {
                for i in 0..n_words {
                    let x = Reg::load(m.s, &self.words[i * m.s.stride()..(i + 1) * m.s.stride()]);
                    for j in 0..m.k {
                        let v = m.field(&x, j);
                        if v >> m.f == 0 {
                            w.push_value(v);
                        }
                    }
                }
            }
        }
        w.finish();
        pad_vacant(&m, &mut words, self.layout.words_for(self.len).max(1));
        PackedArray {
            layout: self.layout,
            words,
            len: self.len,
        }
    }

    /// Compacts and drops the vacant tail.
    pub fn into_sequence(self) -> PackedSeq {
        let c = self.compact();
        let n = c.occupied();
        let mut words = c.words;
        words.truncate(self.layout.words_for(n).max(1) * self.layout.width.limbs());
        PackedSeq(PackedArray {
            layout: self.layout,
            words,
            len: n,
        })
    }
}

fn pad_vacant(m: &Masks, words: &mut Vec<u64>, n_words: usize) {
    while words.len() < n_words * m.s.stride() {
        words.extend_from_slice(m.vacant().limbs());
    }
}

/// A packed sequence: fields `0..len` occupied, all later fields vacant.
#[derive(Clone, PartialEq, Eq)]
pub struct PackedSeq(PackedArray);

impl fmt::Debug for PackedSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackedSeq(f={}, W={}, {:?})", self.0.layout.f, self.0.layout.width, self.decode())
    }
}

impl PackedSeq {
    /// Packs `values` into fields `0..len`.
    pub fn encode(values: &[u64], f: u32, width: WordWidth) -> Result<PackedSeq> {
        let layout = Layout::new(f, width)?;
        for &v in values {
            layout.check_value(v)?;
        }
        Ok(PackedSeq::encode_unchecked(values, layout))
    }

    pub(crate) fn encode_unchecked(values: &[u64], layout: Layout) -> PackedSeq {
        let m = Masks::for_layout(&layout);
        let mut words = Vec::with_capacity(layout.words_for(values.len()) * layout.width.limbs());
        let mut w = FieldWriter::new(&m, &mut words);
        for &v in values {
            w.push_value(v);
        }
        w.finish();
        pad_vacant(&m, &mut words, 1);
        PackedSeq(PackedArray {
            layout,
            words,
            len: values.len(),
        })
    }

    pub fn decode(&self) -> Vec<u64> {
        self.0.fields().into_iter().flatten().collect()
    }

    pub fn len(&self) -> usize {
        self.0.len
    }

    pub fn is_empty(&self) -> bool {
        self.0.len == 0
    }

    pub fn layout(&self) -> Layout {
        self.0.layout
    }

    pub fn as_array(&self) -> &PackedArray {
        &self.0
    }

    pub(crate) fn as_ref(&self) -> PackedRef<'_> {
        PackedRef {
            words: &self.0.words,
            len: self.0.len,
        }
    }

    /// Merges two sorted sequences into one sorted sequence (duplicates kept).
    pub fn merge(&self, other: &PackedSeq) -> Result<PackedSeq> {
        self.layout().check_same(&other.layout())?;
        let layout = self.layout();
        let kern = Kernels::new(layout);
        let mut words = Vec::new();
        let mut w = FieldWriter::new(&kern.m, &mut words);
        kern.merge.merge(&self.0.words, self.0.len, &other.0.words, other.0.len, &mut w);
        w.finish();
        pad_vacant(&kern.m, &mut words, 1);
        Ok(PackedSeq(PackedArray {
            layout,
            words,
            len: self.0.len + other.0.len,
        }))
    }
}

/// A packed set: a packed sequence whose entries strictly increase.
#[derive(Clone, PartialEq, Eq)]
pub struct PackedSet(PackedSeq);

impl fmt::Debug for PackedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PackedSet(f={}, W={}, {:?})", self.0 .0.layout.f, self.0 .0.layout.width, self.to_vec())
    }
}

impl PackedSet {
    pub fn from_sorted(values: &[u64], f: u32, width: WordWidth) -> Result<PackedSet> {
        PackedSet::try_from(PackedSeq::encode(values, f, width)?)
    }

    pub fn empty(f: u32, width: WordWidth) -> Result<PackedSet> {
        PackedSet::from_sorted(&[], f, width)
    }

    pub fn to_vec(&self) -> Vec<u64> {
        self.0.decode()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn layout(&self) -> Layout {
        self.0.layout()
    }

    pub fn as_seq(&self) -> &PackedSeq {
        &self.0
    }

    pub fn union(&self, other: &PackedSet) -> Result<PackedSet> {
        self.set_op(other, SetOp::Union)
    }

    pub fn intersect(&self, other: &PackedSet) -> Result<PackedSet> {
        self.set_op(other, SetOp::Intersect)
    }

    fn set_op(&self, other: &PackedSet, op: SetOp) -> Result<PackedSet> {
        self.layout().check_same(&other.layout())?;
        let layout = self.layout();
        let kern = Kernels::new(layout);
        let mut words = Vec::new();
        let mut w = FieldWriter::new(&kern.m, &mut words);
        kern.set_op(self.0.as_ref(), other.0.as_ref(), op, &mut w);
        let len = w.finish();
        pad_vacant(&kern.m, &mut words, 1);
        Ok(PackedSet(PackedSeq(PackedArray { layout, words, len })))
    }
}

impl TryFrom<PackedSeq> for PackedSet {
    type Error = Error;

    fn try_from(seq: PackedSeq) -> Result<PackedSet> {
        let v = seq.decode();
        if let Some(i) = v.windows(2).position(|p| p[0] >= p[1]) {
            return Err(Error::NotSortedDistinct(i + 1));
        }
        Ok(PackedSet(seq))
    }
}
