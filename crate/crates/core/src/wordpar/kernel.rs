//! Word-parallel primitives over packed fields.
//!
//! A field is `F = f + 1` bits: `f` entry bits under one test bit. Field `i`
//! of a word starts at bit `i * F`; a word holds `K = floor(W / F)` fields and
//! the `W - K * F` bits above them stay zero.

use super::reg::{Reg, Shape};
use super::Layout;
use crate::util::ceil_log2;

/// Masks describing `k` fields of `f`-bit entries inside one register shape.
#[derive(Clone, Debug)]
pub(crate) struct Masks {
    pub s: Shape,
    pub f: u32,
    pub fb: u32,
    pub k: u32,
    /// Test bits.
    pub h: Reg,
    /// Lowest bit of every field.
    pub low: Reg,
    /// Entry bits of every field.
    pub entry: Reg,
    /// Every bit of every field.
    pub all: Reg,
    /// All bits of field 0.
    pub field0: Reg,
}

impl Masks {
    pub fn new(f: u32, k: u32, s: Shape) -> Masks {
        let fb = f + 1;
        debug_assert!(k * fb <= s.bits);
        let mut h = Reg::zero(s);
        let mut low = Reg::zero(s);
        let mut entry = Reg::zero(s);
        for i in 0..k {
            h.set_bit(i * fb + f);
            low.set_bit(i * fb);
            for b in 0..f {
                entry.set_bit(i * fb + b);
            }
        }
        let all = Reg::low_mask_const(s, k * fb);
        Masks {
            s,
            f,
            fb,
            k,
            h,
            low,
            entry,
            all,
            field0: Reg::low_mask_const(s, fb),
        }
    }

    pub fn for_layout(layout: &Layout) -> Masks {
        Masks::new(layout.f(), layout.fields_per_word(), layout.width().shape())
    }

    /// Expands bits at test positions to whole-field masks.
    #[inline]
    pub fn fieldmask(&self, t: Reg) -> Reg {
        t | (t - (t >> self.f))
    }

    /// Test-position bits where field `x_i >= y_i`, comparing full `F`-bit
    /// fields (a vacant field compares above every occupied one).
    #[inline]
    pub fn ge(&self, x: Reg, y: Reg) -> Reg {
        let lowge = ((x | self.h) - y.andn(self.h)) & self.h;
        let xt = x & self.h;
        let yt = y & self.h;
        xt.andn(yt) | lowge.andn(xt ^ yt)
    }

    /// Every bit of fields `0..n`.
    pub fn low_fields(&self, n: u32) -> Reg {
        Reg::low_mask(self.s, n * self.fb)
    }

    /// `v` replicated into every field; constant construction.
    pub fn broadcast(&self, v: u64) -> Reg {
        let mut r = Reg::zero(self.s);
        for i in 0..self.k {
            r.or_bits_const(i * self.fb, v);
        }
        r
    }

    /// `v` replicated into every field, charged as the single multiply
    /// `v * low` it stands for.
    pub fn splat(&self, v: u64) -> Reg {
        crate::counter::word_ops(self.s.cost);
        self.broadcast(v)
    }

    /// Word with every field vacant.
    pub fn vacant(&self) -> Reg {
        self.h
    }

    /// Full field `i` including its test bit.
    pub fn field(&self, x: &Reg, i: u32) -> u64 {
        x.get_bits(i * self.fb, self.fb)
    }

    /// Compacts one word: occupied fields move to fields `0..c` in order.
    /// Returns the entries (test bits clear, zero above field `c`) and `c`.
    pub fn compact_word(&self, x: Reg) -> (Reg, u32) {
        let occ = self.h.andn(x);
        let fm = self.fieldmask(occ);
        let mut e = x & self.entry & fm;
        if self.k == 1 {
            let c = u32::from(!occ.is_zero());
            return (e, c);
        }
        // inclusive prefix count of vacant fields
        let vac = (x & self.h) >> self.f;
        let mut p = vac;
        let mut s = 1;
        while s < self.k {
            p = p + ((p << (s * self.fb)) & self.all);
            s <<= 1;
        }
        let vacant_total = p.get_bits((self.k - 1) * self.fb, self.fb) as u32;
        let mut d = (p - vac) & fm;
        let mut o = occ;
        for j in 0..ceil_log2(u64::from(self.k)) {
            let shift = (1u32 << j) * self.fb;
            let sel_t = (((d >> j) & self.low) << self.f) & o;
            let sel = self.fieldmask(sel_t);
            e = e.andn(sel) | ((e & sel) >> shift);
            d = d.andn(sel) | ((d & sel) >> shift);
            o = o.andn(sel_t) | (sel_t >> shift);
        }
        (e, self.k - vacant_total)
    }

    /// Entries of fields `[start, start + n)` of a packed word sequence,
    /// moved down to fields `0..n`. Requires `n <= k`.
    pub fn read_chunk(&self, words: &[u64], start: usize, n: u32) -> Reg {
        let stride = self.s.stride();
        let k = self.k as usize;
        let q = start / k;
        let o = (start % k) as u32;
        let mut x = Reg::load(self.s, &words[q * stride..(q + 1) * stride]);
        if o > 0 {
            x = x >> (o * self.fb);
            if o + n > self.k {
                let y = Reg::load(self.s, &words[(q + 1) * stride..(q + 2) * stride]);
                x = x | (y << ((self.k - o) * self.fb));
            }
        }
        x & self.entry & self.low_fields(n)
    }

    /// Marks adjacent duplicates in a sorted packed sequence and compacts.
    ///
    /// Each word is compared with itself shifted one field to the right (the
    /// next word's field 0 carried in). With test bits preset as borrow
    /// guards, a field whose guard survives the subtraction equals its right
    /// neighbour. `keep_dups = false` vacates those fields (set union);
    /// `true` keeps exactly those fields (set intersection).
    pub fn dedup_words(
        &self,
        words: &[u64],
        n_words: usize,
        keep_dups: bool,
        mut sink: impl FnMut(Reg, u32),
    ) {
        let stride = self.s.stride();
        let carry_shift = (self.k - 1) * self.fb;
        let mut next = if n_words > 0 {
            Some(Reg::load(self.s, &words[..stride]))
        } else {
            None
        };
        for j in 0..n_words {
            let x = next.take().expect("word present");
            let carry = if j + 1 < n_words {
                let nx = Reg::load(self.s, &words[(j + 1) * stride..(j + 2) * stride]);
                next = Some(nx);
                nx & self.field0
            } else {
                self.h & self.field0
            };
            let y = (x >> self.fb) | (carry << carry_shift);
            let occ = self.h.andn(x) & self.h.andn(y);
            let g = ((x | self.h) - y.andn(self.h)) & self.h;
            let dup = g & occ;
            let marked = if keep_dups {
                (x & self.fieldmask(dup)) | self.h.andn(dup)
            } else {
                x.andn(self.fieldmask(dup)) | dup
            };
            let (e, c) = self.compact_word(marked);
            sink(e, c);
        }
    }
}

/// Appends fields to a packed word stream.
pub(crate) struct FieldWriter<'a> {
    m: &'a Masks,
    out: &'a mut Vec<u64>,
    cur: Reg,
    fill: u32,
    total: usize,
}

impl<'a> FieldWriter<'a> {
    pub fn new(m: &'a Masks, out: &'a mut Vec<u64>) -> FieldWriter<'a> {
        FieldWriter {
            m,
            out,
            cur: Reg::zero(m.s),
            fill: 0,
            total: 0,
        }
    }

    /// Appends `c` entries held in fields `0..c` of `e` (everything else zero).
    pub fn push(&mut self, e: Reg, c: u32) {
        if c == 0 {
            return;
        }
        let m = self.m;
        if self.fill == 0 {
            self.cur = e;
        } else {
            self.cur = self.cur | ((e << (self.fill * m.fb)) & m.all);
        }
        let space = m.k - self.fill;
        if c >= space {
            self.cur.store(self.out);
            self.cur = if c > space {
                e >> (space * m.fb)
            } else {
                Reg::zero(m.s)
            };
            self.fill = c - space;
        } else {
            self.fill += c;
        }
        self.total += c as usize;
    }

    /// Appends a single entry.
    pub fn push_value(&mut self, v: u64) {
        crate::counter::word_ops(1);
        self.cur.or_bits_const(self.fill * self.m.fb, v);
        self.fill += 1;
        self.total += 1;
        if self.fill == self.m.k {
            self.cur.store(self.out);
            self.cur = Reg::zero(self.m.s);
            self.fill = 0;
        }
    }

    /// Copies whole words of an existing packed sequence holding `len` entries.
    pub fn push_words(&mut self, words: &[u64], len: usize) {
        let stride = self.m.s.stride();
        let k = self.m.k as usize;
        let mut left = len;
        for w in words.chunks(stride) {
            if left == 0 {
                break;
            }
            let c = left.min(k) as u32;
            let mut e = Reg::load(self.m.s, w) & self.m.entry;
            if (c as usize) < k {
                e = e & self.m.low_fields(c);
            }
            self.push(e, c);
            left -= c as usize;
        }
    }

    /// Flushes a partial last word with vacant tail fields; returns the count.
    pub fn finish(mut self) -> usize {
        if self.fill > 0 {
            let vac = self.m.h.andn(self.m.low_fields(self.fill));
            self.cur = self.cur | vac;
            self.cur.store(self.out);
        }
        self.total
    }
}

/// Block bitonic merge. The streams are cut into blocks of `P` fields, `P`
/// the largest power of two `<= K`, so two blocks fit a register of at most
/// two words.
#[derive(Clone, Debug)]
pub(crate) struct MergeKernel {
    w: Masks,
    r: Masks,
    p: u32,
    low_p: Reg,
    rev: Vec<(u32, Reg)>,
    stages: Vec<(u32, Reg)>,
}

impl MergeKernel {
    pub fn new(w: &Masks) -> MergeKernel {
        let p = 1u32 << (31 - w.k.leading_zeros());
        let rs = Shape::new(2 * p * w.fb, w.s.bits);
        let r = Masks::new(w.f, 2 * p, rs);
        let fb = w.fb;
        let mask_where = |pred: &dyn Fn(u32) -> bool, n: u32| {
            let mut m = Reg::zero(rs);
            for i in (0..n).filter(|&i| pred(i)) {
                for b in 0..fb {
                    m.set_bit(i * fb + b);
                }
            }
            m
        };
        let mut rev = Vec::new();
        let mut s = p / 2;
        while s >= 1 {
            rev.push((s, mask_where(&|i| i & s == 0, p)));
            s /= 2;
        }
        let mut stages = Vec::new();
        let mut s = p;
        while s >= 1 {
            stages.push((s, mask_where(&|i| i & s == 0, 2 * p)));
            s /= 2;
        }
        MergeKernel {
            w: w.clone(),
            low_p: Reg::low_mask_const(rs, p * fb),
            r,
            p,
            rev,
            stages,
        }
    }

    /// Fields per block.
    #[cfg(test)]
    pub fn block(&self) -> u32 {
        self.p
    }

    /// Block `i` of a stream of `len` fields, in the register shape, with
    /// vacant fields past the end.
    fn load_block(&self, words: &[u64], len: usize, i: usize) -> Reg {
        let start = i * self.p as usize;
        let n = (len - start).min(self.p as usize) as u32;
        let e = self.w.read_chunk(words, start, n).reshape(self.r.s);
        if n < self.p {
            e | (self.r.h & self.low_p).andn(self.r.low_fields(n))
        } else {
            e
        }
    }

    /// Merges two sorted blocks (fields `0..P` of each register); returns
    /// the `2P` sorted fields.
    pub fn step(&self, a: Reg, b: Reg) -> Reg {
        let fb = self.w.fb;
        let mut rb = b;
        for &(s, m) in &self.rev {
            rb = ((rb & m) << (s * fb)) | ((rb >> (s * fb)) & m);
        }
        let mut x = a | (rb << (self.p * fb));
        for &(s, m) in &self.stages {
            let lo = x & m;
            let hi = (x >> (s * fb)) & m;
            let gm = self.r.fieldmask(self.r.ge(lo, hi));
            let mn = (hi & gm) | lo.andn(gm);
            let mx = (lo & gm) | hi.andn(gm);
            x = mn | (mx << (s * fb));
        }
        x
    }

    /// Merges two sorted packed sequences into `out`.
    pub fn merge(&self, a: &[u64], la: usize, b: &[u64], lb: usize, out: &mut FieldWriter<'_>) {
        if la == 0 || lb == 0 {
            let (src, n) = if la == 0 { (b, lb) } else { (a, la) };
            out.push_words(src, n);
            return;
        }
        let p = self.p as usize;
        let fb = self.w.fb;
        let (na, nb) = (la.div_ceil(p), lb.div_ceil(p));
        let head = |r: &Reg| r.get_bits(0, fb);
        let (mut ia, mut ib) = (1usize, 1usize);
        let mut next_a = (na > 1).then(|| self.load_block(a, la, 1));
        let mut next_b = (nb > 1).then(|| self.load_block(b, lb, 1));
        let first_a = self.load_block(a, la, 0);
        let first_b = self.load_block(b, lb, 0);
        let mut left = la + lb;
        let emit = |x: Reg, left: &mut usize, out: &mut FieldWriter<'_>| {
            let c = (*left).min(p) as u32;
            let e = x.reshape(self.w.s) & self.w.entry;
            out.push(if (c as usize) < p { e & self.w.low_fields(c) } else { e }, c);
            *left -= c as usize;
        };
        let x = self.step(first_a, first_b);
        emit(x & self.low_p, &mut left, out);
        let mut buf = x >> (self.p * fb);
        loop {
            let take_a = match (&next_a, &next_b) {
                (Some(x), Some(y)) => head(x) <= head(y),
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => break,
            };
            let blk = if take_a {
                let blk = next_a.take().expect("present");
                ia += 1;
                next_a = (ia < na).then(|| self.load_block(a, la, ia));
                blk
            } else {
                let blk = next_b.take().expect("present");
                ib += 1;
                next_b = (ib < nb).then(|| self.load_block(b, lb, ib));
                blk
            };
            let x = self.step(buf, blk);
            emit(x & self.low_p, &mut left, out);
            buf = x >> (self.p * fb);
        }
        if left > 0 {
            emit(buf, &mut left, out);
        }
    }
}

/// Moves entries between field widths inside one word.
///
/// Narrowing squeezes the `K_from` fields of a word down to the smaller
/// spacing; widening spreads the low `K_to` fields up to the larger spacing.
/// Field `i` moves by `i * delta` bits, done as one masked shift per bit of
/// `i`, so a word costs `O(log K)` operations.
#[derive(Clone, Debug)]
pub(crate) struct Repack {
    rounds: Vec<(u32, Reg)>,
    widen: bool,
    /// Fields handled per word.
    pub chunk: u32,
}

impl Repack {
    pub fn new(from: &Masks, to: &Masks) -> Repack {
        let (ff, ft) = (from.fb, to.fb);
        let s = from.s;
        let mut rounds = Vec::new();
        if ft < ff {
            let delta = ff - ft;
            let n = from.k;
            for j in 0..ceil_log2(u64::from(n)) {
                let mut m = Reg::zero(s);
                for i in 0..n {
                    if i >> j & 1 == 1 {
                        let pos = i * ff - (i & ((1 << j) - 1)) * delta;
                        for bit in 0..to.f {
                            m.set_bit(pos + bit);
                        }
                    }
                }
                rounds.push(((1 << j) * delta, m));
            }
            Repack {
                rounds,
                widen: false,
                chunk: n,
            }
        } else {
            let delta = ft - ff;
            let n = to.k;
            if delta > 0 {
                for j in (0..ceil_log2(u64::from(n))).rev() {
                    let mut m = Reg::zero(s);
                    for i in 0..n {
                        if i >> j & 1 == 1 {
                            let pos = i * ff + ((i >> (j + 1)) << (j + 1)) * delta;
                            for bit in 0..from.f {
                                m.set_bit(pos + bit);
                            }
                        }
                    }
                    rounds.push(((1 << j) * delta, m));
                }
            }
            Repack {
                rounds,
                widen: true,
                chunk: n.min(from.k),
            }
        }
    }

    pub fn apply(&self, mut x: Reg) -> Reg {
        for &(shift, m) in &self.rounds {
            let moved = x & m;
            x = if self.widen {
                x.andn(m) | (moved << shift)
            } else {
                x.andn(m) | (moved >> shift)
            };
        }
        x
    }
}
