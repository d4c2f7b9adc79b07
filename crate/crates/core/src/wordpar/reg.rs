//! Simulated wide registers built from 64-bit limbs.
//!
//! A [`Reg`] carries its [`Shape`]: how many limbs are live, the mask for the
//! top limb, and how many `W`-bit words one operation on it is charged as.
//! Every arithmetic or logical operator charges that cost to the thread-local
//! word-op counter; constant construction does not.

use std::ops::{Add, BitAnd, BitOr, BitXor, Not, Shl, Shr, Sub};

use crate::counter;

pub(crate) const MAX_LIMBS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Shape {
    pub bits: u32,
    pub limbs: usize,
    top: u64,
    pub cost: u64,
}

impl Shape {
    /// A register of `bits` bits, charged in units of `word_bits`-bit words.
    pub fn new(bits: u32, word_bits: u32) -> Shape {
        assert!(bits > 0);
        let limbs = bits.div_ceil(64) as usize;
        assert!(limbs <= MAX_LIMBS, "register of {bits} bits is too wide");
        let rem = bits % 64;
        let top = if rem == 0 { !0 } else { (1u64 << rem) - 1 };
        Shape {
            bits,
            limbs,
            top,
            cost: u64::from(bits.div_ceil(word_bits)),
        }
    }

    /// Storage limbs per word of this shape.
    pub fn stride(&self) -> usize {
        self.limbs
    }
}

#[derive(Clone, Copy)]
pub(crate) struct Reg {
    l: [u64; MAX_LIMBS],
    s: Shape,
}

impl std::fmt::Debug for Reg {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Reg[")?;
        for i in (0..self.s.limbs).rev() {
            write!(f, "{:016x}", self.l[i])?;
        }
        write!(f, "]")
    }
}

impl Reg {
    pub fn zero(s: Shape) -> Reg {
        Reg {
            l: [0; MAX_LIMBS],
            s,
        }
    }

    /// Reads one word from `src` (missing limbs read as zero). Charged as one op.
    pub fn load(s: Shape, src: &[u64]) -> Reg {
        counter::word_ops(s.cost);
        Reg::from_limbs(s, src)
    }

    /// Builds a constant from raw limbs without charging.
    pub fn from_limbs(s: Shape, src: &[u64]) -> Reg {
        let mut r = Reg::zero(s);
        let n = src.len().min(s.limbs);
        r.l[..n].copy_from_slice(&src[..n]);
        r.l[s.limbs - 1] &= s.top;
        r
    }

    pub fn limbs(&self) -> &[u64] {
        &self.l[..self.s.limbs]
    }

    /// Appends this word to `dst`. Charged as one op.
    pub fn store(&self, dst: &mut Vec<u64>) {
        counter::word_ops(self.s.cost);
        dst.extend_from_slice(self.limbs());
    }

    /// Reinterprets the low bits under another shape (truncating or zero-extending).
    pub fn reshape(&self, s: Shape) -> Reg {
        counter::word_ops(s.cost.max(self.s.cost));
        let mut r = Reg::zero(s);
        let n = s.limbs.min(self.s.limbs);
        r.l[..n].copy_from_slice(&self.l[..n]);
        r.l[s.limbs - 1] &= s.top;
        r
    }

    /// Sets bit `pos`; constant construction, not charged.
    pub fn set_bit(&mut self, pos: u32) {
        debug_assert!(pos < self.s.bits);
        self.l[(pos / 64) as usize] |= 1u64 << (pos % 64);
    }

    #[cfg(test)]
    pub fn bit(&self, pos: u32) -> bool {
        (self.l[(pos / 64) as usize] >> (pos % 64)) & 1 == 1
    }

    /// Mask of the lowest `n` bits; constant construction, charged as one op.
    pub fn low_mask(s: Shape, n: u32) -> Reg {
        counter::word_ops(s.cost);
        Reg::low_mask_const(s, n)
    }

    pub fn low_mask_const(s: Shape, n: u32) -> Reg {
        let mut r = Reg::zero(s);
        let n = n.min(s.bits);
        let full = (n / 64) as usize;
        for limb in r.l.iter_mut().take(full) {
            *limb = !0;
        }
        if n % 64 != 0 {
            r.l[full] = (1u64 << (n % 64)) - 1;
        }
        r
    }

    /// Reads `len <= 64` bits starting at `pos`. Charged as one op.
    pub fn get_bits(&self, pos: u32, len: u32) -> u64 {
        counter::word_ops(1);
        self.bits_const(pos, len)
    }

    pub fn bits_const(&self, pos: u32, len: u32) -> u64 {
        debug_assert!(len <= 64 && len > 0);
        let i = (pos / 64) as usize;
        let o = pos % 64;
        let mut v = self.l[i] >> o;
        if o != 0 && i + 1 < self.s.limbs && o + len > 64 {
            v |= self.l[i + 1] << (64 - o);
        }
        if len == 64 {
            v
        } else {
            v & ((1u64 << len) - 1)
        }
    }

    /// ORs `v` (which must fit in `len` bits) in at bit `pos`. Not charged.
    pub fn or_bits_const(&mut self, pos: u32, v: u64) {
        let i = (pos / 64) as usize;
        let o = pos % 64;
        self.l[i] |= v << o;
        if o != 0 && i + 1 < self.s.limbs {
            self.l[i + 1] |= v >> (64 - o);
        }
    }

    pub fn is_zero(&self) -> bool {
        counter::word_ops(self.s.cost);
        self.limbs().iter().all(|&x| x == 0)
    }

    pub fn count_ones(&self) -> u32 {
        counter::word_ops(self.s.cost);
        self.limbs().iter().map(|x| x.count_ones()).sum()
    }

    /// `self & !rhs`
    pub fn andn(self, rhs: Reg) -> Reg {
        self & !rhs
    }

    #[inline]
    fn zip(mut self, rhs: Reg, op: impl Fn(u64, u64) -> u64) -> Reg {
        debug_assert_eq!(self.s, rhs.s);
        counter::word_ops(self.s.cost);
        for i in 0..self.s.limbs {
            self.l[i] = op(self.l[i], rhs.l[i]);
        }
        self
    }
}

impl BitAnd for Reg {
    type Output = Reg;
    #[inline]
    fn bitand(self, rhs: Reg) -> Reg {
        self.zip(rhs, |a, b| a & b)
    }
}

impl BitOr for Reg {
    type Output = Reg;
    #[inline]
    fn bitor(self, rhs: Reg) -> Reg {
        self.zip(rhs, |a, b| a | b)
    }
}

impl BitXor for Reg {
    type Output = Reg;
    #[inline]
    fn bitxor(self, rhs: Reg) -> Reg {
        self.zip(rhs, |a, b| a ^ b)
    }
}

impl Not for Reg {
    type Output = Reg;
    #[inline]
    fn not(mut self) -> Reg {
        counter::word_ops(self.s.cost);
        for i in 0..self.s.limbs {
            self.l[i] = !self.l[i];
        }
        self.l[self.s.limbs - 1] &= self.s.top;
        self
    }
}

impl Shl<u32> for Reg {
    type Output = Reg;
    #[inline]
    fn shl(self, k: u32) -> Reg {
        counter::word_ops(self.s.cost);
        let n = self.s.limbs;
        let mut r = Reg::zero(self.s);
        if k >= self.s.bits {
            return r;
        }
        let q = (k / 64) as usize;
        let o = k % 64;
        for i in (q..n).rev() {
            let mut v = self.l[i - q] << o;
            if o != 0 && i > q {
                v |= self.l[i - q - 1] >> (64 - o);
            }
            r.l[i] = v;
        }
        r.l[n - 1] &= self.s.top;
        r
    }
}

impl Shr<u32> for Reg {
    type Output = Reg;
    #[inline]
    fn shr(self, k: u32) -> Reg {
        counter::word_ops(self.s.cost);
        let n = self.s.limbs;
        let mut r = Reg::zero(self.s);
        if k >= self.s.bits {
            return r;
        }
        let q = (k / 64) as usize;
        let o = k % 64;
        for i in 0..n - q {
            let mut v = self.l[i + q] >> o;
            if o != 0 && i + q + 1 < n {
                v |= self.l[i + q + 1] << (64 - o);
            }
            r.l[i] = v;
        }
        r
    }
}

impl Add for Reg {
    type Output = Reg;
    #[inline]
    fn add(mut self, rhs: Reg) -> Reg {
        debug_assert_eq!(self.s, rhs.s);
        counter::word_ops(self.s.cost);
        let mut carry = false;
        for i in 0..self.s.limbs {
            let (v, c1) = self.l[i].overflowing_add(rhs.l[i]);
            let (v, c2) = v.overflowing_add(u64::from(carry));
            self.l[i] = v;
            carry = c1 || c2;
        }
        self.l[self.s.limbs - 1] &= self.s.top;
        self
    }
}

impl Sub for Reg {
    type Output = Reg;
    #[inline]
    fn sub(mut self, rhs: Reg) -> Reg {
        debug_assert_eq!(self.s, rhs.s);
        counter::word_ops(self.s.cost);
        let mut borrow = false;
        for i in 0..self.s.limbs {
            let (v, b1) = self.l[i].overflowing_sub(rhs.l[i]);
            let (v, b2) = v.overflowing_sub(u64::from(borrow));
            self.l[i] = v;
            borrow = b1 || b2;
        }
        self.l[self.s.limbs - 1] &= self.s.top;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn to_u128(r: &Reg) -> u128 {
        let l = r.limbs();
        let lo = l[0] as u128;
        let hi = if l.len() > 1 { l[1] as u128 } else { 0 };
        lo | (hi << 64)
    }

    #[test]
    fn two_limb_arithmetic_matches_u128() {
        let s = Shape::new(128, 128);
        let vals = [
            0u128,
            1,
            u64::MAX as u128,
            (u64::MAX as u128) + 1,
            0xdead_beef_0123_4567_89ab_cdef_f00d_cafe,
            u128::MAX,
        ];
        for &a in &vals {
            for &b in &vals {
                let ra = Reg::from_limbs(s, &[a as u64, (a >> 64) as u64]);
                let rb = Reg::from_limbs(s, &[b as u64, (b >> 64) as u64]);
                assert_eq!(to_u128(&(ra + rb)), a.wrapping_add(b));
                assert_eq!(to_u128(&(ra - rb)), a.wrapping_sub(b));
                assert_eq!(to_u128(&(ra & rb)), a & b);
                assert_eq!(to_u128(&(ra ^ rb)), a ^ b);
            }
            for k in [0u32, 1, 7, 63, 64, 65, 100, 127, 128] {
                let ra = Reg::from_limbs(s, &[a as u64, (a >> 64) as u64]);
                let shl = if k >= 128 { 0 } else { a << k };
                let shr = if k >= 128 { 0 } else { a >> k };
                assert_eq!(to_u128(&(ra << k)), shl, "a={a:x} k={k}");
                assert_eq!(to_u128(&(ra >> k)), shr, "a={a:x} k={k}");
            }
        }
    }

    #[test]
    fn narrow_shape_masks_top_bits() {
        let s = Shape::new(16, 16);
        let r = Reg::from_limbs(s, &[0xffff]);
        assert_eq!((r << 4).limbs()[0], 0xfff0);
        assert_eq!((!Reg::zero(s)).limbs()[0], 0xffff);
        let one = Reg::from_limbs(s, &[1]);
        assert_eq!((Reg::zero(s) - one).limbs()[0], 0xffff);
    }

    #[test]
    fn ops_are_charged_by_word_count() {
        let s = Shape::new(256, 64);
        let a = Reg::zero(s);
        let (_, ops) = crate::OpCounter::measure(|| a | a);
        assert_eq!(ops.word_ops, 4);
    }
}
