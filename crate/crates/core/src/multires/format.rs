//! Index file encoding. Every integer is little-endian.
//!
//! ```text
//! "MRS1"  w:u32  W:u32  C:u32  seed:[u8;16]  n1:u64  dedup:u64
//! keys:u32  key:u32 * keys
//! per key:  l:u32 b:u32 f:u32 size:u64
//!           starts:u32 * (2^b + 1)  lens:u32 * 2^b
//!           limbs:u64  payload:u64 * limbs
//! lg:u32  slot_start:u32 * (2^lg + 1)  chain:u64 * n1
//! ```

use std::collections::BTreeMap;

use super::{grid_keys, LookupTable, MotherHash, MultiResSet};
use crate::bucketset::{BucketedSet, MAX_BUCKET_BITS};
use crate::error::{Error, Result};
use crate::util::ceil_log2;
use crate::wordpar::WordWidth;

const MAGIC: &[u8; 4] = b"MRS1";

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.b.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn len(&mut self, n: u64, elem: usize) -> Result<usize> {
        let n = usize::try_from(n).map_err(|_| Error::Format("length overflow".into()))?;
        if n.saturating_mul(elem) > self.b.len() - self.pos {
            return Err(Error::Format(format!("length {n} exceeds remaining input")));
        }
        Ok(n)
    }
    fn u32s(&mut self, n: u64) -> Result<Vec<u32>> {
        let n = self.len(n, 4)?;
        (0..n).map(|_| self.u32()).collect()
    }
    fn u64s(&mut self, n: u64) -> Result<Vec<u64>> {
        let n = self.len(n, 8)?;
        (0..n).map(|_| self.u64()).collect()
    }
}

impl MultiResSet {
    /// Encodes the set; the name is not stored.
    pub fn to_bytes(&self, c: u32) -> Vec<u8> {
        let mut o = Writer(Vec::with_capacity(64 + 8 * self.serialized_words()));
        o.0.extend_from_slice(MAGIC);
        o.u32(self.hash.w());
        o.u32(self.width.bits());
        o.u32(c);
        o.0.extend_from_slice(&self.hash.seed());
        o.u64(self.len() as u64);
        o.u64(self.dedup);
        o.u32(self.grid.len() as u32);
        for &k in self.grid.keys() {
            o.u32(k);
        }
        for s in self.grid.values() {
            o.u32(s.l());
            o.u32(s.b());
            o.u32(s.layout().f());
            o.u64(s.len() as u64);
            let (starts, lens, payload) = s.parts();
            starts.iter().for_each(|&v| o.u32(v));
            lens.iter().for_each(|&v| o.u32(v));
            o.u64(payload.len() as u64);
            payload.iter().for_each(|&v| o.u64(v));
        }
        o.u32(self.lookup.lg);
        self.lookup.slot_start.iter().for_each(|&v| o.u32(v));
        self.lookup.chain.iter().for_each(|&v| o.u64(v));
        o.0
    }

    /// Size of the encoding in 64-bit words, rounded up.
    pub fn serialized_words(&self) -> usize {
        let mut bytes = 4 + 12 + 16 + 16 + 4 + 4 * self.grid.len() + 4;
        for s in self.grid.values() {
            let (starts, lens, payload) = s.parts();
            bytes += 20 + 4 * (starts.len() + lens.len()) + 8 + 8 * payload.len();
        }
        bytes += 4 * self.lookup.slot_start.len() + 8 * self.lookup.chain.len();
        bytes.div_ceil(8)
    }

    /// Decodes a set written by [`MultiResSet::to_bytes`]. Returns the set
    /// and the stored resolution constant.
    pub fn from_bytes(name: &str, bytes: &[u8]) -> Result<(MultiResSet, u32)> {
        let mut r = Reader { b: bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let w = r.u32()?;
        let width = WordWidth::new(r.u32()?).map_err(|e| Error::Format(e.to_string()))?;
        let c = r.u32()?;
        let seed: [u8; 16] = r.take(16)?.try_into().expect("16 bytes");
        let hash = MotherHash::new(seed, w).map_err(|e| Error::Format(e.to_string()))?;
        let n1 = r.u64()?;
        let dedup = r.u64()?;
        let n_keys = r.u32()?;
        let keys = r.u32s(u64::from(n_keys))?;
        let n1u = usize::try_from(n1).map_err(|_| Error::Format("n1 overflow".into()))?;
        if keys != grid_keys(n1u, w) {
            return Err(Error::Format(format!("grid keys {keys:?} do not match n1={n1}, w={w}")));
        }
        let mut grid = BTreeMap::new();
        for &k in &keys {
            let l = r.u32()?;
            let b = r.u32()?;
            let f = r.u32()?;
            let size = r.u64()?;
            if l != k || b > MAX_BUCKET_BITS {
                return Err(Error::Format(format!("bad image header at r={k}")));
            }
            let starts = r.u32s((1u64 << b) + 1)?;
            let lens = r.u32s(1u64 << b)?;
            let limbs = r.u64()?;
            let payload = r.u64s(limbs)?;
            let s = BucketedSet::from_parts(l, b, f, width, starts, lens, payload)?;
            if s.len() as u64 != size || size > n1 {
                return Err(Error::Format(format!("image size mismatch at r={k}")));
            }
            grid.insert(k, s);
        }
        let lg = r.u32()?;
        if lg != ceil_log2(n1) || lg > 32 {
            return Err(Error::Format("lookup table size does not match n1".into()));
        }
        let slot_start = r.u32s((1u64 << lg) + 1)?;
        if slot_start[0] != 0
            || slot_start.windows(2).any(|p| p[0] > p[1])
            || u64::from(*slot_start.last().expect("nonempty")) != n1
        {
            return Err(Error::Format("lookup slot offsets are inconsistent".into()));
        }
        let chain = r.u64s(n1)?;
        if r.pos != bytes.len() {
            return Err(Error::Format("trailing bytes".into()));
        }
        let set = MultiResSet {
            name: name.to_string(),
            hash,
            width,
            dedup,
            grid,
            lookup: LookupTable { lg, slot_start, chain },
        };
        Ok((set, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_determinism() {
        let h = MotherHash::from_u64(77, 40).unwrap();
        let elems: Vec<u64> = (0..3000u64).map(|i| (i * 0x9e37_79b9) & ((1 << 40) - 1)).collect();
        for width in [WordWidth::W64, WordWidth::W512] {
            let a = MultiResSet::build("X", &elems, &h, width).unwrap();
            let b = MultiResSet::build("X", &elems, &h, width).unwrap();
            let bytes = a.to_bytes(2);
            assert_eq!(bytes, b.to_bytes(2));
            assert_eq!(bytes.len().div_ceil(8), a.serialized_words());
            let (back, c) = MultiResSet::from_bytes("X", &bytes).unwrap();
            assert_eq!(c, 2);
            assert_eq!(back, a);
            back.verify().unwrap();
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let h = MotherHash::from_u64(1, 64).unwrap();
        let a = MultiResSet::build("X", &[1, 5, 9], &h, WordWidth::W64).unwrap();
        let bytes = a.to_bytes(2);
        for cut in [0, 3, 10, bytes.len() - 1] {
            assert!(MultiResSet::from_bytes("X", &bytes[..cut]).is_err());
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(MultiResSet::from_bytes("X", &bad).is_err());
        let mut long = bytes;
        long.push(0);
        assert!(MultiResSet::from_bytes("X", &long).is_err());
    }
}
