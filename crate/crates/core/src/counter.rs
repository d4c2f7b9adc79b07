//! Per-thread operation tallies.
//!
//! Every simulated word operation and every hash-table probe bumps a
//! thread-local counter. A query runs on one thread, so taking a
//! [`OpCounter::snapshot`] before and after a phase and subtracting gives the
//! cost of that phase without threading a counter through every call.

use std::cell::Cell;
use std::ops::Sub;

use serde::Serialize;

thread_local! {
    static WORD_OPS: Cell<u64> = const { Cell::new(0) };
    static HASH_PROBES: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub(crate) fn word_ops(n: u64) {
    WORD_OPS.with(|c| c.set(c.get() + n));
}

#[inline]
pub(crate) fn probes(n: u64) {
    HASH_PROBES.with(|c| c.set(c.get() + n));
}

/// A reading of the calling thread's counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct OpCounter {
    /// Operations on simulated `W`-bit words.
    pub word_ops: u64,
    /// Hash table accesses (lookups and insertions).
    pub hash_probes: u64,
}

impl OpCounter {
    pub fn snapshot() -> OpCounter {
        OpCounter {
            word_ops: WORD_OPS.with(Cell::get),
            hash_probes: HASH_PROBES.with(Cell::get),
        }
    }

    /// Counters accumulated since `earlier` was taken.
    pub fn since(earlier: OpCounter) -> OpCounter {
        OpCounter::snapshot() - earlier
    }

    /// Runs `f` and returns its result with the operations it consumed.
    pub fn measure<T>(f: impl FnOnce() -> T) -> (T, OpCounter) {
        let start = OpCounter::snapshot();
        let out = f();
        (out, OpCounter::since(start))
    }
}

impl Sub for OpCounter {
    type Output = OpCounter;

    fn sub(self, rhs: OpCounter) -> OpCounter {
        OpCounter {
            word_ops: self.word_ops - rhs.word_ops,
            hash_probes: self.hash_probes - rhs.hash_probes,
        }
    }
}
