//! Exact evaluation of union/intersection expressions over sets of integers
//! with word-level parallelism.
//!
//! Sets are preprocessed into multi-resolution hash images stored as
//! bucketed arrays of packed fields. A query evaluates the expression on
//! short hash values first, with many values per simulated machine word,
//! and only then touches the few elements whose hashes survive.

pub mod bucketset;
pub mod counter;
pub mod error;
pub mod evalexpr;
pub mod expr;
pub mod multires;
pub mod oracle;
pub mod util;
pub mod wordpar;

pub use counter::OpCounter;
pub use error::{Error, Result};
pub use evalexpr::{evaluate, intersect_fast, query, Catalog, EvalConfig, QueryMode, QueryStats};
pub use expr::{Expr, Op, ParseError};
pub use multires::{MotherHash, MultiResSet};
pub use wordpar::WordWidth;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/packed-words.md")]
    mod packed_words {}
    #[doc = include_str!("../../../book/src/bucketed-sets.md")]
    mod bucketed_sets {}
    #[doc = include_str!("../../../book/src/multi-resolution.md")]
    mod multi_resolution {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/counting.md")]
    mod counting {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
