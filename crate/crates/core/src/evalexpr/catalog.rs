use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::multires::MultiResSet;

/// Anything that resolves set names.
pub trait SetSource {
    fn get(&self, name: &str) -> Option<&MultiResSet>;
}

/// Named sets that all share one mother hash and word width.
#[derive(Clone, Debug, Default)]
pub struct Catalog {
    sets: BTreeMap<String, MultiResSet>,
}

impl Catalog {
    pub fn new() -> Catalog {
        Catalog::default()
    }

    /// Adds (or replaces) a set under its own name. Fails with
    /// `SeedMismatch` if it was built with a different hash or width than
    /// the sets already present.
    pub fn insert(&mut self, set: MultiResSet) -> Result<()> {
        if let Some(other) = self.sets.values().find(|s| s.name() != set.name()) {
            check_compatible(other, &set)?;
        }
        self.sets.insert(set.name().to_string(), set);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&MultiResSet> {
        self.sets.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.sets.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

impl SetSource for Catalog {
    fn get(&self, name: &str) -> Option<&MultiResSet> {
        self.sets.get(name)
    }
}

impl SetSource for HashMap<String, MultiResSet> {
    fn get(&self, name: &str) -> Option<&MultiResSet> {
        HashMap::get(self, name)
    }
}

impl SetSource for BTreeMap<String, MultiResSet> {
    fn get(&self, name: &str) -> Option<&MultiResSet> {
        BTreeMap::get(self, name)
    }
}

/// A source with extra sets layered over a base.
pub(crate) struct Overlay<'a, S: SetSource + ?Sized> {
    pub base: &'a S,
    pub extra: HashMap<String, MultiResSet>,
}

impl<S: SetSource + ?Sized> SetSource for Overlay<'_, S> {
    fn get(&self, name: &str) -> Option<&MultiResSet> {
        self.extra.get(name).or_else(|| self.base.get(name))
    }
}

pub(crate) fn check_compatible(a: &MultiResSet, b: &MultiResSet) -> Result<()> {
    if a.compatible(b) {
        Ok(())
    } else {
        Err(Error::SeedMismatch(format!(
            "`{}` ({:?}, W={}) and `{}` ({:?}, W={})",
            a.name(),
            a.mother_hash(),
            a.width(),
            b.name(),
            b.mother_hash(),
            b.width()
        )))
    }
}
