// SPDX-License-Identifier: Apache-2.0

//! Switching activity keyed by cell id.

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

/// A name appeared twice in one activity source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DuplicateName(pub String);

impl fmt::Display for DuplicateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "duplicate activity entry for '{}'", self.0)
    }
}

impl core::error::Error for DuplicateName {}

/// Toggle counts per cell. Absent cells are distinct from zero-toggle cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActivityMap {
    toggles: BTreeMap<String, u64>,
}

impl ActivityMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a new entry, refusing names that are already present.
    pub fn insert(&mut self, cell: impl Into<String>, toggles: u64) -> Result<(), DuplicateName> {
        use alloc::collections::btree_map::Entry;
        match self.toggles.entry(cell.into()) {
            Entry::Occupied(e) => Err(DuplicateName(e.key().clone())),
            Entry::Vacant(e) => {
                e.insert(toggles);
                Ok(())
            }
        }
    }

    pub fn get(&self, cell: &str) -> Option<u64> {
        self.toggles.get(cell).copied()
    }

    /// Toggle count with absent cells read as zero.
    pub fn toggles_or_zero(&self, cell: &str) -> u64 {
        self.get(cell).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.toggles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.toggles.is_empty()
    }

    /// Entries in ascending name order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.toggles.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Number of `cells` with no entry in the map.
    pub fn count_missing<'a>(&self, cells: impl IntoIterator<Item = &'a str>) -> usize {
        cells.into_iter().filter(|c| !self.toggles.contains_key(*c)).count()
    }

    /// `ln(1 + toggles)`, or 0 for absent cells.
    pub fn log_activity(&self, cell: &str) -> f64 {
        log_toggles(self.toggles_or_zero(cell))
    }
}

pub fn log_toggles(toggles: u64) -> f64 {
    libm::log1p(toggles as f64)
}

pub fn log_activity(a: &ActivityMap, cell: &str) -> f64 {
    a.log_activity(cell)
}
