//! Double-ended priority queue of open nodes.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use super::guide::GuideValue;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FringeKey {
    pub guide: GuideValue,
    /// More packed items first.
    pub items: Reverse<usize>,
    /// Older first.
    pub counter: u64,
}

/// Min/max access to open nodes ordered by [`FringeKey`].
#[derive(Debug)]
pub struct Fringe<T> {
    map: BTreeMap<FringeKey, T>,
    counter: u64,
}

impl<T> Default for Fringe<T> {
    fn default() -> Self {
        Fringe { map: BTreeMap::new(), counter: 0 }
    }
}

impl<T> Fringe<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, guide: GuideValue, items: usize, value: T) {
        let key = FringeKey { guide, items: Reverse(items), counter: self.counter };
        self.counter += 1;
        self.map.insert(key, value);
    }

    pub fn pop_best(&mut self) -> Option<(FringeKey, T)> {
        self.map.pop_first()
    }

    pub fn pop_worst(&mut self) -> Option<(FringeKey, T)> {
        self.map.pop_last()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
