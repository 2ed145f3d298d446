//! DPA*: A* on the waste with memoized non-dominated fronts, for one or two chains.

use std::cell::Cell;
use std::collections::HashMap;
use std::rc::Rc;

use super::{guide_value, publish, Fringe, Incumbent, Limits, Outcome, SearchConfig, SearchError, Status};
use crate::branching::children;
use crate::model::{Instance, Length};
use crate::node::{front_leq, Front, GuideKind, Node};

struct Entry {
    bins: usize,
    front: Front,
    alive: Rc<Cell<bool>>,
}

/// Non-dominated `(bins, front)` pairs per `(consumed in chain 1, consumed in chain 2)`.
#[derive(Default)]
pub struct DominanceStore {
    entries: HashMap<(usize, usize), Vec<Entry>>,
    len: usize,
}

impl DominanceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Adds the state unless a stored one dominates it; evicts the stored states it dominates.
    /// Returns the liveness flag of the new entry, `None` if it was dominated.
    pub fn insert(&mut self, key: (usize, usize), bins: usize, front: Front, height: Length) -> Option<Rc<Cell<bool>>> {
        let list = self.entries.entry(key).or_default();
        if list.iter().any(|e| e.bins == bins && front_leq(&e.front, &front, height).unwrap_or(false)) {
            return None;
        }
        let before = list.len();
        list.retain(|e| {
            let dominated = e.bins == bins && front_leq(&front, &e.front, height).unwrap_or(false);
            if dominated {
                e.alive.set(false);
            }
            !dominated
        });
        let alive = Rc::new(Cell::new(true));
        list.push(Entry { bins, front, alive: alive.clone() });
        self.len = self.len + list.len() - before;
        Some(alive)
    }
}

fn chain_key(node: &Node, instance: &Instance) -> (usize, usize) {
    let k = |c: usize| {
        if c < instance.chain_count() {
            node.progress.chain_count(instance, c)
        } else {
            0
        }
    };
    (k(0), k(1))
}

/// A* with the waste guide where a node is dropped if a stored node with the same
/// chain counters and bin has a front that is not after its own.
pub fn dpa_star(
    instance: &Instance,
    config: &SearchConfig,
    limits: &Limits,
    incumbent: &Incumbent,
) -> Result<Outcome, SearchError> {
    if instance.chain_count() > 2 {
        return Err(SearchError::ChainCount(instance.chain_count()));
    }
    let config = SearchConfig { guide: GuideKind::Waste, ..*config };
    let height = instance.params.plate_height;
    let label = "DPA*";
    let mut out = Outcome { status: Status::Exhausted, discarded: false, expanded: 0 };
    let root = Rc::new(Node::root(instance));
    if publish(&root, incumbent, label) {
        return Ok(out);
    }
    let mut store = DominanceStore::new();
    let mut fringe: Fringe<(Rc<Node>, Rc<Cell<bool>>)> = Fringe::new();
    fringe.insert(guide_value(&root, config.guide), 0, (root, Rc::new(Cell::new(true))));
    while let Some((_, (node, alive))) = fringe.pop_best() {
        if limits.expired() {
            out.status = Status::Timeout;
            return Ok(out);
        }
        if !alive.get() || (config.bound_pruning && node.waste() >= incumbent.waste()) {
            continue;
        }
        out.expanded += 1;
        for child in children(&node, instance, &config.branching) {
            if publish(&child, incumbent, label) {
                continue;
            }
            if config.bound_pruning && child.waste() >= incumbent.waste() {
                continue;
            }
            let Some(flag) = store.insert(chain_key(&child, instance), child.bins, child.front, height) else {
                continue;
            };
            let g = guide_value(&child, config.guide);
            let items = child.items_packed;
            fringe.insert(g, items, (Rc::new(child), flag));
        }
        if limits.over_cap(fringe.len().max(store.len())) {
            out.status = Status::MemoryCap;
            return Ok(out);
        }
    }
    Ok(out)
}
