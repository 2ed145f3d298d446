//! Partial solutions of the branching scheme and their geometric accounting.

use std::rc::Rc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::branching::Insertion;
use crate::model::{Area, Instance, Length};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("fronts belong to different bins ({0} vs {1})")]
pub struct BinMismatch(pub usize, pub usize);

/// Boundary of the committed region in the last bin.
///
/// As a step function of the height `y`:
/// `x1_curr` on `[0, y2_prev)`, `x3_curr` on `[y2_prev, y2_curr)`, `x1_prev` on `[y2_curr, H]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Front {
    pub bin_index: usize,
    pub x1_prev: Length,
    pub x1_curr: Length,
    pub x3_curr: Length,
    pub y2_prev: Length,
    pub y2_curr: Length,
}

impl Front {
    /// Value of the step function at height `y`.
    pub fn at(&self, y: Length) -> Length {
        if y < self.y2_prev {
            self.x1_curr
        } else if y < self.y2_curr {
            self.x3_curr
        } else {
            self.x1_prev
        }
    }

    pub fn is_well_formed(&self, width: Length, height: Length) -> bool {
        0 <= self.x1_prev
            && self.x1_prev <= self.x3_curr
            && self.x3_curr <= self.x1_curr
            && self.x1_curr <= width
            && 0 <= self.y2_prev
            && self.y2_prev <= self.y2_curr
            && self.y2_curr <= height
    }
}

/// `X1(y) <= X2(y)` for every `y` in `[0, height)`.
pub fn front_leq(f1: &Front, f2: &Front, height: Length) -> Result<bool, BinMismatch> {
    if f1.bin_index != f2.bin_index {
        return Err(BinMismatch(f1.bin_index, f2.bin_index));
    }
    let breakpoints = [0, f1.y2_prev, f1.y2_curr, f2.y2_prev, f2.y2_curr, height];
    Ok(breakpoints
        .iter()
        .filter(|&&y| (0..height).contains(&y))
        .all(|&y| f1.at(y) <= f2.at(y)))
}

/// `area(S)` from the front and the area of the closed bins.
pub fn area_of(front: &Front, prior_bins_area: Area, height: Length, complete: bool) -> Area {
    if complete {
        prior_bins_area + front.x1_curr * height
    } else {
        prior_bins_area
            + front.x1_prev * height
            + (front.x1_curr - front.x1_prev) * front.y2_prev
            + (front.x3_curr - front.x1_prev) * (front.y2_curr - front.y2_prev)
    }
}

/// Which items are packed. Per-chain counters when chains are few, a bitset otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Progress {
    Counts(SmallVec<[u16; 24]>),
    Bits(Box<[u64]>),
}

impl Progress {
    pub const MAX_COUNTED_CHAINS: usize = 24;

    pub fn empty(instance: &Instance) -> Progress {
        if instance.chain_count() <= Self::MAX_COUNTED_CHAINS {
            Progress::Counts(SmallVec::from_elem(0, instance.chain_count()))
        } else {
            Progress::Bits(vec![0u64; instance.item_count().div_ceil(64)].into_boxed_slice())
        }
    }

    pub fn is_packed(&self, instance: &Instance, id: usize) -> bool {
        match self {
            Progress::Counts(c) => {
                let it = &instance.items[id];
                (c[it.chain_id] as usize) > it.chain_rank
            }
            Progress::Bits(b) => b[id / 64] >> (id % 64) & 1 == 1,
        }
    }

    /// Number of consumed items of `chain`.
    pub fn chain_count(&self, instance: &Instance, chain: usize) -> usize {
        match self {
            Progress::Counts(c) => c[chain] as usize,
            Progress::Bits(_) => instance.chains[chain]
                .iter()
                .take_while(|&&id| self.is_packed(instance, id))
                .count(),
        }
    }

    /// Next unconsumed item of `chain`, if any.
    pub fn next_in_chain(&self, instance: &Instance, chain: usize) -> Option<usize> {
        instance.chains[chain].get(self.chain_count(instance, chain)).copied()
    }

    pub fn mark(&mut self, instance: &Instance, id: usize) {
        match self {
            Progress::Counts(c) => {
                let it = &instance.items[id];
                debug_assert_eq!(c[it.chain_id] as usize, it.chain_rank);
                c[it.chain_id] += 1;
            }
            Progress::Bits(b) => b[id / 64] |= 1 << (id % 64),
        }
    }
}

/// Key used by symmetry breaking for one sub-plate: smallest item key, chains touched,
/// and the extent along the stacking axis (y for second-level, x for third-level).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SubplateKey {
    pub lo: Length,
    pub hi: Length,
    pub min_key: Option<usize>,
    pub chains: SmallVec<[u32; 4]>,
}

impl SubplateKey {
    pub fn shares_chain(&self, chains: &[u32]) -> bool {
        self.chains.iter().any(|c| chains.contains(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LastInsertion {
    pub depth: u8,
    pub waste_only: bool,
    pub two_items: bool,
}

/// A partial solution: the insertion sequence from the root plus the bookkeeping
/// needed to extend it.
#[derive(Debug, Clone)]
pub struct Node {
    pub parent: Option<Rc<Node>>,
    pub insertion: Option<Insertion>,
    pub progress: Progress,
    pub items_packed: usize,
    pub item_area: Area,
    pub complete: bool,
    /// Number of bins opened so far; the last bin has index `bins - 1`.
    pub bins: usize,
    pub front: Front,
    pub x3_prev: Length,
    /// Largest admissible `x1_curr` given max1, the plate and defects on internal 2-cuts.
    pub x1_max: Length,
    /// Largest admissible `y2_curr` given defects on 3-cuts and rigid third-level sub-plates.
    pub y2_max: Length,
    /// Some closed second-level sub-plate of the current first-level one ends exactly at `x1_curr`.
    pub z1: bool,
    /// Some third-level sub-plate of the current second-level one ends exactly at `y2_curr`.
    pub z2: bool,
    pub last: Option<LastInsertion>,
    /// Previous sibling of the current second-level sub-plate.
    pub prev2: Option<Rc<SubplateKey>>,
    /// Current second-level sub-plate.
    pub cur2: Rc<SubplateKey>,
    /// Current (last) third-level sub-plate.
    pub cur3: Rc<SubplateKey>,
    pub current_area: Area,
    pub prior_bins_area: Area,
}

impl Node {
    pub fn root(instance: &Instance) -> Node {
        let complete = instance.item_count() == 0;
        Node {
            parent: None,
            insertion: None,
            progress: Progress::empty(instance),
            items_packed: 0,
            item_area: 0,
            complete,
            bins: 0,
            front: Front::default(),
            x3_prev: 0,
            x1_max: 0,
            y2_max: 0,
            z1: false,
            z2: false,
            last: None,
            prev2: None,
            cur2: Rc::new(SubplateKey::default()),
            cur3: Rc::new(SubplateKey::default()),
            current_area: 0,
            prior_bins_area: 0,
        }
    }

    pub fn area(&self) -> Area {
        self.current_area
    }

    pub fn waste(&self) -> Area {
        self.current_area - self.item_area
    }

    pub fn depth(&self) -> usize {
        let mut d = 0;
        let mut cur = self.parent.as_deref();
        while let Some(n) = cur {
            d += 1;
            cur = n.parent.as_deref();
        }
        d
    }

    /// Insertions from the root to this node.
    pub fn insertions(&self) -> Vec<Insertion> {
        let mut out = Vec::new();
        if let Some(ins) = &self.insertion {
            out.push(ins.clone());
        }
        let mut cur = self.parent.as_deref();
        while let Some(n) = cur {
            if let Some(ins) = &n.insertion {
                out.push(ins.clone());
            }
            cur = n.parent.as_deref();
        }
        out.reverse();
        out
    }
}

/// Same packed items, same bin, and a front that is pointwise not after the other's.
pub fn dominates(a: &Node, b: &Node, height: Length) -> bool {
    a.bins == b.bins
        && a.items_packed == b.items_packed
        && a.progress == b.progress
        && front_leq(&a.front, &b.front, height).unwrap_or(false)
}

/// Node-ordering key of the searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GuideKind {
    /// Waste.
    Waste,
    /// Waste / area.
    WastePercentage,
    /// (Waste / area) / mean packed item area.
    WastePercentageOverMeanItemArea,
}

impl GuideKind {
    pub fn letter(self) -> char {
        match self {
            GuideKind::Waste => 'w',
            GuideKind::WastePercentage => 'p',
            GuideKind::WastePercentageOverMeanItemArea => 'a',
        }
    }

    pub fn from_letter(c: &str) -> Option<GuideKind> {
        match c {
            "w" => Some(GuideKind::Waste),
            "p" => Some(GuideKind::WastePercentage),
            "a" => Some(GuideKind::WastePercentageOverMeanItemArea),
            _ => None,
        }
    }
}
