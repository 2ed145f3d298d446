//! The branching scheme: each child packs the next third-level sub-plate.
//!
//! A third-level sub-plate holds one item (possibly with waste above or below), two
//! stacked items of equal width, or only waste when a defect has to be skipped. It is
//! inserted at depth 0 (new bin), 1 (new first-level sub-plate), 2 (new second-level
//! sub-plate) or 3 (right of the last third-level sub-plate).
//!
//! Every node is a feasible partial cutting plan with its cuts at `x1_curr`/`y2_curr`:
//! strips left over are either empty or at least `min_waste` wide, and no cut crosses a
//! defect. `x1_max`, `y2_max`, `z1` and `z2` carry what is needed to keep that true
//! when later insertions move the current cuts.

use std::collections::HashMap;
use std::rc::Rc;

use smallvec::{smallvec, SmallVec};

use crate::model::{Defect, Instance, Item, Length, Params, Rect};
use crate::node::{area_of, front_leq, Front, LastInsertion, Node, Progress, SubplateKey};

/// Content of an inserted third-level sub-plate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InsertionKind {
    OneItem,
    OneItemWasteAbove,
    OneItemWasteBelow,
    TwoItems,
    WasteOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlacedItem {
    pub id: usize,
    pub rect: Rect,
    pub rotated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Insertion {
    pub kind: InsertionKind,
    /// 0 new bin, 1 new first-level, 2 new second-level, 3 current second-level.
    pub depth: u8,
    /// Bottom item first.
    pub items: SmallVec<[PlacedItem; 2]>,
    pub x1: Length,
    pub y2: Length,
    pub x3: Length,
    pub x1_max: Length,
    pub y2_max: Length,
    pub z1: bool,
    pub z2: bool,
}

impl Insertion {
    pub fn new_bin(&self) -> bool {
        self.depth == 0
    }

    /// Position of the 4-cut, if any.
    pub fn y4(&self) -> Option<Length> {
        match self.kind {
            InsertionKind::OneItemWasteAbove => Some(self.items[0].rect.top()),
            InsertionKind::OneItemWasteBelow => Some(self.items[0].rect.y),
            InsertionKind::TwoItems => Some(self.items[0].rect.top()),
            _ => None,
        }
    }

    fn first_item(&self) -> usize {
        self.items.iter().map(|p| p.id).min().unwrap_or(usize::MAX)
    }
}

/// How "item with a smaller index" is read by symmetry breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SymmetryIndex {
    /// Global item id.
    #[default]
    ItemId,
    /// Rank inside the chain, ties broken by id.
    ChainRank,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchingConfig {
    pub symmetry: bool,
    pub symmetry_index: SymmetryIndex,
    /// Pseudo-dominance among siblings.
    pub dominance: bool,
    /// Branch only on the smallest id among identical chain tails.
    pub merge_identical_items: bool,
}

impl Default for BranchingConfig {
    fn default() -> Self {
        BranchingConfig {
            symmetry: true,
            symmetry_index: SymmetryIndex::ItemId,
            dominance: true,
            merge_identical_items: true,
        }
    }
}

impl BranchingConfig {
    pub fn without_symmetry(self) -> Self {
        BranchingConfig { symmetry: false, ..self }
    }

    fn key(&self, instance: &Instance, id: usize) -> usize {
        match self.symmetry_index {
            SymmetryIndex::ItemId => id,
            SymmetryIndex::ChainRank => instance.items[id].chain_rank * instance.item_count() + id,
        }
    }
}

/// Next unconsumed item of every chain, by increasing id.
pub fn candidate_items(node: &Node, instance: &Instance) -> Vec<usize> {
    let mut out: Vec<usize> = (0..instance.chain_count())
        .filter_map(|c| node.progress.next_in_chain(instance, c))
        .collect();
    out.sort_unstable();
    out
}

/// Drops chain tails whose shape equals a smaller-id chain tail already in the list.
fn merge_identical(instance: &Instance, ids: &[usize]) -> Vec<usize> {
    let mut seen: HashMap<(Length, Length), ()> = HashMap::new();
    ids.iter()
        .copied()
        .filter(|&id| {
            if !instance.is_chain_tail(id) {
                return true;
            }
            let it = &instance.items[id];
            let shape = (it.width.min(it.height), it.width.max(it.height));
            seen.insert(shape, ()).is_none()
        })
        .collect()
}

// ---- defect geometry -------------------------------------------------------

fn vcut_blockers(ds: &[Defect], x: Length, y0: Length, y1: Length) -> Option<Length> {
    ds.iter()
        .filter(|d| d.x < x && x < d.right() && d.y < y1 && d.top() > y0)
        .map(Defect::right)
        .max()
}

fn hcut_blockers(ds: &[Defect], y: Length, x0: Length, x1: Length) -> Option<Length> {
    ds.iter()
        .filter(|d| d.y < y && y < d.top() && d.x < x1 && d.right() > x0)
        .map(Defect::top)
        .max()
}

fn hcut_ok(ds: &[Defect], y: Length, x0: Length, x1: Length) -> bool {
    hcut_blockers(ds, y, x0, x1).is_none()
}

/// Furthest right a horizontal cut at `y` starting at `x_from` may extend.
fn xbound(ds: &[Defect], y: Length, x_from: Length) -> Length {
    ds.iter()
        .filter(|d| d.y < y && y < d.top() && d.right() > x_from)
        .map(|d| d.x)
        .min()
        .unwrap_or(Length::MAX)
}

/// Highest a vertical cut at `x` starting at `y_from` may extend.
fn ybound(ds: &[Defect], x: Length, y_from: Length) -> Length {
    ds.iter()
        .filter(|d| d.x < x && x < d.right() && d.top() > y_from)
        .map(|d| d.y)
        .min()
        .unwrap_or(Length::MAX)
}

fn rect_blockers(ds: &[Defect], r: &Rect) -> Option<Length> {
    ds.iter().filter(|d| d.rect().overlaps(r)).map(Defect::top).max()
}

fn region_clear(ds: &[Defect], r: &Rect) -> bool {
    r.w > 0 && r.h > 0 && !ds.iter().any(|d| d.rect().overlaps(r))
}

/// Smallest `v >= lo` such that, for every reference `r`, `v == r` or `v - r >= mw`.
fn fit_min(lo: Length, refs: &[Length], mw: Length) -> Length {
    let ok = |v: Length| refs.iter().all(|&r| v == r || v - r >= mw);
    if ok(lo) {
        return lo;
    }
    let mut cands: SmallVec<[Length; 4]> = refs.iter().map(|&r| r + mw).filter(|&c| c > lo).collect();
    cands.sort_unstable();
    cands.into_iter().find(|&c| ok(c)).expect("max(refs) + mw satisfies every reference")
}

fn gap_ok(gap: Length, mw: Length) -> bool {
    gap == 0 || gap >= mw
}

const REPAIR_ROUNDS: usize = 12;

// ---- insertion enumeration -------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Content {
    One { id: usize, w: Length, h: Length, rotated: bool },
    Two { bottom: (usize, Length, bool), top: (usize, Length, bool), w: Length },
}

/// Where a new third-level sub-plate goes for a given depth.
struct Frame<'a> {
    depth: u8,
    ds: &'a [Defect],
    x1_prev: Length,
    x_start: Length,
    /// Bottom of the second-level sub-plate receiving the content.
    y_b: Length,
    /// Current `x1_curr` when the first-level sub-plate already exists.
    x1_old: Option<Length>,
    /// Some closed second-level sub-plate is flush with `x1_old`.
    z1: bool,
    x1_cap: Length,
    y2_old: Option<Length>,
    z2: bool,
    y2_cap: Length,
}

struct Enumerator<'a> {
    inst: &'a Instance,
    node: &'a Node,
    p: Params,
}

impl<'a> Enumerator<'a> {
    fn new(inst: &'a Instance, node: &'a Node) -> Self {
        Enumerator { inst, node, p: inst.params }
    }

    fn frame(&self, depth: u8) -> Option<Frame<'a>> {
        let n = self.node;
        let p = &self.p;
        let f = &n.front;
        match depth {
            0 => {
                if n.bins >= p.plate_count {
                    return None;
                }
                Some(Frame {
                    depth,
                    ds: self.inst.defects(n.bins),
                    x1_prev: 0,
                    x_start: 0,
                    y_b: 0,
                    x1_old: None,
                    z1: false,
                    x1_cap: p.plate_width.min(p.max1),
                    y2_old: None,
                    z2: false,
                    y2_cap: p.plate_height,
                })
            }
            1 => Some(Frame {
                depth,
                ds: self.inst.defects(n.bins - 1),
                x1_prev: f.x1_curr,
                x_start: f.x1_curr,
                y_b: 0,
                x1_old: None,
                z1: false,
                x1_cap: p.plate_width.min(f.x1_curr + p.max1),
                y2_old: None,
                z2: false,
                y2_cap: p.plate_height,
            }),
            2 => {
                let ds = self.inst.defects(n.bins - 1);
                if f.y2_curr >= p.plate_height {
                    return None;
                }
                let closing_waste = matches!(n.last, Some(l) if l.waste_only && l.depth == 2);
                let closing_tight = !closing_waste && f.x3_curr == f.x1_curr;
                Some(Frame {
                    depth,
                    ds,
                    x1_prev: f.x1_prev,
                    x_start: f.x1_prev,
                    y_b: f.y2_curr,
                    x1_old: Some(f.x1_curr),
                    z1: n.z1 || closing_tight,
                    x1_cap: n.x1_max.min(xbound(ds, f.y2_curr, f.x1_prev)),
                    y2_old: None,
                    z2: false,
                    y2_cap: p.plate_height,
                })
            }
            3 => Some(Frame {
                depth,
                ds: self.inst.defects(n.bins - 1),
                x1_prev: f.x1_prev,
                x_start: f.x3_curr,
                y_b: f.y2_prev,
                x1_old: Some(f.x1_curr),
                z1: n.z1,
                x1_cap: n.x1_max,
                y2_old: Some(f.y2_curr),
                z2: n.z2,
                y2_cap: n.y2_max.min(p.plate_height),
            }),
            _ => None,
        }
    }

    /// Right boundary of the first-level sub-plate once its last second-level one ends at `x3`.
    fn place_x1(&self, fr: &Frame, x3: Length) -> Option<(Length, Length, bool)> {
        let p = &self.p;
        let mw = p.min_waste;
        let width = p.plate_width;
        let mut refs: SmallVec<[Length; 2]> = smallvec![x3];
        let mut lo = match fr.x1_old {
            Some(old) => {
                if fr.z1 {
                    refs.push(old);
                }
                old.max(x3)
            }
            None => x3.max(fr.x1_prev + p.min1),
        };
        for _ in 0..REPAIR_ROUNDS {
            let x1 = fit_min(lo, &refs, mw);
            if x1 > fr.x1_cap || x1 > width {
                return None;
            }
            if !gap_ok(width - x1, mw) {
                lo = width;
                continue;
            }
            if Some(x1) != fr.x1_old {
                if let Some(r) = vcut_blockers(fr.ds, x1, 0, p.plate_height) {
                    lo = r;
                    continue;
                }
            }
            let z1 = fr.x1_old.is_some() && fr.z1 && Some(x1) == fr.x1_old;
            return Some((x1, fr.x1_cap, z1));
        }
        None
    }

    /// Top of the second-level sub-plate. `rigid` contents pin it to `top`.
    fn place_y2(&self, fr: &Frame, x1: Length, x3: Length, top: Length, rigid: bool) -> Option<(Length, Length)> {
        let p = &self.p;
        let mw = p.min_waste;
        let height = p.plate_height;
        let cap = fr.y2_cap.min(ybound(fr.ds, x3, fr.y_b)).min(height);
        let mut refs: SmallVec<[Length; 2]> = smallvec![top];
        let mut lo = match fr.y2_old {
            Some(old) => {
                if fr.z2 {
                    refs.push(old);
                }
                old.max(top)
            }
            None => top.max(fr.y_b + p.min2),
        };
        for _ in 0..REPAIR_ROUNDS {
            let y2 = if rigid {
                if lo != top || refs.iter().any(|&r| !(top == r || top - r >= mw)) {
                    return None;
                }
                top
            } else {
                fit_min(lo, &refs, mw)
            };
            if y2 > cap {
                return None;
            }
            if !gap_ok(height - y2, mw) {
                if rigid {
                    return None;
                }
                lo = height;
                continue;
            }
            if y2 < height {
                if let Some(t) = hcut_blockers(fr.ds, y2, fr.x1_prev, x1) {
                    if rigid {
                        return None;
                    }
                    lo = t;
                    continue;
                }
            }
            let y2_max = if rigid { y2 } else { cap };
            return Some((y2, y2_max));
        }
        None
    }

    fn place(&self, fr: &Frame, content: Content) -> Option<Insertion> {
        let p = &self.p;
        let mw = p.min_waste;
        let ds = fr.ds;
        let (items, rigid, width): (SmallVec<[PlacedItem; 2]>, bool, Length) = match content {
            Content::One { id, w, h, rotated } => {
                let mut r = Rect::new(fr.x_start, fr.y_b, w, h);
                let mut lifted = false;
                for _ in 0..=ds.len() {
                    match rect_blockers(ds, &r) {
                        None => break,
                        Some(t) => {
                            lifted = true;
                            r.y = t.max(fr.y_b + mw).max(r.y + 1);
                        }
                    }
                }
                if r.top() > p.plate_height || rect_blockers(ds, &r).is_some() {
                    return None;
                }
                (smallvec![PlacedItem { id, rect: r, rotated }], lifted, w)
            }
            Content::Two { bottom, top, w } => {
                let a = Rect::new(fr.x_start, fr.y_b, w, bottom.1);
                let b = Rect::new(fr.x_start, a.top(), w, top.1);
                if b.top() > p.plate_height || rect_blockers(ds, &a).is_some() || rect_blockers(ds, &b).is_some() {
                    return None;
                }
                (
                    smallvec![
                        PlacedItem { id: bottom.0, rect: a, rotated: bottom.2 },
                        PlacedItem { id: top.0, rect: b, rotated: top.2 }
                    ],
                    true,
                    w,
                )
            }
        };
        let x3 = fr.x_start + width;
        let top = items.last().unwrap().rect.top();

        let (x1, x1_max, z1) = self.place_x1(fr, x3)?;
        let (y2, y2_max) = self.place_y2(fr, x1, x3, top, rigid)?;

        let kind = match content {
            Content::Two { .. } => InsertionKind::TwoItems,
            Content::One { .. } if items[0].rect.y > fr.y_b => InsertionKind::OneItemWasteBelow,
            Content::One { .. } if top < y2 => InsertionKind::OneItemWasteAbove,
            Content::One { .. } => InsertionKind::OneItem,
        };
        let ins_y4 = match kind {
            InsertionKind::OneItemWasteAbove | InsertionKind::TwoItems => Some(items[0].rect.top()),
            InsertionKind::OneItemWasteBelow => Some(items[0].rect.y),
            _ => None,
        };
        if let Some(y4) = ins_y4 {
            if !hcut_ok(ds, y4, fr.x_start, x3) {
                return None;
            }
        }
        let z2 = !rigid && (y2 == top || (fr.z2 && Some(y2) == fr.y2_old));
        Some(Insertion { kind, depth: fr.depth, items, x1, y2, x3, x1_max, y2_max, z1, z2 })
    }

    /// Waste-only sub-plates covering a defect, one per defect in the target region.
    fn waste_insertions(&self, depth: u8, out: &mut Vec<Insertion>) {
        let n = self.node;
        let p = &self.p;
        let mw = p.min_waste;
        let (width, height) = (p.plate_width, p.plate_height);
        let f = &n.front;
        match depth {
            0 | 1 => {
                let (ds, x_from) = if depth == 0 {
                    if n.bins >= p.plate_count {
                        return;
                    }
                    (self.inst.defects(n.bins), 0)
                } else {
                    (self.inst.defects(n.bins - 1), f.x1_curr)
                };
                for d in ds.iter().filter(|d| d.right() > x_from) {
                    let x = d.right().max(x_from + mw);
                    if x > width || !gap_ok(width - x, mw) || vcut_blockers(ds, x, 0, height).is_some() {
                        continue;
                    }
                    out.push(Insertion {
                        kind: InsertionKind::WasteOnly,
                        depth,
                        items: SmallVec::new(),
                        x1: x,
                        y2: height,
                        x3: x,
                        x1_max: x,
                        y2_max: height,
                        z1: false,
                        z2: false,
                    });
                }
            }
            2 => {
                let ds = self.inst.defects(n.bins - 1);
                if f.y2_curr >= height {
                    return;
                }
                let closing_waste = matches!(n.last, Some(l) if l.waste_only && l.depth == 2);
                let closing_tight = !closing_waste && f.x3_curr == f.x1_curr;
                let x1_max = n.x1_max.min(xbound(ds, f.y2_curr, f.x1_prev));
                if f.x1_curr > x1_max {
                    return;
                }
                for d in ds.iter().filter(|d| d.top() > f.y2_curr && d.x < f.x1_curr && d.right() > f.x1_prev) {
                    let y = d.top().max(f.y2_curr + mw);
                    if y > height || !gap_ok(height - y, mw) || (y < height && !hcut_ok(ds, y, f.x1_prev, f.x1_curr)) {
                        continue;
                    }
                    out.push(Insertion {
                        kind: InsertionKind::WasteOnly,
                        depth,
                        items: SmallVec::new(),
                        x1: f.x1_curr,
                        y2: y,
                        x3: f.x1_curr,
                        x1_max,
                        y2_max: y,
                        z1: n.z1 || closing_tight,
                        z2: false,
                    });
                }
            }
            3 => {
                let Some(fr) = self.frame(3) else { return };
                let ds = fr.ds;
                for d in ds.iter().filter(|d| d.right() > f.x3_curr && d.y < f.y2_curr && d.top() > f.y2_prev) {
                    let x3 = d.right().max(f.x3_curr + mw);
                    let cap = ybound(ds, x3, f.y2_prev);
                    if cap < f.y2_curr {
                        continue;
                    }
                    let Some((x1, x1_max, z1)) = self.place_x1(&fr, x3) else { continue };
                    if f.y2_curr < height && !hcut_ok(ds, f.y2_curr, f.x1_prev, x1) {
                        continue;
                    }
                    out.push(Insertion {
                        kind: InsertionKind::WasteOnly,
                        depth,
                        items: SmallVec::new(),
                        x1,
                        y2: f.y2_curr,
                        x3,
                        x1_max,
                        y2_max: n.y2_max.min(cap),
                        z1,
                        z2: n.z2,
                    });
                }
            }
            _ => {}
        }
    }

    fn allowed_depths(&self) -> SmallVec<[u8; 4]> {
        let n = self.node;
        if n.bins == 0 {
            return smallvec![0];
        }
        match n.last {
            Some(l) if l.waste_only => smallvec![l.depth.max(1)],
            Some(l) if l.two_items && l.depth != 3 => smallvec![3],
            _ => smallvec![3, 2, 1, 0],
        }
    }
}

/// Every insertion the scheme allows from `node`, after the depth pruning rules.
pub fn enumerate_insertions(node: &Node, instance: &Instance, config: &BranchingConfig) -> Vec<Insertion> {
    if node.complete {
        return Vec::new();
    }
    let en = Enumerator::new(instance, node);
    let depths = en.allowed_depths();
    let frames: Vec<Frame> = depths.iter().filter_map(|&d| en.frame(d)).collect();

    let candidates = candidate_items(node, instance);
    let singles = if config.merge_identical_items {
        merge_identical(instance, &candidates)
    } else {
        candidates.clone()
    };

    let mut out: Vec<Insertion> = Vec::new();
    for &j in &singles {
        let it: &Item = &instance.items[j];
        for fr in &frames {
            for (w, h, rotated) in it.orientations() {
                if let Some(ins) = en.place(fr, Content::One { id: j, w, h, rotated }) {
                    out.push(ins);
                }
            }
        }
        // Two-item sub-plates with `j` at the bottom.
        let mut partners: Vec<usize> = candidates.iter().copied().filter(|&k| k != j).collect();
        if config.merge_identical_items {
            partners = merge_identical(instance, &partners);
        }
        if let Some(&next) = instance.chains[it.chain_id].get(it.chain_rank + 1) {
            partners.push(next);
        }
        for &k in &partners {
            let other = &instance.items[k];
            for fr in &frames {
                for (w, h1, r1) in it.orientations() {
                    for (w2, h2, r2) in other.orientations() {
                        if w2 != w {
                            continue;
                        }
                        let content = Content::Two { bottom: (j, h1, r1), top: (k, h2, r2), w };
                        if let Some(ins) = en.place(fr, content) {
                            out.push(ins);
                        }
                    }
                }
            }
        }
    }

    // Depth suppression: a sub-plate that fits without opening a new structure
    // removes the insertions that would open one.
    let f = &node.front;
    let any_current_bin = out.iter().any(|i| i.depth >= 1);
    let any_keep_first = out.iter().any(|i| i.depth >= 2 && i.x1 == f.x1_curr);
    let any_keep_second = out.iter().any(|i| i.depth == 3 && i.y2 == f.y2_curr);
    out.retain(|i| match i.depth {
        0 => !any_current_bin,
        1 => !any_keep_first,
        2 => !any_keep_second,
        _ => true,
    });
    out.sort_by_key(|i| (i.first_item(), std::cmp::Reverse(i.depth), i.kind));

    let mut waste = Vec::new();
    for &d in &depths {
        if d == 0 && any_current_bin {
            continue;
        }
        en.waste_insertions(d, &mut waste);
    }
    waste.sort_by_key(|i| std::cmp::Reverse(i.depth));
    out.extend(waste);
    out
}

/// Child node obtained by performing `ins` on `node`.
pub fn apply_insertion(node: &Rc<Node>, ins: &Insertion, instance: &Instance, config: &BranchingConfig) -> Node {
    let p = &instance.params;
    let f = &node.front;
    let (bins, x1_prev, y2_prev, x3_prev) = match ins.depth {
        0 => (node.bins + 1, 0, 0, 0),
        1 => (node.bins, f.x1_curr, 0, f.x1_curr),
        2 => (node.bins, f.x1_prev, f.y2_curr, f.x1_prev),
        _ => (node.bins, f.x1_prev, f.y2_prev, f.x3_curr),
    };
    let front = Front { bin_index: bins - 1, x1_prev, x1_curr: ins.x1, x3_curr: ins.x3, y2_prev, y2_curr: ins.y2 };
    debug_assert!(front.is_well_formed(p.plate_width, p.plate_height), "{front:?} from {ins:?}");

    let mut progress: Progress = node.progress.clone();
    let mut item_area = node.item_area;
    for pi in &ins.items {
        progress.mark(instance, pi.id);
        item_area += pi.rect.area();
    }
    let items_packed = node.items_packed + ins.items.len();
    let complete = items_packed == instance.item_count();
    let prior_bins_area = (bins as i64 - 1) * p.plate_area();
    let current_area = area_of(&front, prior_bins_area, p.plate_height, complete);

    let new_key = |lo: Length, hi: Length| -> SubplateKey {
        let mut k = SubplateKey { lo, hi, ..SubplateKey::default() };
        for pi in &ins.items {
            let key = config.key(instance, pi.id);
            k.min_key = Some(k.min_key.map_or(key, |m| m.min(key)));
            let c = instance.items[pi.id].chain_id as u32;
            if !k.chains.contains(&c) {
                k.chains.push(c);
            }
        }
        k
    };
    let cur3 = Rc::new(new_key(x3_prev, ins.x3));
    let (prev2, cur2) = match ins.depth {
        0 | 1 => (None, Rc::new(new_key(y2_prev, ins.y2))),
        2 => {
            let mut closed = (*node.cur2).clone();
            closed.hi = f.y2_curr;
            (Some(Rc::new(closed)), Rc::new(new_key(y2_prev, ins.y2)))
        }
        _ => {
            let cur2 = if ins.items.is_empty() {
                node.cur2.clone()
            } else {
                let mut merged = (*node.cur2).clone();
                let add = new_key(0, 0);
                merged.min_key = match (merged.min_key, add.min_key) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (a, b) => a.or(b),
                };
                for c in add.chains {
                    if !merged.chains.contains(&c) {
                        merged.chains.push(c);
                    }
                }
                Rc::new(merged)
            };
            (node.prev2.clone(), cur2)
        }
    };

    let child = Node {
        parent: Some(node.clone()),
        insertion: Some(ins.clone()),
        progress,
        items_packed,
        item_area,
        complete,
        bins,
        front,
        x3_prev,
        x1_max: ins.x1_max,
        y2_max: ins.y2_max,
        z1: ins.z1,
        z2: ins.z2,
        last: Some(LastInsertion {
            depth: ins.depth,
            waste_only: ins.kind == InsertionKind::WasteOnly,
            two_items: ins.kind == InsertionKind::TwoItems,
        }),
        prev2,
        cur2,
        cur3,
        current_area,
        prior_bins_area,
    };
    debug_assert!(child.waste() >= node.waste(), "waste decreased: {ins:?}");
    child
}

/// False when `ins` puts a smaller index after an exchangeable sibling sub-plate.
///
/// Third-level siblings (k = 3) are compared when the right one is inserted. Second-level
/// siblings (k = 2) are compared once the right one is closed, by an insertion at depth
/// 0..=2 or by the insertion completing the solution, so that all its chains are known.
pub fn symmetry_allows(node: &Node, ins: &Insertion, instance: &Instance, config: &BranchingConfig) -> bool {
    if node.bins == 0 {
        return true;
    }
    let f = &node.front;
    let ds = instance.defects(node.bins - 1);
    let mut new_chains: SmallVec<[u32; 4]> = SmallVec::new();
    for pi in &ins.items {
        let c = instance.items[pi.id].chain_id as u32;
        if !new_chains.contains(&c) {
            new_chains.push(c);
        }
    }
    let new_min = ins.items.iter().map(|pi| config.key(instance, pi.id)).min();

    if ins.depth == 3 {
        if let (Some(nm), Some(pm)) = (new_min, node.cur3.min_key) {
            let prev_region = Rect::new(node.x3_prev, f.y2_prev, f.x3_curr - node.x3_prev, ins.y2 - f.y2_prev);
            let new_region = Rect::new(f.x3_curr, f.y2_prev, ins.x3 - f.x3_curr, ins.y2 - f.y2_prev);
            if nm < pm
                && !node.cur3.shares_chain(&new_chains)
                && region_clear(ds, &prev_region)
                && region_clear(ds, &new_region)
            {
                return false;
            }
        }
    }

    let completes = node.items_packed + ins.items.len() == instance.item_count();
    if ins.depth <= 2 {
        if let Some(prev) = node.prev2.as_deref() {
            let last = Sibling::from_key(&node.cur2, f.y2_curr);
            if !k2_ok(ds, f.x1_prev, f.x1_curr, &Sibling::from_key(prev, prev.hi), &last) {
                return false;
            }
        }
    }
    if !completes || ins.depth <= 1 {
        return true;
    }
    let (prev, mut last, x1) = if ins.depth == 2 {
        let prev = Sibling::from_key(&node.cur2, f.y2_curr);
        let last = Sibling { lo: f.y2_curr, hi: ins.y2, min_key: None, chains: SmallVec::new() };
        (prev, last, ins.x1)
    } else {
        let Some(prev) = node.prev2.as_deref() else { return true };
        (Sibling::from_key(prev, prev.hi), Sibling::from_key(&node.cur2, ins.y2), ins.x1)
    };
    if let Some(nm) = new_min {
        last.min_key = Some(last.min_key.map_or(nm, |m| m.min(nm)));
    }
    for c in new_chains {
        if !last.chains.contains(&c) {
            last.chains.push(c);
        }
    }
    k2_ok(ds, f.x1_prev, x1, &prev, &last)
}

/// A second-level sub-plate as seen by the k = 2 comparison.
struct Sibling {
    lo: Length,
    hi: Length,
    min_key: Option<usize>,
    chains: SmallVec<[u32; 4]>,
}

impl Sibling {
    fn from_key(k: &SubplateKey, hi: Length) -> Sibling {
        Sibling { lo: k.lo, hi, min_key: k.min_key, chains: k.chains.clone() }
    }
}

fn k2_ok(ds: &[Defect], x1_prev: Length, x1: Length, prev: &Sibling, last: &Sibling) -> bool {
    let (Some(lm), Some(pm)) = (last.min_key, prev.min_key) else { return true };
    let shared = prev.chains.iter().any(|c| last.chains.contains(c));
    let prev_region = Rect::new(x1_prev, prev.lo, x1 - x1_prev, prev.hi - prev.lo);
    let last_region = Rect::new(x1_prev, last.lo, x1 - x1_prev, last.hi - last.lo);
    !(lm < pm && !shared && region_clear(ds, &prev_region) && region_clear(ds, &last_region))
}

/// Removes siblings whose front is dominated by a sibling packing the same items.
/// Ties keep the earliest child; order is preserved.
pub fn filter_dominated_children(children: Vec<Node>, height: Length) -> Vec<Node> {
    let mut groups: HashMap<(usize, usize, &Progress), Vec<usize>> = HashMap::new();
    for (i, c) in children.iter().enumerate() {
        groups.entry((c.bins, c.items_packed, &c.progress)).or_default().push(i);
    }
    let mut dead = vec![false; children.len()];
    for members in groups.values() {
        if members.len() < 2 {
            continue;
        }
        for &i in members {
            dead[i] = members.iter().any(|&j| {
                j != i
                    && front_leq(&children[j].front, &children[i].front, height).unwrap_or(false)
                    && (j < i || !front_leq(&children[i].front, &children[j].front, height).unwrap_or(false))
            });
        }
    }
    children
        .into_iter()
        .zip(dead)
        .filter_map(|(c, d)| (!d).then_some(c))
        .collect()
}

/// Enumerate, filter by symmetry, apply, filter by sibling dominance.
pub fn children(node: &Rc<Node>, instance: &Instance, config: &BranchingConfig) -> Vec<Node> {
    let kids: Vec<Node> = enumerate_insertions(node, instance, config)
        .into_iter()
        .filter(|ins| !config.symmetry || symmetry_allows(node, ins, instance, config))
        .map(|ins| apply_insertion(node, &ins, instance, config))
        .collect();
    if config.dominance {
        filter_dominated_children(kids, instance.params.plate_height)
    } else {
        kids
    }
}
