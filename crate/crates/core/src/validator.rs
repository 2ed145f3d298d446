//! Feasibility checker for cut trees, written against the problem rules only.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::model::{Area, Instance, Rect};
use crate::tree::{NodeType, SolutionTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    MissingItem,
    DuplicateItem,
    UnknownItem,
    WrongItemDimensions,
    NonTiling,
    BadCutLevel,
    TooDeep,
    MultipleFourCuts,
    DefectOverlap,
    CutThroughDefect,
    FirstLevelWidth,
    SecondLevelHeight,
    MinimumWaste,
    Precedence,
    Residual,
    PlateOrder,
    Structure,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::MissingItem => "missing item",
            ViolationKind::DuplicateItem => "duplicated item",
            ViolationKind::UnknownItem => "unknown item",
            ViolationKind::WrongItemDimensions => "wrong item dimensions",
            ViolationKind::NonTiling => "children do not tile their parent",
            ViolationKind::BadCutLevel => "bad cut level",
            ViolationKind::TooDeep => "more than 4 cut stages",
            ViolationKind::MultipleFourCuts => "multiple 4-cuts",
            ViolationKind::DefectOverlap => "item overlaps a defect",
            ViolationKind::CutThroughDefect => "cut through a defect",
            ViolationKind::FirstLevelWidth => "first-level width out of bounds",
            ViolationKind::SecondLevelHeight => "second-level height below minimum",
            ViolationKind::MinimumWaste => "minimum waste",
            ViolationKind::Precedence => "precedence violated",
            ViolationKind::Residual => "misplaced residual",
            ViolationKind::PlateOrder => "plates out of order",
            ViolationKind::Structure => "malformed tree",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(f, "{} (node {}): {}", self.kind.label(), n, self.detail),
            None => write!(f, "{}: {}", self.kind.label(), self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, node: Option<usize>, detail: impl Into<String>) {
        self.violations.push(Violation { kind, node, detail: detail.into() });
    }
}

/// Whether every item must be present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Complete,
    /// Missing items are fine; packed items must still respect chain order.
    Partial,
}

#[derive(Debug, Error)]
#[error("solution is infeasible ({} violations)", .0.violations.len())]
pub struct Infeasible(pub Report);

pub fn validate(instance: &Instance, tree: &SolutionTree) -> Report {
    validate_with(instance, tree, Mode::Complete)
}

pub fn validate_with(instance: &Instance, tree: &SolutionTree, mode: Mode) -> Report {
    let mut rep = Report::default();
    let p = &instance.params;
    let nodes = &tree.nodes;
    let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    if index.len() != nodes.len() {
        rep.push(ViolationKind::Structure, None, "duplicate node ids");
        return rep;
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut roots = Vec::new();
    for (i, n) in nodes.iter().enumerate() {
        match n.parent {
            None => roots.push(i),
            Some(pid) => match index.get(&pid) {
                Some(&pi) if pi < i => children[pi].push(i),
                _ => rep.push(ViolationKind::Structure, Some(n.id), format!("parent {pid} missing or listed later")),
            },
        }
    }
    if !rep.is_feasible() {
        return rep;
    }

    // Plates: one root per plate, in order, none skipped.
    for (k, &r) in roots.iter().enumerate() {
        let n = &nodes[r];
        if n.plate != k {
            rep.push(ViolationKind::PlateOrder, Some(n.id), format!("plate {} at position {k}", n.plate));
        }
        if n.cut != 0 {
            rep.push(ViolationKind::BadCutLevel, Some(n.id), "plate root must have CUT 0");
        }
        if n.rect != Rect::new(0, 0, p.plate_width, p.plate_height) {
            rep.push(ViolationKind::NonTiling, Some(n.id), "plate root must cover the plate");
        }
    }
    if roots.len() > p.plate_count {
        rep.push(ViolationKind::PlateOrder, None, format!("{} plates used, {} available", roots.len(), p.plate_count));
    }

    let mut item_seen = vec![0usize; instance.item_count()];
    for (i, n) in nodes.iter().enumerate() {
        let kids = &children[i];
        if let Some(pid) = n.parent {
            let parent = &nodes[index[&pid]];
            if n.plate != parent.plate {
                rep.push(ViolationKind::Structure, Some(n.id), "child on another plate than its parent");
            }
            if n.cut != parent.cut + 1 {
                rep.push(ViolationKind::BadCutLevel, Some(n.id), format!("CUT {} under CUT {}", n.cut, parent.cut));
            }
        }
        if n.cut > 4 {
            rep.push(ViolationKind::TooDeep, Some(n.id), format!("CUT {}", n.cut));
        }
        if n.rect.w <= 0 || n.rect.h <= 0 {
            rep.push(ViolationKind::Structure, Some(n.id), "empty rectangle");
        }
        match n.kind {
            NodeType::Branch if kids.is_empty() => {
                rep.push(ViolationKind::Structure, Some(n.id), "branch without children")
            }
            NodeType::Branch => {}
            _ if !kids.is_empty() => rep.push(ViolationKind::Structure, Some(n.id), "leaf with children"),
            NodeType::Item(id) => {
                if id >= instance.item_count() {
                    rep.push(ViolationKind::UnknownItem, Some(n.id), format!("item {id}"));
                    continue;
                }
                item_seen[id] += 1;
                let it = &instance.items[id];
                let dims = (n.rect.w, n.rect.h);
                if dims != (it.width, it.height) && dims != (it.height, it.width) {
                    rep.push(
                        ViolationKind::WrongItemDimensions,
                        Some(n.id),
                        format!("item {id} is {}x{}, placed as {}x{}", it.width, it.height, n.rect.w, n.rect.h),
                    );
                }
                for d in instance.defects(n.plate) {
                    if d.rect().overlaps(&n.rect) {
                        rep.push(ViolationKind::DefectOverlap, Some(n.id), format!("item {id} over defect {}", d.id));
                    }
                }
            }
            NodeType::Waste => {
                if n.rect.w < p.min_waste || n.rect.h < p.min_waste {
                    rep.push(
                        ViolationKind::MinimumWaste,
                        Some(n.id),
                        format!("{}x{} below {}", n.rect.w, n.rect.h, p.min_waste),
                    );
                }
            }
            NodeType::Residual => {
                let last_plate = roots.last().map(|&r| nodes[r].plate);
                if n.cut != 1 || Some(n.plate) != last_plate || n.rect.right() != p.plate_width {
                    rep.push(ViolationKind::Residual, Some(n.id), "residual must be the rightmost 1-level piece of the last plate");
                }
            }
        }
        // Size bounds of sub-plates; waste pieces are exempt.
        let is_waste = matches!(n.kind, NodeType::Waste | NodeType::Residual);
        if n.cut == 1 && !is_waste && !(p.min1..=p.max1).contains(&n.rect.w) {
            rep.push(ViolationKind::FirstLevelWidth, Some(n.id), format!("width {}", n.rect.w));
        }
        if n.cut == 2 && !is_waste && n.rect.h < p.min2 {
            rep.push(ViolationKind::SecondLevelHeight, Some(n.id), format!("height {}", n.rect.h));
        }
        if n.cut == 3 && kids.len() > 2 {
            rep.push(ViolationKind::MultipleFourCuts, Some(n.id), format!("{} pieces", kids.len()));
        }
        if !kids.is_empty() {
            check_split(instance, tree, i, kids, &mut rep);
        }
    }
    if nodes.iter().filter(|n| n.kind == NodeType::Residual).count() > 1 {
        rep.push(ViolationKind::Residual, None, "more than one residual");
    }

    for (id, &count) in item_seen.iter().enumerate() {
        if count > 1 {
            rep.push(ViolationKind::DuplicateItem, None, format!("item {id} appears {count} times"));
        } else if count == 0 && mode == Mode::Complete {
            rep.push(ViolationKind::MissingItem, None, format!("item {id}"));
        }
    }

    // Extraction order: plates in order, pre-order with children left-to-right / bottom-to-top.
    let mut order: Vec<usize> = Vec::new();
    for &r in &roots {
        extraction_order(tree, &children, r, &mut order);
    }
    let mut position = vec![usize::MAX; instance.item_count()];
    for (k, &id) in order.iter().enumerate() {
        if id < position.len() && position[id] == usize::MAX {
            position[id] = k;
        }
    }
    for chain in &instance.chains {
        for w in chain.windows(2) {
            let (a, b) = (position[w[0]], position[w[1]]);
            if b != usize::MAX && (a == usize::MAX || a > b) {
                rep.push(ViolationKind::Precedence, None, format!("item {} extracted before item {}", w[1], w[0]));
            }
        }
    }
    rep
}

/// Children split the parent along x at odd levels and along y at even levels, tile it,
/// and no cut between two children crosses a defect.
fn check_split(instance: &Instance, tree: &SolutionTree, parent: usize, kids: &[usize], rep: &mut Report) {
    let nodes = &tree.nodes;
    let pn = &nodes[parent];
    let pr = pn.rect;
    let vertical = (pn.cut + 1) % 2 == 1;
    let mut sorted: Vec<usize> = kids.to_vec();
    sorted.sort_by_key(|&k| if vertical { nodes[k].rect.x } else { nodes[k].rect.y });
    let mut pos = if vertical { pr.x } else { pr.y };
    let mut ok = true;
    for &k in &sorted {
        let r = nodes[k].rect;
        let (start, len, across_ok) = if vertical {
            (r.x, r.w, r.y == pr.y && r.h == pr.h)
        } else {
            (r.y, r.h, r.x == pr.x && r.w == pr.w)
        };
        if start != pos || !across_ok {
            ok = false;
        }
        pos = start + len;
    }
    let end = if vertical { pr.right() } else { pr.top() };
    if !ok || pos != end {
        rep.push(ViolationKind::NonTiling, Some(pn.id), "children do not partition the parent along one axis");
        return;
    }
    let defects = instance.defects(pn.plate);
    for &k in &sorted[1..] {
        let r = nodes[k].rect;
        for d in defects {
            let crosses = if vertical {
                d.x < r.x && r.x < d.right() && pr.y < d.top() && d.y < pr.top()
            } else {
                d.y < r.y && r.y < d.top() && pr.x < d.right() && d.x < pr.right()
            };
            if crosses {
                let at = if vertical { r.x } else { r.y };
                rep.push(ViolationKind::CutThroughDefect, Some(pn.id), format!("cut at {at} crosses defect {}", d.id));
            }
        }
    }
}

fn extraction_order(tree: &SolutionTree, children: &[Vec<usize>], i: usize, out: &mut Vec<usize>) {
    let n = &tree.nodes[i];
    if let NodeType::Item(id) = n.kind {
        out.push(id);
    }
    let mut kids = children[i].clone();
    kids.sort_by_key(|&k| {
        let r = tree.nodes[k].rect;
        (r.x, r.y)
    });
    for k in kids {
        extraction_order(tree, children, k, out);
    }
}

/// Objective of a feasible tree, from the last 1-cut position.
pub fn objective_of(instance: &Instance, tree: &SolutionTree) -> Result<Area, Infeasible> {
    let rep = validate(instance, tree);
    if !rep.is_feasible() {
        return Err(Infeasible(rep));
    }
    Ok(tree.objective(instance))
}

/// Objective of a tree as the sum of its waste leaves.
pub fn waste_leaf_sum(tree: &SolutionTree) -> Area {
    tree.waste_leaf_area()
}
