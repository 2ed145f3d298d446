//! The cut tree of a solution and its construction from an insertion sequence.

use thiserror::Error;

use crate::branching::{Insertion, InsertionKind, PlacedItem};
use crate::model::{Area, Instance, Length, Rect};
use crate::node::Node;

/// Value of the `TYPE` column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeType {
    Item(usize),
    Waste,
    Branch,
    Residual,
}

impl NodeType {
    pub fn code(self) -> i64 {
        match self {
            NodeType::Item(id) => id as i64,
            NodeType::Waste => -1,
            NodeType::Branch => -2,
            NodeType::Residual => -3,
        }
    }

    pub fn from_code(code: i64) -> Option<NodeType> {
        match code {
            c if c >= 0 => Some(NodeType::Item(c as usize)),
            -1 => Some(NodeType::Waste),
            -2 => Some(NodeType::Branch),
            -3 => Some(NodeType::Residual),
            _ => None,
        }
    }

    pub fn is_leaf(self) -> bool {
        !matches!(self, NodeType::Branch)
    }
}

/// One row of a solution file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeNode {
    pub id: usize,
    pub plate: usize,
    pub rect: Rect,
    pub kind: NodeType,
    pub cut: u8,
    pub parent: Option<usize>,
}

/// All plates' cut trees, rows in pre-order (parents first).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolutionTree {
    pub nodes: Vec<TreeNode>,
}

impl SolutionTree {
    pub fn plate_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.parent.is_none()).count()
    }

    /// Right edge of the used part of the last plate: the residual's x, or the plate width.
    pub fn last_cut_x(&self, width: Length) -> Length {
        let last_plate = self.nodes.iter().filter(|n| n.parent.is_none()).map(|n| n.plate).max();
        self.nodes
            .iter()
            .find(|n| n.kind == NodeType::Residual && Some(n.plate) == last_plate)
            .map_or(width, |n| n.rect.x)
    }

    /// `(n - 1)·H·W + H·x_last - Σ item areas`, with `x_last` the last 1-cut of the last plate.
    pub fn objective(&self, instance: &Instance) -> Area {
        let p = &instance.params;
        let n = self.plate_count() as Area;
        if n == 0 {
            return 0;
        }
        let packed: Area = self
            .nodes
            .iter()
            .filter_map(|t| match t.kind {
                NodeType::Item(_) => Some(t.rect.area()),
                _ => None,
            })
            .sum();
        (n - 1) * p.plate_area() + p.plate_height * self.last_cut_x(p.plate_width) - packed
    }

    /// Sum of the areas of waste leaves.
    pub fn waste_leaf_area(&self) -> Area {
        self.nodes.iter().filter(|t| t.kind == NodeType::Waste).map(|t| t.rect.area()).sum()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("solution is incomplete: {packed} of {total} items packed")]
    Incomplete { packed: usize, total: usize },
    #[error("insertion sequence cannot be replayed: {0}")]
    Internal(String),
}

// Intermediate plan rebuilt from insertions.

struct Third {
    x0: Length,
    x1: Length,
    items: Vec<PlacedItem>,
}

struct Second {
    y0: Length,
    y1: Length,
    waste: bool,
    thirds: Vec<Third>,
}

struct First {
    x0: Length,
    x1: Length,
    waste: bool,
    seconds: Vec<Second>,
}

struct Bin {
    firsts: Vec<First>,
}

fn replay(insertions: &[Insertion]) -> Result<Vec<Bin>, TreeError> {
    let internal = |m: &str| TreeError::Internal(m.to_string());
    let mut bins: Vec<Bin> = Vec::new();
    for ins in insertions {
        let waste = ins.kind == InsertionKind::WasteOnly;
        if ins.depth == 0 {
            bins.push(Bin { firsts: Vec::new() });
        }
        let bin = bins.last_mut().ok_or_else(|| internal("insertion before the first bin"))?;
        if ins.depth <= 1 {
            let x0 = bin.firsts.last().map_or(0, |f| f.x1);
            bin.firsts.push(First { x0, x1: ins.x1, waste, seconds: Vec::new() });
            if waste {
                continue;
            }
        }
        let first = bin.firsts.last_mut().ok_or_else(|| internal("no first-level sub-plate"))?;
        first.x1 = ins.x1;
        if ins.depth <= 2 {
            let y0 = if ins.depth == 2 { first.seconds.last().map_or(0, |s| s.y1) } else { 0 };
            first.seconds.push(Second { y0, y1: ins.y2, waste: waste && ins.depth == 2, thirds: Vec::new() });
            if waste {
                continue;
            }
        }
        let x_left = first.x0;
        let second = first.seconds.last_mut().ok_or_else(|| internal("no second-level sub-plate"))?;
        second.y1 = ins.y2;
        let x0 = second.thirds.last().map_or(x_left, |t| t.x1);
        second.thirds.push(Third { x0, x1: ins.x3, items: ins.items.to_vec() });
    }
    Ok(bins)
}

/// Pre-order emission with ids assigned on the fly.
struct Emitter<'a> {
    nodes: Vec<TreeNode>,
    plate: usize,
    instance: &'a Instance,
}

/// Subtree before id assignment.
struct Draft {
    rect: Rect,
    kind: NodeType,
    children: Vec<Draft>,
}

impl Draft {
    fn leaf(rect: Rect, kind: NodeType) -> Draft {
        Draft { rect, kind, children: Vec::new() }
    }

    /// A branch, or its only child when that child is a leaf covering the same rectangle.
    fn branch(rect: Rect, mut children: Vec<Draft>) -> Draft {
        if children.len() == 1 && children[0].rect == rect && children[0].kind.is_leaf() {
            return children.pop().unwrap();
        }
        Draft { rect, kind: NodeType::Branch, children }
    }
}

impl<'a> Emitter<'a> {
    fn emit(&mut self, d: &Draft, cut: u8, parent: Option<usize>) {
        let id = self.nodes.len();
        self.nodes.push(TreeNode { id, plate: self.plate, rect: d.rect, kind: d.kind, cut, parent });
        for c in &d.children {
            self.emit(c, cut + 1, Some(id));
        }
    }

    fn third(&self, t: &Third, y0: Length, y1: Length) -> Draft {
        let rect = Rect::new(t.x0, y0, t.x1 - t.x0, y1 - y0);
        if t.items.is_empty() {
            return Draft::leaf(rect, NodeType::Waste);
        }
        let mut kids = Vec::new();
        let mut y = y0;
        for pi in &t.items {
            if pi.rect.y > y {
                kids.push(Draft::leaf(Rect::new(t.x0, y, rect.w, pi.rect.y - y), NodeType::Waste));
            }
            kids.push(Draft::leaf(pi.rect, NodeType::Item(pi.id)));
            y = pi.rect.top();
        }
        if y < y1 {
            kids.push(Draft::leaf(Rect::new(t.x0, y, rect.w, y1 - y), NodeType::Waste));
        }
        Draft::branch(rect, kids)
    }

    fn second(&self, s: &Second, x0: Length, x1: Length) -> Draft {
        let rect = Rect::new(x0, s.y0, x1 - x0, s.y1 - s.y0);
        if s.waste {
            return Draft::leaf(rect, NodeType::Waste);
        }
        let mut kids: Vec<Draft> = s.thirds.iter().map(|t| self.third(t, s.y0, s.y1)).collect();
        let right = s.thirds.last().map_or(x0, |t| t.x1);
        if right < x1 {
            kids.push(Draft::leaf(Rect::new(right, s.y0, x1 - right, rect.h), NodeType::Waste));
        }
        Draft::branch(rect, kids)
    }

    fn first(&self, f: &First) -> Draft {
        let h = self.instance.params.plate_height;
        let rect = Rect::new(f.x0, 0, f.x1 - f.x0, h);
        if f.waste {
            return Draft::leaf(rect, NodeType::Waste);
        }
        let mut kids: Vec<Draft> = f.seconds.iter().map(|s| self.second(s, f.x0, f.x1)).collect();
        let top = f.seconds.last().map_or(0, |s| s.y1);
        if top < h {
            kids.push(Draft::leaf(Rect::new(f.x0, top, rect.w, h - top), NodeType::Waste));
        }
        Draft::branch(rect, kids)
    }

    fn bin(&mut self, plate: usize, bin: &Bin, last: bool) {
        let p = &self.instance.params;
        let rect = Rect::new(0, 0, p.plate_width, p.plate_height);
        let mut kids: Vec<Draft> = bin.firsts.iter().map(|f| self.first(f)).collect();
        let right = bin.firsts.last().map_or(0, |f| f.x1);
        if right < p.plate_width {
            let kind = if last { NodeType::Residual } else { NodeType::Waste };
            kids.push(Draft::leaf(Rect::new(right, 0, p.plate_width - right, p.plate_height), kind));
        }
        // The plate root is always a branch, even over a single child.
        let root = Draft { rect, kind: NodeType::Branch, children: kids };
        self.plate = plate;
        self.emit(&root, 0, None);
    }
}

fn emit_bins(bins: &[Bin], instance: &Instance) -> SolutionTree {
    let mut em = Emitter { nodes: Vec::new(), plate: 0, instance };
    for (i, b) in bins.iter().enumerate() {
        em.bin(i, b, i + 1 == bins.len());
    }
    SolutionTree { nodes: em.nodes }
}

/// Cut tree of a complete solution.
pub fn build_solution_tree(leaf: &Node, instance: &Instance) -> Result<SolutionTree, TreeError> {
    if !leaf.complete {
        return Err(TreeError::Incomplete { packed: leaf.items_packed, total: instance.item_count() });
    }
    build_from_insertions(&leaf.insertions(), instance)
}

/// Cut tree of an insertion sequence; the area right of the last 1-cut becomes the residual.
pub fn build_from_insertions(insertions: &[Insertion], instance: &Instance) -> Result<SolutionTree, TreeError> {
    let bins = replay(insertions)?;
    Ok(emit_bins(&bins, instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Item, Params};

    fn one_item(w: Length, h: Length) -> Instance {
        let items = vec![Item { id: 0, width: w, height: h, chain_id: 0, chain_rank: 0 }];
        Instance::new("t", Params::default(), items, vec![]).unwrap()
    }

    fn ins(depth: u8, kind: InsertionKind, items: &[(usize, Rect)], x1: Length, y2: Length, x3: Length) -> Insertion {
        Insertion {
            kind,
            depth,
            items: items.iter().map(|&(id, rect)| PlacedItem { id, rect, rotated: false }).collect(),
            x1,
            y2,
            x3,
            x1_max: 0,
            y2_max: 0,
            z1: false,
            z2: false,
        }
    }

    #[test]
    fn type_codes_round_trip() {
        for t in [NodeType::Item(0), NodeType::Item(17), NodeType::Waste, NodeType::Branch, NodeType::Residual] {
            assert_eq!(NodeType::from_code(t.code()), Some(t));
        }
        assert_eq!(NodeType::from_code(-4), None);
    }

    #[test]
    fn full_strip_item() {
        let inst = one_item(3500, 3210);
        let seq = [ins(0, InsertionKind::OneItem, &[(0, Rect::new(0, 0, 3500, 3210))], 3500, 3210, 3500)];
        let t = build_from_insertions(&seq, &inst).unwrap();
        let kinds: Vec<_> = t.nodes.iter().map(|n| (n.kind, n.cut)).collect();
        assert_eq!(kinds, vec![(NodeType::Branch, 0), (NodeType::Item(0), 1), (NodeType::Residual, 1)]);
        assert_eq!(t.objective(&inst), 0);
        assert_eq!(t.waste_leaf_area(), 0);
    }

    #[test]
    fn item_with_waste_around() {
        let inst = one_item(500, 400);
        let seq = [ins(0, InsertionKind::OneItem, &[(0, Rect::new(0, 0, 500, 400))], 500, 400, 500)];
        let t = build_from_insertions(&seq, &inst).unwrap();
        // root, first-level, second-level item, waste above, residual
        assert_eq!(t.nodes.len(), 5);
        assert_eq!(t.nodes[2].kind, NodeType::Item(0));
        assert_eq!(t.nodes[2].cut, 2);
        assert_eq!(t.nodes[3].rect, Rect::new(0, 400, 500, 2810));
        assert_eq!(t.objective(&inst), 500 * 2810);
        assert_eq!(t.objective(&inst), t.waste_leaf_area());
    }

    #[test]
    fn two_items_and_lifted_item() {
        let items = vec![
            Item { id: 0, width: 500, height: 400, chain_id: 0, chain_rank: 0 },
            Item { id: 1, width: 500, height: 300, chain_id: 1, chain_rank: 0 },
            Item { id: 2, width: 200, height: 200, chain_id: 2, chain_rank: 0 },
        ];
        let inst = Instance::new("t", Params::default(), items, vec![]).unwrap();
        let a = Rect::new(0, 0, 500, 400);
        let b = Rect::new(0, 400, 500, 300);
        let c = Rect::new(500, 100, 200, 200);
        let seq = [
            ins(0, InsertionKind::TwoItems, &[(0, a), (1, b)], 500, 700, 500),
            ins(3, InsertionKind::OneItemWasteBelow, &[(2, c)], 700, 700, 700),
        ];
        let t = build_from_insertions(&seq, &inst).unwrap();
        let third_children: Vec<_> = t.nodes.iter().filter(|n| n.cut == 4).map(|n| n.kind).collect();
        assert_eq!(
            third_children,
            vec![NodeType::Item(0), NodeType::Item(1), NodeType::Waste, NodeType::Item(2), NodeType::Waste]
        );
        assert_eq!(t.objective(&inst), t.waste_leaf_area());
    }
}
