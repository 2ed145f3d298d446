#![allow(dead_code)]

use glasscut::model::{Defect, Instance, Item, Length, Params, Rect};
use rand::Rng;

pub mod props;

/// Shape of generated instances.
#[derive(Debug, Clone, Copy)]
pub struct Gen {
    pub items: (usize, usize),
    pub chains: usize,
    pub defects: usize,
    pub width: (Length, Length),
    pub height: (Length, Length),
    pub plates: usize,
}

impl Gen {
    /// Small plates, at most 6 items in at most 2 chains, up to 2 defects.
    pub fn tiny() -> Gen {
        Gen { items: (1, 6), chains: 2, defects: 2, width: (300, 1000), height: (200, 600), plates: 4 }
    }

    pub fn full_size(items: usize, chains: usize, defects: usize) -> Gen {
        Gen { items: (items, items), chains, defects, width: (6000, 6000), height: (3210, 3210), plates: 100 }
    }
}

pub fn random_instance<R: Rng>(rng: &mut R, g: Gen) -> Instance {
    let width = rng.gen_range(g.width.0..=g.width.1);
    let height = rng.gen_range(g.height.0..=g.height.1);
    let max1 = if width >= 6000 { 3500 } else { rng.gen_range((width * 6 / 10).max(100)..=width) };
    let params = Params {
        plate_width: width,
        plate_height: height,
        plate_count: g.plates,
        min1: 100.min(max1),
        max1,
        min2: 100.min(height),
        min_waste: 20,
    };
    let n = rng.gen_range(g.items.0..=g.items.1);
    let chains = rng.gen_range(1..=g.chains.max(1));
    let mut ranks = vec![0usize; chains];
    let items: Vec<Item> = (0..n)
        .map(|id| {
            let c = rng.gen_range(0..chains);
            ranks[c] += 1;
            let w = rng.gen_range(20..=(max1 / 2).max(20));
            let h = rng.gen_range(20..=(height / 2).max(20));
            Item { id, width: w, height: h, chain_id: c, chain_rank: ranks[c] }
        })
        .collect();
    let mut defects: Vec<Defect> = Vec::new();
    let count = rng.gen_range(0..=g.defects);
    let mut attempts = 0;
    while defects.len() < count && attempts < 100 {
        attempts += 1;
        let plate = rng.gen_range(0..2.min(g.plates));
        let dw = rng.gen_range(2..=(width / 10).clamp(3, 80));
        let dh = rng.gen_range(2..=(height / 10).clamp(3, 80));
        let d = Defect {
            id: defects.len(),
            plate_index: plate,
            x: rng.gen_range(0..width - dw),
            y: rng.gen_range(0..height - dh),
            width: dw,
            height: dh,
        };
        if defects.iter().any(|e| e.plate_index == plate && e.rect().overlaps(&d.rect())) {
            continue;
        }
        defects.push(d);
    }
    Instance::new("random", params, items, defects).expect("generated instance is valid")
}

pub fn plate_rect(i: &Instance) -> Rect {
    Rect::new(0, 0, i.params.plate_width, i.params.plate_height)
}

/// Minimal waste over all complete leaves reachable by plain recursion over `children`,
/// with the number of nodes visited. `None` if no leaf is reachable.
pub fn dfs_min_waste(instance: &Instance, cfg: &glasscut::branching::BranchingConfig) -> (Option<i64>, u64) {
    use glasscut::node::Node;
    use std::rc::Rc;

    fn go(n: Rc<Node>, i: &Instance, cfg: &glasscut::branching::BranchingConfig, best: &mut Option<i64>, seen: &mut u64) {
        *seen += 1;
        if n.complete {
            *best = Some(best.map_or(n.waste(), |b| b.min(n.waste())));
            return;
        }
        for c in glasscut::branching::children(&n, i, cfg) {
            go(Rc::new(c), i, cfg, best, seen);
        }
    }

    let (mut best, mut seen) = (None, 0);
    go(Rc::new(Node::root(instance)), instance, cfg, &mut best, &mut seen);
    (best, seen)
}
