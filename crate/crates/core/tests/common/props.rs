//! Invariant checks driven by a single seed, shared by the proptest suites and the acceptance run.

use std::cmp::Ordering;
use std::rc::Rc;
use std::sync::Arc;

use glasscut::branching::{children, BranchingConfig};
use glasscut::io::{parse_batch_str, parse_defects_str, parse_solution_str, solution_to_string};
use glasscut::model::{Area, Instance, Length};
use glasscut::node::{front_leq, Front, GuideKind, Node};
use glasscut::search::{mba_star, Incumbent, Limits, SearchConfig};
use glasscut::tree::build_from_insertions;
use glasscut::validator::{validate, validate_with, Mode};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_instance, Gen};

pub type Check = Result<(), String>;
pub type CheckFn = fn(u64) -> Check;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn tiny(seed: u64) -> (ChaCha8Rng, Instance) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_instance(&mut rng, Gen::tiny());
    (rng, inst)
}

/// Root-to-leaf walk choosing uniformly among children; stops at a complete node or a dead end.
pub fn random_walk(rng: &mut ChaCha8Rng, inst: &Instance, cfg: &BranchingConfig) -> Vec<Rc<Node>> {
    let mut path = vec![Rc::new(Node::root(inst))];
    loop {
        let last = path.last().unwrap().clone();
        if last.complete {
            return path;
        }
        let kids = children(&last, inst, cfg);
        let Some(next) = kids.choose(rng) else { return path };
        path.push(Rc::new(next.clone()));
    }
}

/// `X(y)`, restated from the front definition.
fn boundary(f: &Front, y: Length) -> Length {
    match y {
        y if y < f.y2_prev => f.x1_curr,
        y if y < f.y2_curr => f.x3_curr,
        _ => f.x1_prev,
    }
}

fn random_front(rng: &mut ChaCha8Rng, w: Length, h: Length) -> Front {
    // small coordinate sets make equal breakpoints and ties frequent
    let mut xs: Vec<Length> = (0..3).map(|_| rng.gen_range(0..=4) * w / 4).collect();
    xs.sort();
    let mut ys: Vec<Length> = (0..2).map(|_| rng.gen_range(0..=4) * h / 4).collect();
    ys.sort();
    Front { bin_index: 0, x1_prev: xs[0], x3_curr: xs[1], x1_curr: xs[2], y2_prev: ys[0], y2_curr: ys[1] }
}

pub fn waste_monotone(seed: u64) -> Check {
    let (mut rng, inst) = tiny(seed);
    let path = random_walk(&mut rng, &inst, &BranchingConfig::default());
    for pair in path.windows(2) {
        ensure!(pair[0].waste() >= 0, "negative waste {}", pair[0].waste());
        ensure!(pair[1].waste() >= pair[0].waste(), "waste fell {} -> {}", pair[0].waste(), pair[1].waste());
    }
    Ok(())
}

pub fn front_partial_order(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (6000, 3210);
    let [a, b, c] = [0; 3].map(|_| random_front(&mut rng, w, h));
    let leq = |x: &Front, y: &Front| front_leq(x, y, h).unwrap();
    let rows_leq = |x: &Front, y: &Front| (0..h).all(|r| boundary(x, r) <= boundary(y, r));
    ensure!(leq(&a, &a), "not reflexive: {a:?}");
    ensure!(leq(&a, &b) == rows_leq(&a, &b), "disagrees with rows: {a:?} {b:?}");
    if leq(&a, &b) && leq(&b, &a) {
        ensure!((0..h).all(|r| boundary(&a, r) == boundary(&b, r)), "not antisymmetric: {a:?} {b:?}");
    }
    if leq(&a, &b) && leq(&b, &c) {
        ensure!(leq(&a, &c), "not transitive: {a:?} {b:?} {c:?}");
    }
    ensure!(front_leq(&a, &Front { bin_index: 1, ..b }, h).is_err(), "compared fronts of different bins");
    Ok(())
}

pub fn incumbent_monotone(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let offers: Vec<Vec<Area>> =
        (0..3).map(|_| (0..rng.gen_range(1..8)).map(|_| rng.gen_range(0..50)).collect()).collect();
    let inc = Arc::new(Incumbent::new());
    let seen: Vec<Vec<Area>> = std::thread::scope(|s| {
        let hs: Vec<_> = offers
            .iter()
            .map(|list| {
                let inc = inc.clone();
                s.spawn(move || {
                    list.iter()
                        .map(|&w| {
                            inc.offer(w, Vec::new, "t");
                            inc.waste()
                        })
                        .collect()
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    // every thread samples a non-increasing incumbent
    for samples in &seen {
        ensure!(samples.windows(2).all(|p| p[1] <= p[0]), "sampled waste rose: {samples:?}");
    }
    let hist = inc.history();
    ensure!(hist.windows(2).all(|p| p[1].1 < p[0].1 && p[1].0 >= p[0].0), "history not improving: {hist:?}");
    let best = offers.iter().flatten().min().copied().unwrap();
    ensure!(inc.waste() == best, "kept {} instead of {best}", inc.waste());
    ensure!(hist.last().map(|h| h.1) == Some(best), "history ends at {:?}", hist.last());
    Ok(())
}

/// `a` strictly precedes `b` by guide, then by packed items (more first).
fn greedy_before(a: &Node, b: &Node, guide: GuideKind) -> bool {
    let ratio = |n: &Node| -> (u128, u128) {
        let (w, area) = (n.waste() as u128, n.area() as u128);
        match guide {
            GuideKind::Waste => (w, 1),
            _ if area == 0 => (0, 1),
            GuideKind::WastePercentage => (w, area),
            GuideKind::WastePercentageOverMeanItemArea if n.items_packed == 0 => (0, 1),
            GuideKind::WastePercentageOverMeanItemArea => (w * n.items_packed as u128, area * n.item_area as u128),
        }
    };
    let ((an, ad), (bn, bd)) = (ratio(a), ratio(b));
    match (an * bd).cmp(&(bn * ad)) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a.items_packed > b.items_packed,
    }
}

/// MBA* with D=1 expands exactly the nodes of a descent that always takes the best open child.
pub fn greedy_trace(seed: u64) -> Check {
    let (_, inst) = tiny(seed);
    let guide = [GuideKind::Waste, GuideKind::WastePercentage, GuideKind::WastePercentageOverMeanItemArea]
        [(seed % 3) as usize];
    let cfg = SearchConfig { guide, branching: BranchingConfig::default(), bound_pruning: false };
    let mut trace = Vec::new();
    mba_star(&inst, &cfg, Some(1), &Limits::unlimited(), &Incumbent::new(), Some(&mut trace));

    let mut expected = vec![Rc::new(Node::root(&inst))];
    loop {
        let kids = children(expected.last().unwrap(), &inst, &cfg.branching);
        let mut best: Option<&Node> = None;
        for k in kids.iter().filter(|k| !k.complete) {
            if best.is_none_or(|b| greedy_before(k, b, guide)) {
                best = Some(k);
            }
        }
        match best {
            Some(b) => expected.push(Rc::new(b.clone())),
            None => break,
        }
    }
    ensure!(trace.len() == expected.len(), "trace has {} nodes, descent {}", trace.len(), expected.len());
    for (k, (t, e)) in trace.iter().zip(&expected).enumerate() {
        ensure!(t.insertions() == e.insertions(), "step {k} differs");
    }
    Ok(())
}

pub fn input_files_round_trip(seed: u64) -> Check {
    let (_, inst) = tiny(seed);
    let mut batch = String::from("ITEM_ID;LENGTH_ITEM;WIDTH_ITEM;STACK;SEQUENCE\n");
    for it in &inst.items {
        // files give the longer side first
        let (l, w) = (it.width.max(it.height), it.width.min(it.height));
        batch.push_str(&format!("{};{};{};{};{}\n", it.id, l, w, it.chain_id, it.chain_rank + 1));
    }
    let items = parse_batch_str(&batch).map_err(|e| e.to_string())?;
    ensure!(items.len() == inst.items.len(), "{} items read back", items.len());
    for (a, b) in items.iter().zip(&inst.items) {
        ensure!((a.id, a.chain_id) == (b.id, b.chain_id) && a.same_shape(b), "{a:?} != {b:?}");
    }
    let mut defects = String::from("DEFECT_ID;PLATE_ID;X;Y;WIDTH;HEIGHT\n");
    let all: Vec<_> = inst.defects.iter().flatten().collect();
    for d in &all {
        defects.push_str(&format!("{};{};{}.0;{};{};{}\n", d.id, d.plate_index, d.x, d.y, d.width, d.height));
    }
    let parsed = parse_defects_str(&defects).map_err(|e| e.to_string())?;
    ensure!(parsed.len() == all.len(), "{} defects read back", parsed.len());
    for (a, b) in parsed.iter().zip(all) {
        ensure!(a == b, "{a:?} != {b:?}");
    }
    Ok(())
}

pub fn solution_round_trip(seed: u64) -> Check {
    let (mut rng, inst) = tiny(seed);
    let path = random_walk(&mut rng, &inst, &BranchingConfig::default());
    let tree = build_from_insertions(&path.last().unwrap().insertions(), &inst).map_err(|e| e.to_string())?;
    let text = solution_to_string(&tree);
    let back = parse_solution_str(&text).map_err(|e| e.to_string())?;
    ensure!(back == tree, "read(write(tree)) differs");
    ensure!(solution_to_string(&back) == text, "write(read(text)) differs");
    Ok(())
}

/// Committed area minus item area, counted cell by cell; `None` if items overlap or leave the region.
fn raster_waste(node: &Node, inst: &Instance) -> Option<Area> {
    let (w, h) = (inst.params.plate_width, inst.params.plate_height);
    if node.bins == 0 {
        return Some(0);
    }
    let last = node.bins - 1;
    let mut grids = vec![vec![false; (w * h) as usize]; node.bins];
    let mut bin = usize::MAX;
    for ins in node.insertions() {
        if ins.new_bin() {
            bin = bin.wrapping_add(1);
        }
        for p in &ins.items {
            for y in p.rect.y..p.rect.top() {
                for x in p.rect.x..p.rect.right() {
                    if x >= w || y >= h {
                        return None;
                    }
                    let cell = &mut grids[bin][(y * w + x) as usize];
                    if *cell {
                        return None;
                    }
                    *cell = true;
                }
            }
        }
    }
    let f = &node.front;
    let mut waste = 0;
    for (b, grid) in grids.iter().enumerate() {
        for y in 0..h {
            let limit = match b {
                b if b < last => w,
                _ if node.complete => f.x1_curr,
                _ => boundary(f, y),
            };
            for x in 0..w {
                let used = grid[(y * w + x) as usize];
                if x < limit {
                    waste += Area::from(!used);
                } else if used {
                    return None;
                }
            }
        }
    }
    Some(waste)
}

pub fn raster_area(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gen = Gen { width: (170, 200), height: (50, 100), ..Gen::tiny() };
    let inst = random_instance(&mut rng, gen);
    let path = random_walk(&mut rng, &inst, &BranchingConfig::default());
    for node in &path {
        let r = raster_waste(node, &inst);
        ensure!(r == Some(node.waste()), "raster {r:?} vs waste {}: {:?}", node.waste(), node.insertions());
    }
    Ok(())
}

pub fn partial_feasibility(seed: u64) -> Check {
    let (mut rng, inst) = tiny(seed);
    let path = random_walk(&mut rng, &inst, &BranchingConfig::default());
    for node in path.iter().skip(1) {
        let tree = build_from_insertions(&node.insertions(), &inst).map_err(|e| e.to_string())?;
        let mode = if node.complete { Mode::Complete } else { Mode::Partial };
        let report = validate_with(&inst, &tree, mode);
        ensure!(report.is_feasible(), "{report:?}\n{:?}", node.insertions());
        if node.complete {
            ensure!(validate(&inst, &tree).is_feasible(), "complete tree rejected");
            ensure!(tree.objective(&inst) == node.waste(), "objective {} vs waste {}", tree.objective(&inst), node.waste());
            ensure!(tree.waste_leaf_area() == node.waste(), "waste leaves {} vs {}", tree.waste_leaf_area(), node.waste());
        }
    }
    Ok(())
}

/// With sibling dominance off, symmetry only removes children; child lists are reproducible.
pub fn symmetry_subset(seed: u64) -> Check {
    let (mut rng, inst) = tiny(seed);
    let sym = BranchingConfig { dominance: false, ..BranchingConfig::default() };
    let nosym = BranchingConfig { symmetry: false, ..sym };
    let path = random_walk(&mut rng, &inst, &sym);
    for node in path.iter().filter(|n| !n.complete) {
        let list = |cfg: &BranchingConfig| -> Vec<_> {
            children(node, &inst, cfg).into_iter().map(|c| c.insertion).collect()
        };
        let (with, without) = (list(&sym), list(&nosym));
        for c in &with {
            ensure!(without.contains(c), "only with symmetry: {c:?}");
        }
        ensure!(with == list(&sym), "child list not reproducible");
    }
    Ok(())
}
