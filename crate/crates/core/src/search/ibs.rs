//! Iterative Beam Search: level-by-level beams of doubling width.

use std::rc::Rc;

use super::{guide_value, publish, Fringe, Incumbent, Limits, Outcome, SearchConfig, Status};
use crate::branching::children;
use crate::model::Instance;
use crate::node::Node;

/// One beam pass of width `width`.
pub fn beam_search(
    instance: &Instance,
    config: &SearchConfig,
    width: usize,
    limits: &Limits,
    incumbent: &Incumbent,
) -> Outcome {
    let label = format!("IBS({}, B={width})", config.guide.letter());
    let mut out = Outcome { status: Status::Exhausted, discarded: false, expanded: 0 };
    let root = Rc::new(Node::root(instance));
    if publish(&root, incumbent, &label) {
        return out;
    }
    let mut level = vec![root];
    while !level.is_empty() {
        let mut next: Fringe<Rc<Node>> = Fringe::new();
        for node in &level {
            if limits.expired() {
                out.status = Status::Timeout;
                return out;
            }
            if config.bound_pruning && node.waste() >= incumbent.waste() {
                continue;
            }
            out.expanded += 1;
            for child in children(node, instance, &config.branching) {
                if publish(&child, incumbent, &label) {
                    continue;
                }
                if config.bound_pruning && child.waste() >= incumbent.waste() {
                    continue;
                }
                let g = guide_value(&child, config.guide);
                let items = child.items_packed;
                next.insert(g, items, Rc::new(child));
            }
        }
        if next.len() > width {
            out.discarded = true;
        }
        level = std::iter::from_fn(|| next.pop_best().map(|(_, n)| n)).take(width.max(1)).collect();
    }
    out
}

/// Beam search with widths 2, 4, 8, ... until a pass keeps every node or time is out.
pub fn iterative_beam_search(
    instance: &Instance,
    config: &SearchConfig,
    limits: &Limits,
    incumbent: &Incumbent,
) -> Outcome {
    let mut width = 2usize;
    let mut total = Outcome { status: Status::Timeout, discarded: true, expanded: 0 };
    loop {
        if limits.expired() {
            total.status = Status::Timeout;
            return total;
        }
        let run = beam_search(instance, config, width, limits, incumbent);
        total.expanded += run.expanded;
        total.status = run.status;
        total.discarded = run.discarded;
        if run.status != Status::Exhausted || run.proved() {
            return total;
        }
        width = width.saturating_mul(2);
    }
}
