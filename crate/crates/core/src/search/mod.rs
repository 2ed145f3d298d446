//! Tree searches over the branching scheme.
//!
//! Every search shares an [`Incumbent`]; complete nodes are published as soon as they
//! are generated, so all searches are anytime.

mod dpastar;
mod fringe;
mod guide;
mod ibs;
mod incumbent;

use std::rc::Rc;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::branching::{children, BranchingConfig};
use crate::model::Instance;
use crate::node::{GuideKind, Node};

pub use dpastar::{dpa_star, DominanceStore};
pub use fringe::{Fringe, FringeKey};
pub use guide::{guide_value, GuideValue};
pub use ibs::iterative_beam_search;
pub use incumbent::{Incumbent, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub guide: GuideKind,
    pub branching: BranchingConfig,
    /// Drop nodes whose waste is not below the incumbent's.
    pub bound_pruning: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { guide: GuideKind::WastePercentage, branching: BranchingConfig::default(), bound_pruning: true }
    }
}

/// When to stop: a wall-clock deadline, an external stop flag and a cap on stored nodes.
#[derive(Debug, Clone, Default)]
pub struct Limits {
    pub deadline: Option<Instant>,
    pub stop: Arc<AtomicBool>,
    /// Largest fringe (or dominance store) size before giving up with [`Status::MemoryCap`].
    pub node_cap: Option<usize>,
}

impl Limits {
    pub fn unlimited() -> Limits {
        Limits::default()
    }

    pub fn with_time(limit: Duration) -> Limits {
        Limits { deadline: Some(Instant::now() + limit), ..Limits::default() }
    }

    pub fn expired(&self) -> bool {
        self.stop.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn over_cap(&self, size: usize) -> bool {
        self.node_cap.is_some_and(|c| size > c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// The fringe emptied.
    Exhausted,
    Timeout,
    MemoryCap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outcome {
    pub status: Status,
    /// Some node was dropped by the fringe size limit (or beam width).
    pub discarded: bool,
    pub expanded: u64,
}

impl Outcome {
    /// The whole tree (up to bound pruning) was explored.
    pub fn proved(&self) -> bool {
        self.status == Status::Exhausted && !self.discarded
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("DPA* needs at most 2 chains, instance has {0}")]
    ChainCount(usize),
}

/// Exact positive growth factor of the restart loop, e.g. `1.33` = 133/100.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Growth {
    num: u64,
    den: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("growth factor must be a decimal number greater than 1, got `{0}`")]
pub struct BadGrowth(String);

impl Growth {
    pub fn new(num: u64, den: u64) -> Result<Growth, BadGrowth> {
        if den == 0 || num <= den {
            return Err(BadGrowth(format!("{num}/{den}")));
        }
        Ok(Growth { num, den })
    }

    /// `max(d + 1, ceil(d · growth))`.
    pub fn next(&self, d: usize) -> usize {
        let scaled = (d as u128 * self.num as u128).div_ceil(self.den as u128);
        (d + 1).max(scaled.min(usize::MAX as u128) as usize)
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl FromStr for Growth {
    type Err = BadGrowth;

    fn from_str(s: &str) -> Result<Growth, BadGrowth> {
        let bad = || BadGrowth(s.to_string());
        let (int, frac) = s.trim().split_once('.').unwrap_or((s.trim(), ""));
        if int.is_empty() || !int.bytes().all(|b| b.is_ascii_digit()) || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 9 {
            return Err(bad());
        }
        let den = 10u64.pow(frac.len() as u32);
        let num = format!("{int}{frac}").parse::<u64>().map_err(|_| bad())?;
        Growth::new(num, den).map_err(|_| bad())
    }
}

impl std::fmt::Display for Growth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_f64())
    }
}

/// Publishes `node` if complete; returns whether it was complete.
fn publish(node: &Node, incumbent: &Incumbent, source: &str) -> bool {
    if node.complete {
        incumbent.offer(node.waste(), || node.insertions(), source);
        true
    } else {
        false
    }
}

/// Memory Bounded A*: best-first, keeping at most `capacity` open nodes (`None` = unbounded).
///
/// `trace` receives every expanded node in order.
pub fn mba_star(
    instance: &Instance,
    config: &SearchConfig,
    capacity: Option<usize>,
    limits: &Limits,
    incumbent: &Incumbent,
    mut trace: Option<&mut Vec<Rc<Node>>>,
) -> Outcome {
    let label = match capacity {
        Some(d) => format!("MBA*({}, D={d})", config.guide.letter()),
        None => format!("A*({})", config.guide.letter()),
    };
    let mut out = Outcome { status: Status::Exhausted, discarded: false, expanded: 0 };
    let root = Rc::new(Node::root(instance));
    if publish(&root, incumbent, &label) {
        return out;
    }
    let mut fringe: Fringe<Rc<Node>> = Fringe::new();
    fringe.insert(guide_value(&root, config.guide), 0, root);
    while let Some((_, node)) = fringe.pop_best() {
        if limits.expired() {
            out.status = Status::Timeout;
            return out;
        }
        if config.bound_pruning && node.waste() >= incumbent.waste() {
            continue;
        }
        out.expanded += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(node.clone());
        }
        for child in children(&node, instance, &config.branching) {
            if publish(&child, incumbent, &label) {
                continue;
            }
            if config.bound_pruning && child.waste() >= incumbent.waste() {
                continue;
            }
            let g = guide_value(&child, config.guide);
            let items = child.items_packed;
            fringe.insert(g, items, Rc::new(child));
        }
        if let Some(d) = capacity {
            while fringe.len() > d.max(1) {
                fringe.pop_worst();
                out.discarded = true;
            }
        }
        if limits.over_cap(fringe.len()) {
            out.status = Status::MemoryCap;
            return out;
        }
    }
    out
}

/// Plain A*: MBA* without a fringe bound.
pub fn astar(instance: &Instance, config: &SearchConfig, limits: &Limits, incumbent: &Incumbent) -> Outcome {
    mba_star(instance, config, None, limits, incumbent, None)
}

/// Fringe sizes visited by [`restarting_mba_star`], starting from `initial`.
pub fn capacity_schedule(initial: usize, growth: Growth) -> impl Iterator<Item = usize> {
    std::iter::successors(Some(initial.max(1)), move |&d| Some(growth.next(d)))
}

/// MBA* restarted with a growing fringe bound until a run explores everything or time is out.
pub fn restarting_mba_star(
    instance: &Instance,
    config: &SearchConfig,
    initial: usize,
    growth: Growth,
    limits: &Limits,
    incumbent: &Incumbent,
) -> Outcome {
    let mut total = Outcome { status: Status::Timeout, discarded: true, expanded: 0 };
    for d in capacity_schedule(initial, growth) {
        if limits.expired() {
            total.status = Status::Timeout;
            return total;
        }
        let run = mba_star(instance, config, Some(d), limits, incumbent, None);
        log::debug!("MBA*({}, D={d}) finished: {:?}, best {}", config.guide.letter(), run.status, incumbent.waste());
        total.expanded += run.expanded;
        total.status = run.status;
        total.discarded = run.discarded;
        if run.status != Status::Exhausted || run.proved() {
            return total;
        }
    }
    total
}
