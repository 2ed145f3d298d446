//! The global algorithm: DPA* for instances with at most two chains, otherwise a
//! portfolio of restarting MBA* workers sharing one incumbent.

use std::sync::atomic::Ordering;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::branching::BranchingConfig;
use crate::model::Instance;
use crate::node::GuideKind;
use crate::search::{
    astar, dpa_star, iterative_beam_search, mba_star, restarting_mba_star, Growth, Incumbent, Limits, SearchConfig,
    Status,
};
use crate::tree::{build_from_insertions, SolutionTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Algorithm {
    /// DPA* when there are at most two chains, the MBA* portfolio otherwise.
    #[default]
    Auto,
    MbaStar,
    AStar,
    Ibs,
    DpaStar,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Auto => "auto",
            Algorithm::MbaStar => "mbastar",
            Algorithm::AStar => "astar",
            Algorithm::Ibs => "ibs",
            Algorithm::DpaStar => "dpastar",
        }
    }

    pub fn from_name(s: &str) -> Option<Algorithm> {
        [Algorithm::Auto, Algorithm::MbaStar, Algorithm::AStar, Algorithm::Ibs, Algorithm::DpaStar]
            .into_iter()
            .find(|a| a.name() == s)
    }
}

/// One portfolio entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Worker {
    pub guide: GuideKind,
    pub growth: Growth,
}

/// `(p, 1.33), (p, 1.5), (a, 1.33), (a, 1.5)`.
pub fn default_portfolio() -> Vec<Worker> {
    let g133 = Growth::new(133, 100).unwrap();
    let g150 = Growth::new(3, 2).unwrap();
    vec![
        Worker { guide: GuideKind::WastePercentage, growth: g133 },
        Worker { guide: GuideKind::WastePercentage, growth: g150 },
        Worker { guide: GuideKind::WastePercentageOverMeanItemArea, growth: g133 },
        Worker { guide: GuideKind::WastePercentageOverMeanItemArea, growth: g150 },
    ]
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub time_limit: Duration,
    pub threads: usize,
    /// Overrides the guide of every worker.
    pub guide: Option<GuideKind>,
    /// Overrides the growth factor of every worker.
    pub growth: Option<Growth>,
    pub queue_size_init: usize,
    pub symmetry: bool,
    pub algorithm: Algorithm,
    /// Stay alive until the time limit even after an early proof.
    pub challenge_compat: bool,
    /// Largest number of stored nodes for A* and DPA*.
    pub node_cap: Option<usize>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            time_limit: Duration::from_secs(180),
            threads: 4,
            guide: None,
            growth: None,
            queue_size_init: 2,
            symmetry: true,
            algorithm: Algorithm::Auto,
            challenge_compat: false,
            node_cap: Some(default_node_cap()),
        }
    }
}

impl SolveOptions {
    pub fn workers(&self) -> Vec<Worker> {
        default_portfolio()
            .into_iter()
            .cycle()
            .take(self.threads.max(1))
            .map(|w| Worker { guide: self.guide.unwrap_or(w.guide), growth: self.growth.unwrap_or(w.growth) })
            .collect()
    }

    fn branching(&self) -> BranchingConfig {
        BranchingConfig { symmetry: self.symmetry, ..BranchingConfig::default() }
    }
}

/// Rough per-node footprint used to turn available memory into a node budget.
const BYTES_PER_NODE: u64 = 512;

/// Half of `MemAvailable` divided by the per-node footprint; 20 million nodes if unknown.
pub fn default_node_cap() -> usize {
    let available_kb = std::fs::read_to_string("/proc/meminfo").ok().and_then(|s| {
        s.lines()
            .find(|l| l.starts_with("MemAvailable:"))
            .and_then(|l| l.split_whitespace().nth(1))
            .and_then(|v| v.parse::<u64>().ok())
    });
    match available_kb {
        Some(kb) => ((kb * 1024 / 2) / BYTES_PER_NODE).max(10_000) as usize,
        None => 20_000_000,
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("instance has no items")]
    NoItems,
    #[error("no feasible solution found within the time limit")]
    NoSolution,
    #[error("solution replay failed: {0}")]
    Replay(#[from] crate::tree::TreeError),
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub instance: String,
    pub waste: i64,
    pub time_to_best: Duration,
    pub tree: SolutionTree,
    /// The search space (scheme plus pruning rules) was fully explored.
    pub proved: bool,
    pub source: String,
    pub elapsed: Duration,
}

impl SolveReport {
    /// `<instance>,<waste>,<time_to_best_s>`.
    pub fn summary_line(&self) -> String {
        format!("{},{},{:.3}", self.instance, self.waste, self.time_to_best.as_secs_f64())
    }
}

fn run_portfolio(instance: &Instance, opts: &SolveOptions, limits: &Limits, incumbent: &Incumbent, ibs: bool) -> bool {
    let workers = opts.workers();
    let branching = opts.branching();
    std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .iter()
            .map(|w| {
                let cfg = SearchConfig { guide: w.guide, branching, bound_pruning: true };
                let growth = w.growth;
                let init = opts.queue_size_init;
                scope.spawn(move || {
                    let out = if ibs {
                        iterative_beam_search(instance, &cfg, limits, incumbent)
                    } else {
                        restarting_mba_star(instance, &cfg, init, growth, limits, incumbent)
                    };
                    if out.proved() {
                        limits.stop.store(true, Ordering::Relaxed);
                    }
                    out.proved()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("search worker panicked")).fold(false, |a, b| a | b)
    })
}

/// DPA* after a short greedy pass. Returns `Some(proved)` or `None` when the portfolio must take over.
fn run_dpa(instance: &Instance, opts: &SolveOptions, limits: &Limits, incumbent: &Incumbent) -> Option<bool> {
    let seed_cfg = SearchConfig { guide: GuideKind::WastePercentage, branching: opts.branching(), bound_pruning: true };
    let seed_limits = Limits {
        deadline: Some(limits.deadline.map_or(Instant::now() + opts.time_limit / 20, |d| {
            d.min(Instant::now() + opts.time_limit / 20)
        })),
        stop: limits.stop.clone(),
        node_cap: None,
    };
    let greedy = mba_star(instance, &seed_cfg, Some(1), &seed_limits, incumbent, None);
    log::debug!("greedy seed: {:?}, best {}", greedy.status, incumbent.waste());
    let cfg = SearchConfig { guide: GuideKind::Waste, ..seed_cfg };
    match dpa_star(instance, &cfg, limits, incumbent) {
        Ok(out) if out.status == Status::Exhausted => Some(true),
        Ok(out) if out.status == Status::MemoryCap => {
            log::warn!("DPA* reached the node cap; switching to the MBA* portfolio");
            None
        }
        Ok(_) if incumbent.has_solution() => Some(false),
        Ok(_) => None,
        Err(e) => {
            log::warn!("{e}; switching to the MBA* portfolio");
            None
        }
    }
}

pub fn solve(instance: &Instance, opts: &SolveOptions) -> Result<SolveReport, SolveError> {
    if instance.item_count() == 0 {
        return Err(SolveError::NoItems);
    }
    let start = Instant::now();
    let limits = Limits { deadline: Some(start + opts.time_limit), node_cap: opts.node_cap, ..Limits::default() };
    let incumbent = Incumbent::starting_at(start);

    let proved = match opts.algorithm {
        Algorithm::Auto if instance.chain_count() <= 2 => match run_dpa(instance, opts, &limits, &incumbent) {
            Some(p) => p,
            None => run_portfolio(instance, opts, &limits, &incumbent, false),
        },
        Algorithm::DpaStar => match run_dpa(instance, opts, &limits, &incumbent) {
            Some(p) => p,
            None => run_portfolio(instance, opts, &limits, &incumbent, false),
        },
        Algorithm::Auto | Algorithm::MbaStar => run_portfolio(instance, opts, &limits, &incumbent, false),
        Algorithm::Ibs => run_portfolio(instance, opts, &limits, &incumbent, true),
        Algorithm::AStar => {
            let cfg = SearchConfig {
                guide: opts.guide.unwrap_or(GuideKind::Waste),
                branching: opts.branching(),
                bound_pruning: true,
            };
            let out = astar(instance, &cfg, &limits, &incumbent);
            if out.status == Status::MemoryCap {
                log::warn!("A* reached the node cap of {:?} nodes", opts.node_cap);
            }
            out.proved()
        }
    };

    if opts.challenge_compat {
        if let Some(d) = limits.deadline {
            std::thread::sleep(d.saturating_duration_since(Instant::now()));
        }
    }
    let best = incumbent.best().ok_or(SolveError::NoSolution)?;
    let tree = build_from_insertions(&best.insertions, instance)?;
    Ok(SolveReport {
        instance: instance.name.clone(),
        waste: best.waste,
        time_to_best: best.found_after,
        tree,
        proved,
        source: best.source,
        elapsed: start.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn portfolio_order() {
        let ws = SolveOptions { threads: 4, ..SolveOptions::default() }.workers();
        let desc: Vec<(char, String)> = ws.iter().map(|w| (w.guide.letter(), w.growth.to_string())).collect();
        assert_eq!(
            desc,
            vec![('p', "1.33".into()), ('p', "1.5".into()), ('a', "1.33".into()), ('a', "1.5".into())]
        );
        let one = SolveOptions {
            threads: 1,
            guide: Some(GuideKind::Waste),
            growth: Some("2".parse().unwrap()),
            ..SolveOptions::default()
        }
        .workers();
        assert_eq!(one, vec![Worker { guide: GuideKind::Waste, growth: "2".parse().unwrap() }]);
    }

    #[test]
    fn algorithm_names() {
        for a in [Algorithm::Auto, Algorithm::MbaStar, Algorithm::AStar, Algorithm::Ibs, Algorithm::DpaStar] {
            assert_eq!(Algorithm::from_name(a.name()), Some(a));
        }
    }

    #[test]
    fn node_cap_is_positive() {
        assert!(default_node_cap() >= 10_000);
    }
}
