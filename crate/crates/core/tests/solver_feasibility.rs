mod common;

use std::time::Duration;

use glasscut::branching::BranchingConfig;
use glasscut::node::GuideKind;
use glasscut::search::{mba_star, restarting_mba_star, Incumbent, Limits, SearchConfig};
use glasscut::tree::build_from_insertions;
use glasscut::validator::validate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_instance, Gen};

fn check(gen: Gen, seeds: std::ops::Range<u64>, capacity: Option<usize>, symmetry: bool, budget: Duration) {
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, gen);
        let cfg = SearchConfig {
            guide: GuideKind::WastePercentage,
            branching: BranchingConfig { symmetry, ..BranchingConfig::default() },
            bound_pruning: true,
        };
        let inc = Incumbent::new();
        let limits = Limits::with_time(budget);
        match capacity {
            // A greedy descent may end in a node without children; restarts widen the fringe.
            Some(d) => restarting_mba_star(&inst, &cfg, d, "2".parse().unwrap(), &limits, &inc),
            None => mba_star(&inst, &cfg, None, &limits, &inc, None),
        };
        let best = inc.best().unwrap_or_else(|| panic!("seed {seed}: no solution for {inst:?}"));
        let tree = build_from_insertions(&best.insertions, &inst).unwrap();
        let rep = validate(&inst, &tree);
        assert!(rep.is_feasible(), "seed {seed}: {:#?}\n{inst:#?}\n{:#?}", rep.violations, best.insertions);
        assert_eq!(tree.objective(&inst), best.waste, "seed {seed}: objective vs search waste");
        assert_eq!(tree.waste_leaf_area(), best.waste, "seed {seed}: leaf sum vs search waste");
    }
}

#[test]
fn tiny_instances_astar() {
    check(Gen::tiny(), 0..300, None, true, Duration::from_secs(5));
}

#[test]
fn tiny_instances_restarting_no_symmetry() {
    check(Gen::tiny(), 300..600, Some(1), false, Duration::from_secs(5));
}

#[test]
fn full_size_instances_with_defects() {
    let g = Gen { defects: 8, ..Gen::full_size(25, 4, 8) };
    check(g, 1000..1020, Some(2), true, Duration::from_millis(400));
}
