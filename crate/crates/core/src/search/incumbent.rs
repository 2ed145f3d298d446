//! Best solution found so far, shared by all workers.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::branching::Insertion;
use crate::model::Area;

#[derive(Debug, Clone)]
pub struct Solution {
    pub waste: Area,
    pub insertions: Vec<Insertion>,
    /// Time since the incumbent was created.
    pub found_after: Duration,
    pub source: String,
}

/// Publish-if-better store. The waste is also mirrored in an atomic for cheap bound checks.
#[derive(Debug)]
pub struct Incumbent {
    waste: AtomicI64,
    best: Mutex<Option<Solution>>,
    history: Mutex<Vec<(Duration, Area)>>,
    start: Instant,
}

impl Default for Incumbent {
    fn default() -> Self {
        Incumbent::new()
    }
}

impl Incumbent {
    pub fn new() -> Incumbent {
        Incumbent::starting_at(Instant::now())
    }

    pub fn starting_at(start: Instant) -> Incumbent {
        Incumbent { waste: AtomicI64::new(Area::MAX), best: Mutex::new(None), history: Mutex::new(Vec::new()), start }
    }

    /// Waste of the best solution, `Area::MAX` if none.
    pub fn waste(&self) -> Area {
        self.waste.load(Ordering::Acquire)
    }

    pub fn has_solution(&self) -> bool {
        self.waste() != Area::MAX
    }

    /// Stores the solution if it is strictly better; returns whether it was stored.
    pub fn offer(&self, waste: Area, insertions: impl FnOnce() -> Vec<Insertion>, source: &str) -> bool {
        if waste >= self.waste() {
            return false;
        }
        let mut best = self.best.lock().unwrap();
        if best.as_ref().is_some_and(|b| b.waste <= waste) {
            return false;
        }
        let found_after = self.start.elapsed();
        *best = Some(Solution { waste, insertions: insertions(), found_after, source: source.to_string() });
        self.waste.store(waste, Ordering::Release);
        self.history.lock().unwrap().push((found_after, waste));
        log::info!("new best {waste} after {:.3}s ({source})", found_after.as_secs_f64());
        true
    }

    pub fn best(&self) -> Option<Solution> {
        self.best.lock().unwrap().clone()
    }

    /// `(time, waste)` for each improvement, in order.
    pub fn history(&self) -> Vec<(Duration, Area)> {
        self.history.lock().unwrap().clone()
    }
}
