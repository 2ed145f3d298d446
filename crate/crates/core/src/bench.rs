//! Runs solver variants over a directory of instances and appends one CSV row per run.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::io::{load_instance, IoError};
use crate::model::Params;
use crate::node::GuideKind;
use crate::orchestrator::{solve, Algorithm, SolveOptions};
use crate::search::Growth;

pub const RESULTS_HEADER: &str = "instance,algorithm,guide,growth,waste,time_to_best";

/// A solver variant: `auto`, `portfolio`, `astar[:g]`, `dpastar`, `ibs:g`, or `mbastar:g:growth[:nosym]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variant {
    pub label: String,
    pub algorithm: Algorithm,
    pub guide: Option<GuideKind>,
    pub growth: Option<Growth>,
    pub symmetry: bool,
    /// Single worker unless the portfolio is requested.
    pub threads: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown solver variant `{0}`")]
pub struct BadVariant(String);

impl FromStr for Variant {
    type Err = BadVariant;

    fn from_str(s: &str) -> Result<Variant, BadVariant> {
        let bad = || BadVariant(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let guide = |i: usize| -> Result<Option<GuideKind>, BadVariant> {
            parts.get(i).map(|g| GuideKind::from_letter(g).ok_or_else(bad)).transpose()
        };
        let base = Variant {
            label: s.to_string(),
            algorithm: Algorithm::Auto,
            guide: None,
            growth: None,
            symmetry: true,
            threads: 1,
        };
        match parts[0] {
            "auto" | "portfolio" if parts.len() == 1 => Ok(Variant {
                algorithm: if parts[0] == "auto" { Algorithm::Auto } else { Algorithm::MbaStar },
                threads: 4,
                ..base
            }),
            "dpastar" if parts.len() == 1 => Ok(Variant { algorithm: Algorithm::DpaStar, ..base }),
            "astar" if parts.len() <= 2 => Ok(Variant { algorithm: Algorithm::AStar, guide: guide(1)?, ..base }),
            "ibs" if parts.len() == 2 => Ok(Variant { algorithm: Algorithm::Ibs, guide: guide(1)?, ..base }),
            "mbastar" if (3..=4).contains(&parts.len()) => {
                let growth = parts[2].parse().map_err(|_| bad())?;
                let symmetry = match parts.get(3) {
                    None => true,
                    Some(&"nosym") => false,
                    Some(_) => return Err(bad()),
                };
                Ok(Variant { algorithm: Algorithm::MbaStar, guide: guide(1)?, growth: Some(growth), symmetry, ..base })
            }
            _ => Err(bad()),
        }
    }
}

impl Variant {
    fn options(&self, time_limit: Duration) -> SolveOptions {
        SolveOptions {
            time_limit,
            threads: self.threads,
            guide: self.guide,
            growth: self.growth,
            symmetry: self.symmetry,
            algorithm: self.algorithm,
            ..SolveOptions::default()
        }
    }

    fn guide_column(&self) -> String {
        match self.guide {
            Some(g) => g.letter().to_string(),
            None if self.algorithm == Algorithm::DpaStar => "w".to_string(),
            None => "p+a".to_string(),
        }
    }

    fn growth_column(&self) -> String {
        match self.growth {
            Some(g) => g.to_string(),
            None if matches!(self.algorithm, Algorithm::Auto | Algorithm::MbaStar) => "1.33+1.5".to_string(),
            None => String::new(),
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance: String,
    pub algorithm: String,
    pub guide: String,
    pub growth: String,
    /// Empty when no solution was found.
    pub waste: Option<i64>,
    pub time_to_best: Option<Duration>,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.instance,
            self.algorithm,
            self.guide,
            self.growth,
            self.waste.map(|w| w.to_string()).unwrap_or_default(),
            self.time_to_best.map(|t| format!("{:.3}", t.as_secs_f64())).unwrap_or_default()
        )
    }
}

/// Instance prefixes (`<dir>/.../<name>`) of every `<name>_batch.csv` under `dir`, sorted by name.
pub fn instances_in(dir: &Path) -> Vec<PathBuf> {
    let mut found: Vec<PathBuf> = walkdir::WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter_map(|e| {
            let name = e.file_name().to_str()?.strip_suffix("_batch.csv")?.to_string();
            Some(e.path().with_file_name(name))
        })
        .collect();
    found.sort_by_key(|p| natural_key(p));
    found
}

/// `A2` before `A10`.
fn natural_key(p: &Path) -> (String, u64) {
    let name = p.file_name().and_then(|s| s.to_str()).unwrap_or_default();
    let digits = name.trim_start_matches(|c: char| !c.is_ascii_digit());
    let prefix = &name[..name.len() - digits.len()];
    (prefix.to_string(), digits.parse().unwrap_or(0))
}

/// Runs every variant on every instance of `dir`, appending rows to `results` as they finish.
pub fn run(dir: &Path, time_limit: Duration, variants: &[Variant], results: &Path) -> Result<Vec<BenchRow>, BenchError> {
    let write_err = |source| BenchError::Write { path: results.to_path_buf(), source };
    let fresh = !results.exists() || std::fs::metadata(results).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(results).map_err(write_err)?;
    if fresh {
        writeln!(file, "{RESULTS_HEADER}").map_err(write_err)?;
    }
    let mut rows = Vec::new();
    for prefix in instances_in(dir) {
        let instance = load_instance(&prefix.to_string_lossy(), Params::default())?;
        for v in variants {
            let result = solve(&instance, &v.options(time_limit));
            let row = BenchRow {
                instance: instance.name.clone(),
                algorithm: v.label.clone(),
                guide: v.guide_column(),
                growth: v.growth_column(),
                waste: result.as_ref().ok().map(|r| r.waste),
                time_to_best: result.as_ref().ok().map(|r| r.time_to_best),
            };
            log::info!("{}", row.to_csv());
            writeln!(file, "{}", row.to_csv()).map_err(write_err)?;
            rows.push(row);
        }
    }
    Ok(rows)
}
