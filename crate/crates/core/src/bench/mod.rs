//! Multi-run benchmark harness and paired comparisons.

pub mod wilcoxon;

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::solution::gap;
use crate::solver::{seed_protocol, solve, Mode, SolverConfig};

pub use wilcoxon::{wilcoxon_one_tailed, Method, WilcoxonError, WilcoxonResult};

/// Significance level of the comparisons (0.025 split over two tests).
pub const DEFAULT_ALPHA: f64 = 0.0125;

/// A named solver variant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Variant {
    pub name: String,
    pub mode: Mode,
    pub enable_pr: bool,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (mode, enable_pr) = match s {
            "plain" => (Mode::Plain, true),
            "guided" => (Mode::Guided, true),
            "plain-nopr" => (Mode::Plain, false),
            "guided-nopr" => (Mode::Guided, false),
            other => return Err(format!("unknown mode '{other}'")),
        };
        Ok(Variant {
            name: s.to_string(),
            mode,
            enable_pr,
        })
    }
}

/// Per-run time budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TimeLimit {
    Seconds(f64),
    /// `N × factor / 100` seconds for an instance with N customers.
    PerHundredCustomers(f64),
}

impl TimeLimit {
    pub fn for_instance(self, instance: &Instance) -> f64 {
        match self {
            TimeLimit::Seconds(s) => s,
            TimeLimit::PerHundredCustomers(f) => instance.num_customers() as f64 * f / 100.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub variants: Vec<Variant>,
    pub runs: u64,
    pub time_limit: TimeLimit,
    /// Worker threads; each run stays single-threaded.
    pub jobs: usize,
    pub max_iterations: Option<u64>,
}

/// One solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub instance: String,
    pub mode: String,
    pub seed: u64,
    pub cost: i64,
    pub bks: f64,
    pub gap: f64,
    pub iterations: u64,
}

/// Per-instance summary over the runs of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRow {
    pub instance: String,
    pub mode: String,
    pub avg_cost: f64,
    pub best_cost: f64,
    pub avg_gap: f64,
    pub best_gap: f64,
}

/// Min / avg / median / max of a column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub avg: f64,
    pub median: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
        Some(Summary {
            min: v[0],
            avg: v.iter().sum::<f64>() / n as f64,
            median,
            max: v[n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub mode: String,
    pub avg_gap: Summary,
    pub best_gap: Summary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<InstanceRow>,
    pub aggregates: Vec<Aggregate>,
    pub cells: Vec<Cell>,
}

impl BenchReport {
    /// Summarizes cells sorted by (instance, mode, seed).
    pub fn from_cells(mut cells: Vec<Cell>) -> Self {
        cells.sort_by(|a, b| (&a.instance, &a.mode, a.seed).cmp(&(&b.instance, &b.mode, b.seed)));
        let mut groups: BTreeMap<(String, String), Vec<&Cell>> = BTreeMap::new();
        for c in &cells {
            groups.entry((c.instance.clone(), c.mode.clone())).or_default().push(c);
        }
        let rows: Vec<InstanceRow> = groups
            .into_iter()
            .map(|((instance, mode), runs)| {
                let k = runs.len() as f64;
                let avg_cost = runs.iter().map(|c| c.cost as f64).sum::<f64>() / k;
                let best_cost = runs.iter().map(|c| c.cost).min().unwrap() as f64;
                let bks = runs[0].bks;
                InstanceRow {
                    instance,
                    mode,
                    avg_cost,
                    best_cost,
                    avg_gap: gap(avg_cost, bks),
                    best_gap: gap(best_cost, bks),
                }
            })
            .collect();
        let mut modes: Vec<String> = rows.iter().map(|r| r.mode.clone()).collect();
        modes.sort();
        modes.dedup();
        let aggregates = modes
            .into_iter()
            .map(|mode| {
                let col = |f: fn(&InstanceRow) -> f64| -> Vec<f64> {
                    rows.iter().filter(|r| r.mode == mode).map(f).collect()
                };
                Aggregate {
                    avg_gap: Summary::of(&col(|r| r.avg_gap)).unwrap(),
                    best_gap: Summary::of(&col(|r| r.best_gap)).unwrap(),
                    mode,
                }
            })
            .collect();
        BenchReport { rows, aggregates, cells }
    }

    pub fn rows_for<'a>(&'a self, mode: &'a str) -> impl Iterator<Item = &'a InstanceRow> + 'a {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    pub fn aggregate(&self, mode: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.mode == mode)
    }

    /// Per-instance table with gaps to two decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance", "mode", "avg_cost", "best_cost", "avg_gap", "best_gap"])?;
        for r in &self.rows {
            w.write_record([
                r.instance.clone(),
                r.mode.clone(),
                format!("{:.1}", r.avg_cost),
                format!("{:.0}", r.best_cost),
                format!("{:.2}", r.avg_gap),
                format!("{:.2}", r.best_gap),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}

/// Reads the per-instance rows of a report CSV.
pub fn read_rows<R: Read>(input: R) -> csv::Result<Vec<InstanceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Runs every variant `runs` times on every instance with a BKS entry,
/// seeding run k with k − 1. Instances without a BKS are skipped.
pub fn run_suite(instances: &[Instance], bks: &BTreeMap<String, f64>, cfg: &SuiteConfig) -> BenchReport {
    let mut jobs = Vec::new();
    for inst in instances {
        let Some(&reference) = bks.get(inst.name()) else {
            warn!("no BKS for {}, skipped", inst.name());
            continue;
        };
        for v in &cfg.variants {
            for k in 1..=cfg.runs {
                jobs.push((inst, reference, v, seed_protocol(k)));
            }
        }
    }
    let work = |&(inst, reference, v, seed): &(&Instance, f64, &Variant, u64)| -> Option<Cell> {
        let mut config = SolverConfig::new(v.mode, cfg.time_limit.for_instance(inst), seed);
        config.enable_pr = v.enable_pr;
        config.max_iterations = cfg.max_iterations;
        match solve(inst, &config) {
            Ok(r) => Some(Cell {
                instance: inst.name().to_string(),
                mode: v.name.clone(),
                seed,
                cost: r.best_cost,
                bks: reference,
                gap: gap(r.best_cost as f64, reference),
                iterations: r.iterations,
            }),
            Err(e) => {
                warn!("{}: {e}", inst.name());
                None
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .expect("thread pool");
    let cells: Vec<Cell> = pool.install(|| jobs.par_iter().filter_map(work).collect());
    BenchReport::from_cells(cells)
}

/// Outcome of comparing two reports on paired per-instance average gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub pairs: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub test: Result<WilcoxonResult, String>,
    pub alpha: f64,
}

impl Comparison {
    pub fn rejects_h0(&self) -> bool {
        matches!(&self.test, Ok(r) if r.p_value < self.alpha)
    }
}

/// Pairs rows by instance name and tests H1: avg gap of `a` < that of `b`.
pub fn compare(a: &[InstanceRow], b: &[InstanceRow], alpha: f64) -> Result<Comparison, String> {
    let index: BTreeMap<&str, f64> = b.iter().map(|r| (r.instance.as_str(), r.avg_gap)).collect();
    if index.len() != b.len() {
        return Err("report b lists an instance twice; select one mode".into());
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in a {
        if !seen.insert(r.instance.as_str()) {
            return Err("report a lists an instance twice; select one mode".into());
        }
        if let Some(&y) = index.get(r.instance.as_str()) {
            xs.push(r.avg_gap);
            ys.push(y);
        }
    }
    if xs.is_empty() {
        return Err("the reports share no instance".into());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(Comparison {
        pairs: xs.len(),
        mean_a: mean(&xs),
        mean_b: mean(&ys),
        test: wilcoxon_one_tailed(&xs, &ys, Method::Auto).map_err(|e| e.to_string()),
        alpha,
    })
}
