//! Top-level Multiple Search loop and its guided variant.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::construction::generate_initial_pool;
use crate::instance::{Instance, InstanceError, RouteClass};
use crate::search::{select_strategy, Params, Search, SearchStats};
use crate::solution::Solution;
use crate::splitpr::{path_relinking, RelinkStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Plain,
    Guided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub mode: Mode,
    pub enable_pr: bool,
    /// Wall-clock budget in seconds, checked before every outer iteration.
    pub time_limit: f64,
    pub seed: u64,
    /// Tuned defaults for the instance's route class when absent.
    pub params: Option<Params>,
    /// Stop after this many outer iterations. Makes runs reproducible
    /// independently of machine speed.
    pub max_iterations: Option<u64>,
    /// Stop as soon as the incumbent costs this much or less.
    pub target_cost: Option<i64>,
}

impl SolverConfig {
    pub fn new(mode: Mode, time_limit: f64, seed: u64) -> Self {
        SolverConfig {
            mode,
            enable_pr: true,
            time_limit,
            seed,
            params: None,
            max_iterations: None,
            target_cost: None,
        }
    }
}

/// Seed of the `run_index`-th run (1-based): the run counter minus one.
pub fn seed_protocol(run_index: u64) -> u64 {
    assert!(run_index >= 1, "runs are numbered from 1");
    run_index - 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum TraceEvent {
    NewBest {
        iteration: u64,
        cost: i64,
    },
    Restart {
        iteration: u64,
        theta: u64,
        threshold: u64,
        weight: Option<f64>,
    },
    Relink {
        iteration: u64,
        #[serde(flatten)]
        stats: RelinkStats,
    },
}

/// Iteration-indexed run history. Holds no timestamps, so equal seeds and
/// iteration caps give equal traces.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub class: Option<RouteClass>,
    pub initial_weight: Option<f64>,
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn best_costs(&self) -> impl Iterator<Item = (u64, i64)> + '_ {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::NewBest { iteration, cost } => Some((*iteration, *cost)),
            _ => None,
        })
    }

    pub fn restarts(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Restart { .. })).count()
    }

    pub fn relinks(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, TraceEvent::Relink { .. })).count()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub best: Solution,
    pub best_cost: i64,
    pub iterations: u64,
    pub trace: Trace,
    pub stats: SearchStats,
    pub elapsed: Duration,
}

/// Runs Multiple Search (or its guided variant) on `instance`.
pub fn solve(instance: &Instance, config: &SolverConfig) -> Result<RunResult, InstanceError> {
    let started = Instant::now();
    let class = instance.route_size_class()?;
    let params = config.params.clone().unwrap_or_else(|| Params::for_class(class));
    params.validate().map_err(InstanceError::Degenerate)?;
    let budget = Duration::from_secs_f64(config.time_limit.max(0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trace = Trace {
        class: Some(class),
        ..Trace::default()
    };

    let (mut pool, alpha, beta) = generate_initial_pool(instance, &params, &mut rng);
    if config.mode == Mode::Guided {
        pool.init_guidance(alpha, beta);
        trace.initial_weight = pool.weight();
    }
    let mut best = pool.best().expect("initial pool is non-empty").clone();
    trace.events.push(TraceEvent::NewBest {
        iteration: 0,
        cost: best.cost(),
    });
    let mut search = Search::new(instance, &params, class);
    let mut previous = best.cost();
    let mut iteration = 0u64;

    loop {
        if started.elapsed() >= budget
            || config.max_iterations.is_some_and(|m| iteration >= m)
            || config.target_cost.is_some_and(|t| best.cost() <= t)
        {
            break;
        }
        iteration += 1;

        let strategy = select_strategy(class, pool.regens_without_best());
        for _ in 0..params.elite_min {
            let Some(original) = pool.take_best() else { break };
            let mut s = original.clone();
            search.destroy_repair(&mut s, &mut best, strategy, &mut rng);
            search.local_search_improvement(&mut s, &mut best, &mut rng);
            pool.update_elite(instance, s);
            pool.update_elite(instance, original);
        }

        if config.enable_pr {
            if let Some(stats) = path_relinking(instance, &mut search, &mut pool, &mut best, &mut rng) {
                trace.events.push(TraceEvent::Relink { iteration, stats });
            }
        }

        let improved = best.cost() < previous;
        if improved {
            search.granular.reset();
            trace.events.push(TraceEvent::NewBest {
                iteration,
                cost: best.cost(),
            });
        } else {
            search.granular.grow();
        }
        let (theta, threshold) = (pool.theta() + 1, pool.threshold());
        let restarted = match config.mode {
            Mode::Plain => pool.manage_plain(improved, instance, &params, &mut rng),
            Mode::Guided => pool.manage_guided(improved, instance, &params, &mut rng),
        };
        if restarted {
            trace.events.push(TraceEvent::Restart {
                iteration,
                theta,
                threshold,
                weight: pool.weight(),
            });
        }
        previous = best.cost();
    }

    if let Err(v) = best.check(instance) {
        panic!("incumbent is infeasible: {v}");
    }
    debug_assert_eq!(best.cost(), best.recompute_cost(instance));
    Ok(RunResult {
        best_cost: best.cost(),
        best,
        iterations: iteration,
        trace,
        stats: search.stats,
        elapsed: started.elapsed(),
    })
}
