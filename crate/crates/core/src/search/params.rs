use serde::{Deserialize, Serialize};

use crate::instance::RouteClass;

/// Algorithm parameters. [`Params::for_class`] gives the tuned defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Neighbours considered per customer by the savings construction.
    pub n_cw: usize,
    pub elite_max: usize,
    pub elite_min: usize,
    /// Vertex cache capacity.
    pub cache_size: usize,
    pub gamma0: usize,
    pub gamma_step: usize,
    pub gamma_max: usize,
    pub tabu_size: usize,
    /// Truncation index of path relinking, in (0, 1].
    pub eta_pr: f64,
    /// Non-improving iterations before the pool is regenerated.
    pub max_non_improving: u64,
    /// Big constant scaling the guided threshold.
    pub big_m: f64,
    /// Relative cost window within which the proximity allowance applies.
    pub proximity_allowance: f64,
    /// Perturbation attempts per missing pool member.
    pub init_retries: usize,
}

impl Params {
    pub fn for_class(class: RouteClass) -> Self {
        let (elite_max, gamma0) = match class {
            RouteClass::Long => (3, 10),
            RouteClass::Short => (2, 5),
        };
        Params {
            n_cw: 100,
            elite_max,
            elite_min: 2,
            cache_size: 50,
            gamma0,
            gamma_step: 5,
            gamma_max: 25,
            tabu_size: 50,
            eta_pr: 0.4,
            max_non_improving: 4000,
            big_m: 4000.0,
            proximity_allowance: 0.2,
            init_retries: 50,
        }
    }

    /// Checks the parameter invariants.
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("n_cw", self.n_cw),
            ("elite_max", self.elite_max),
            ("elite_min", self.elite_min),
            ("cache_size", self.cache_size),
            ("gamma0", self.gamma0),
            ("gamma_max", self.gamma_max),
            ("tabu_size", self.tabu_size),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.gamma0 > self.gamma_max {
            return Err("gamma0 exceeds gamma_max".into());
        }
        if self.elite_min > self.elite_max {
            return Err("elite_min exceeds elite_max".into());
        }
        if !(self.eta_pr > 0.0 && self.eta_pr <= 1.0) {
            return Err("eta_pr must lie in (0, 1]".into());
        }
        if !(self.big_m > 0.0) || self.max_non_improving == 0 {
            return Err("restart thresholds must be positive".into());
        }
        Ok(())
    }
}
