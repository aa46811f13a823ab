//! Bounded pool of distinct elite solutions and its restart policies.

use rand::Rng;
use serde::Serialize;

use crate::construction::generate_initial_pool;
use crate::instance::{Instance, Node};
use crate::search::Params;
use crate::solution::{proximity, Solution};

/// Outcome of offering a solution to the pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Admission {
    Duplicate,
    Added,
    /// Strictly cheaper than the worst member, which it replaced.
    ReplacedWorst,
    /// Within the cost allowance and farther from the best than the worst was.
    ReplacedByProximity,
    Rejected,
}

impl Admission {
    pub fn accepted(self) -> bool {
        matches!(
            self,
            Admission::Added | Admission::ReplacedWorst | Admission::ReplacedByProximity
        )
    }
}

/// Guidance weight bounds. The lower bound keeps the restart threshold at
/// one iteration or more.
fn clamp_weight(w: f64, big_m: f64) -> f64 {
    let lo = 1.0 / big_m;
    if w.is_nan() {
        lo
    } else {
        w.clamp(lo, 1.0)
    }
}

#[derive(Debug, Clone)]
pub struct ElitePool {
    members: Vec<Solution>,
    keys: Vec<Vec<Vec<Node>>>,
    elite_min: usize,
    elite_max: usize,
    allowance: f64,
    max_non_improving: u64,
    big_m: f64,
    theta: u64,
    weight: Option<f64>,
    regens_without_best: u32,
    restarts: u64,
}

impl ElitePool {
    pub fn new(params: &Params) -> Self {
        ElitePool {
            members: Vec::new(),
            keys: Vec::new(),
            elite_min: params.elite_min,
            elite_max: params.elite_max,
            allowance: params.proximity_allowance,
            max_non_improving: params.max_non_improving,
            big_m: params.big_m,
            theta: 0,
            weight: None,
            regens_without_best: 0,
            restarts: 0,
        }
    }

    pub fn members(&self) -> &[Solution] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn elite_min(&self) -> usize {
        self.elite_min
    }

    pub fn elite_max(&self) -> usize {
        self.elite_max
    }

    /// Non-improving iteration counter θ.
    pub fn theta(&self) -> u64 {
        self.theta
    }

    /// Guidance weight W, set once guided control is enabled.
    pub fn weight(&self) -> Option<f64> {
        self.weight
    }

    /// Pool regenerations since the last new global best.
    pub fn regens_without_best(&self) -> u32 {
        self.regens_without_best
    }

    pub fn restarts(&self) -> u64 {
        self.restarts
    }

    pub fn contains(&self, s: &Solution) -> bool {
        let key = s.canonical();
        self.keys.contains(&key)
    }

    fn best_index(&self) -> Option<usize> {
        (0..self.members.len()).min_by_key(|&i| (self.members[i].cost(), i))
    }

    /// The most expensive member, never the best one when the pool holds two
    /// or more solutions.
    fn worst_index(&self) -> Option<usize> {
        let best = self.best_index()?;
        (0..self.members.len())
            .filter(|&i| i != best || self.members.len() == 1)
            .max_by_key(|&i| (self.members[i].cost(), std::cmp::Reverse(i)))
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best_index().map(|i| &self.members[i])
    }

    pub fn worst(&self) -> Option<&Solution> {
        self.worst_index().map(|i| &self.members[i])
    }

    /// Removes and returns the cheapest member.
    pub fn take_best(&mut self) -> Option<Solution> {
        let i = self.best_index()?;
        self.keys.remove(i);
        Some(self.members.remove(i))
    }

    fn replace(&mut self, i: usize, s: Solution, key: Vec<Vec<Node>>) {
        self.members[i] = s;
        self.keys[i] = key;
    }

    /// Offers `s` to the pool.
    pub fn update_elite(&mut self, instance: &Instance, s: Solution) -> Admission {
        let key = s.canonical();
        if self.keys.contains(&key) {
            return Admission::Duplicate;
        }
        if self.members.len() < self.elite_max {
            self.members.push(s);
            self.keys.push(key);
            return Admission::Added;
        }
        let w = self.worst_index().expect("full pool is non-empty");
        let worst_cost = self.members[w].cost();
        if s.cost() < worst_cost {
            self.replace(w, s, key);
            return Admission::ReplacedWorst;
        }
        let relative = (s.cost() - worst_cost) as f64 / worst_cost as f64;
        if relative < self.allowance {
            let b = self.best_index().expect("full pool is non-empty");
            let best = &self.members[b];
            let d_new = proximity(instance, best, &s);
            let d_old = proximity(instance, best, &self.members[w]);
            if d_new > d_old {
                self.replace(w, s, key);
                return Admission::ReplacedByProximity;
            }
        }
        Admission::Rejected
    }

    fn clear(&mut self) {
        self.members.clear();
        self.keys.clear();
    }

    /// Moves the members of `other` into this pool, keeping the counters.
    fn refill(&mut self, other: ElitePool) {
        self.members = other.members;
        self.keys = other.keys;
    }

    /// Enables guided control with W = α − β.
    pub fn init_guidance(&mut self, alpha: f64, beta: f64) {
        self.weight = Some(clamp_weight(alpha - beta, self.big_m));
    }

    /// Restart threshold: the fixed limit, or ⌈W·M⌉ under guidance.
    pub fn threshold(&self) -> u64 {
        match self.weight {
            None => self.max_non_improving,
            Some(w) => (w * self.big_m).ceil() as u64,
        }
    }

    fn count(&mut self, improved: bool) -> bool {
        if improved {
            self.theta = 0;
            self.regens_without_best = 0;
            false
        } else {
            self.theta += 1;
            self.theta > self.threshold()
        }
    }

    /// Fixed-threshold diversity control. Returns whether the pool was
    /// regenerated.
    pub fn manage_plain<R: Rng + ?Sized>(
        &mut self,
        improved: bool,
        instance: &Instance,
        params: &Params,
        rng: &mut R,
    ) -> bool {
        if !self.count(improved) {
            return false;
        }
        let (fresh, _, _) = generate_initial_pool(instance, params, rng);
        self.restart_with(fresh);
        true
    }

    /// Guided diversity control: the threshold is ⌈W·M⌉ and every restart
    /// moves W to (W + α + β) / 2 using the statistics of the fresh pool.
    pub fn manage_guided<R: Rng + ?Sized>(
        &mut self,
        improved: bool,
        instance: &Instance,
        params: &Params,
        rng: &mut R,
    ) -> bool {
        if !self.count(improved) {
            return false;
        }
        let (fresh, alpha, beta) = generate_initial_pool(instance, params, rng);
        self.restart_with(fresh);
        self.update_weight(alpha, beta);
        true
    }

    fn update_weight(&mut self, alpha: f64, beta: f64) {
        let w = self.weight.unwrap_or(1.0);
        self.weight = Some(clamp_weight((w + alpha + beta) / 2.0, self.big_m));
    }

    fn restart_with(&mut self, fresh: ElitePool) {
        self.clear();
        self.refill(fresh);
        self.theta = 0;
        self.regens_without_best += 1;
        self.restarts += 1;
    }

    #[cfg(test)]
    pub(crate) fn set_theta(&mut self, theta: u64) {
        self.theta = theta;
    }
}
