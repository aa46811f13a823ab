//! Initial solutions: pruned savings construction and route-destroying
//! perturbations of it.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::elite::ElitePool;
use crate::features::pool_guidance_stats;
use crate::instance::{Instance, Node};
use crate::search::{best_insertion, Params};
use crate::solution::Solution;

/// A savings table entry, `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SavingsEntry {
    pub i: Node,
    pub j: Node,
    pub value: i64,
}

/// Positive savings between each customer and its `n_cw` nearest customers,
/// sorted by decreasing value, ties by `(i, j)`.
pub fn savings_table(instance: &Instance, n_cw: usize) -> Vec<SavingsEntry> {
    let d = |a: Node, b: Node| instance.distance(a, b);
    let mut table = Vec::new();
    for i in instance.customers() {
        for &j in instance.neighbors().list(i).iter().take(n_cw) {
            let (a, b) = (i.min(j), i.max(j));
            let value = d(0, a) + d(0, b) - d(a, b);
            if value > 0 {
                table.push(SavingsEntry { i: a, j: b, value });
            }
        }
    }
    table.sort_by(|x, y| y.value.cmp(&x.value).then((x.i, x.j).cmp(&(y.i, y.j))));
    table.dedup();
    table
}

/// Clarke–Wright savings over a pruned table. Starts from one route per
/// customer and merges route ends in savings order while capacity allows.
pub fn clarke_wright(instance: &Instance, n_cw: usize) -> Solution {
    let n = instance.dimension();
    let mut route_of: Vec<usize> = (0..n).collect();
    let mut routes: Vec<Vec<Node>> = (0..n as Node).map(|c| vec![c]).collect();
    let mut load: Vec<i64> = (0..n as Node).map(|c| instance.demand(c)).collect();
    for e in savings_table(instance, n_cw) {
        let (ri, rj) = (route_of[e.i as usize], route_of[e.j as usize]);
        if ri == rj || load[ri] + load[rj] > instance.capacity() {
            continue;
        }
        let terminal = |r: &Vec<Node>, c: Node| r[0] == c || *r.last().unwrap() == c;
        if !terminal(&routes[ri], e.i) || !terminal(&routes[rj], e.j) {
            continue;
        }
        let mut a = std::mem::take(&mut routes[ri]);
        let mut b = std::mem::take(&mut routes[rj]);
        if *a.last().unwrap() != e.i {
            a.reverse();
        }
        if b[0] != e.j {
            b.reverse();
        }
        a.extend(b.iter().copied());
        for &c in &b {
            route_of[c as usize] = ri;
        }
        load[ri] += load[rj];
        load[rj] = 0;
        routes[ri] = a;
    }
    let routes = routes.into_iter().skip(1).filter(|r| !r.is_empty()).collect();
    Solution::from_routes(instance, routes)
}

/// Destroys two random routes of `base` and reinserts their customers at the
/// cheapest feasible position. A customer without one opens a new route if
/// `always_open` is set, and otherwise with probability one half; failing
/// that the candidate is abandoned.
fn perturb<R: Rng + ?Sized>(
    base: &Solution,
    instance: &Instance,
    rng: &mut R,
    always_open: bool,
) -> Option<Solution> {
    let mut s = base.clone();
    let mut which: Vec<usize> = (0..s.num_routes()).collect();
    which.shuffle(rng);
    which.truncate(2);
    let mut freed = s.remove_routes(instance, which);
    freed.shuffle(rng);
    for c in freed {
        match best_insertion(instance, &s, c, None) {
            Some((r, pos, _)) => s.insert(instance, c, r, pos),
            None if always_open || rng.gen_bool(0.5) => {
                s.push_route(instance, vec![c]);
            }
            None => return None,
        }
    }
    Some(s)
}

/// A perturbed copy of `base`, accepted when it is cheaper than `base` or
/// uses no more routes than ⌈Σq/Q⌉.
pub fn perturbed_initial<R: Rng + ?Sized>(
    base: &Solution,
    instance: &Instance,
    rng: &mut R,
) -> Option<Solution> {
    if base.num_routes() < 2 {
        return None;
    }
    let s = perturb(base, instance, rng, false)?;
    if s.cost() < base.cost() || s.num_routes() <= instance.min_routes() {
        Some(s)
    } else {
        None
    }
}

/// Seeds a pool with the savings solution plus perturbed variants until it
/// holds `elite_min` distinct members. When the retry budget runs out,
/// any feasible perturbation is admitted. Returns the pool and its mean
/// capacity-utilization statistics (α, β).
pub fn generate_initial_pool<R: Rng + ?Sized>(
    instance: &Instance,
    params: &Params,
    rng: &mut R,
) -> (ElitePool, f64, f64) {
    let mut pool = ElitePool::new(params);
    let cw = clarke_wright(instance, params.n_cw);
    pool.update_elite(instance, cw.clone());
    let budget = params.init_retries * params.elite_min.saturating_sub(1).max(1);
    let mut attempts = 0;
    while pool.len() < params.elite_min && attempts < budget {
        attempts += 1;
        if let Some(s) = perturbed_initial(&cw, instance, rng) {
            pool.update_elite(instance, s);
        }
    }
    attempts = 0;
    while pool.len() < params.elite_min && attempts < budget {
        attempts += 1;
        if let Some(s) = perturb(&cw, instance, rng, true) {
            pool.update_elite(instance, s);
        }
    }
    let (alpha, beta) = pool_guidance_stats(instance, pool.members());
    (pool, alpha, beta)
}
