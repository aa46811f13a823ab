//! Giant-tour split and the truncated path relinking built on it.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::elite::ElitePool;
use crate::instance::{Instance, Node, RouteClass, DEPOT};
use crate::search::{offer_best, Search};
use crate::solution::{GiantTour, Solution};

/// Concatenates the routes of `s` in random order.
pub fn concatenate<R: Rng + ?Sized>(instance: &Instance, s: &Solution, rng: &mut R) -> GiantTour {
    GiantTour::concatenate(instance, s, rng)
}

/// Shortest-path labels over the auxiliary split graph. Node `j` stands for
/// the first `j` customers of the tour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitLabels {
    pub cost: Vec<i64>,
    pub pred: Vec<usize>,
}

/// Bellman labels for cutting `order` into capacity-feasible segments.
/// Extending a segment from `i..j-1` to `i..j` costs
/// `d(c_{j-1}, c_j) + d(c_j, D) - d(c_{j-1}, D)`; the scan from `i` stops
/// once the segment load exceeds Q.
pub fn split_labels(instance: &Instance, order: &[Node]) -> SplitLabels {
    let n = order.len();
    let d = |a: Node, b: Node| instance.distance(a, b);
    let mut cost = vec![i64::MAX; n + 1];
    let mut pred = vec![0usize; n + 1];
    cost[0] = 0;
    for i in 1..=n {
        if cost[i - 1] == i64::MAX {
            continue;
        }
        let mut load = 0;
        let mut len = 0;
        for j in i..=n {
            let c = order[j - 1];
            load += instance.demand(c);
            if load > instance.capacity() {
                break;
            }
            len = if j == i {
                d(DEPOT, c) + d(c, DEPOT)
            } else {
                let p = order[j - 2];
                len - d(p, DEPOT) + d(p, c) + d(c, DEPOT)
            };
            if cost[i - 1] + len < cost[j] {
                cost[j] = cost[i - 1] + len;
                pred[j] = i - 1;
            }
        }
    }
    SplitLabels { cost, pred }
}

/// Optimal split of the tour into routes, listed in tour order.
pub fn split(instance: &Instance, tour: &GiantTour) -> Solution {
    let order = tour.order();
    let labels = split_labels(instance, order);
    let mut routes = Vec::new();
    let mut j = order.len();
    while j > 0 {
        let i = labels.pred[j];
        routes.push(order[i..j].to_vec());
        j = i;
    }
    routes.reverse();
    Solution::from_routes(instance, routes)
}

/// Customers placed differently in the initial and guiding tours, and the
/// truncated number of relinking moves.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedNeighborhood {
    pub list: Vec<Node>,
    pub delta: usize,
    pub budget: usize,
}

impl RestrictedNeighborhood {
    pub fn new(initial: &GiantTour, guiding: &GiantTour, eta: f64) -> Self {
        let list: Vec<Node> = initial
            .order()
            .iter()
            .copied()
            .filter(|&c| initial.position(c) != guiding.position(c))
            .collect();
        let delta = list.len();
        RestrictedNeighborhood {
            list,
            delta,
            budget: relinking_budget(delta, eta),
        }
    }
}

/// ⌈(Δ/2)·η⌉.
pub fn relinking_budget(delta: usize, eta: f64) -> usize {
    (delta as f64 / 2.0 * eta).ceil() as usize
}

/// The non-tabu customer of `list` whose move to its guiding position is
/// cheapest, with its current and target positions. The first minimum wins.
pub fn get_position_swap(
    instance: &Instance,
    t: &GiantTour,
    guiding: &GiantTour,
    list: &[Node],
    tabu: &[bool],
) -> Option<(Node, usize, usize)> {
    let mut found = None;
    let mut f_best = i64::MAX;
    for &node in list {
        if tabu[node as usize] {
            continue;
        }
        let (pi, pg) = (t.position(node), guiding.position(node));
        if pi == pg {
            continue;
        }
        let f = t.swap_delta(instance, pi, pg);
        if f < f_best {
            f_best = f;
            found = Some((node, pi, pg));
        }
    }
    found
}

/// Effort and outcome of one relinking call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RelinkStats {
    pub delta: usize,
    pub budget: usize,
    pub swaps: usize,
    pub splits: usize,
    pub admitted: usize,
    pub new_best: bool,
}

/// Walks from `initial` towards `guiding` for at most `budget` swaps. Each
/// swap that shortens the tour is split and offered to the pool; long-class
/// splits first get one level-0 local-search pass. Stops early once the
/// walk is no longer than the guiding tour.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_neighborhood<R: Rng + ?Sized>(
    instance: &Instance,
    search: &mut Search<'_>,
    initial: &GiantTour,
    guiding: &GiantTour,
    budget: usize,
    list: &[Node],
    pool: &mut ElitePool,
    best: &mut Solution,
    rng: &mut R,
) -> (GiantTour, RelinkStats) {
    let mut t = initial.clone();
    let mut tabu = vec![false; instance.dimension()];
    let mut stats = RelinkStats::default();
    for _ in 0..budget {
        let Some((node, pi, pg)) = get_position_swap(instance, &t, guiding, list, &tabu) else {
            break;
        };
        let before = t.cost();
        t.swap(instance, pi, pg);
        stats.swaps += 1;
        if t.cost() < before {
            let mut s = split(instance, &t);
            stats.splits += 1;
            if search.class() == RouteClass::Long {
                let other = t.order()[pi];
                let mut seed = Vec::new();
                for c in [node, other] {
                    let (r, _) = s.locate(c).expect("split covers the tour");
                    seed.extend_from_slice(s.route(r).customers());
                }
                search.cache.seed(seed);
                search.random_neighborhood_search(0, &mut s, best, rng);
            }
            if pool.update_elite(instance, s.clone()).accepted() {
                stats.admitted += 1;
            }
            stats.new_best |= offer_best(best, &s);
        }
        tabu[node as usize] = true;
        if t.cost() <= guiding.cost() {
            break;
        }
    }
    (t, stats)
}

/// Relinks a random pool member towards the incumbent `best`. Returns
/// `None` when the pool holds no member distinct from `best`.
pub fn path_relinking<R: Rng + ?Sized>(
    instance: &Instance,
    search: &mut Search<'_>,
    pool: &mut ElitePool,
    best: &mut Solution,
    rng: &mut R,
) -> Option<RelinkStats> {
    if pool.len() < 2 {
        return None;
    }
    let key = best.canonical();
    let others: Vec<&Solution> = pool.members().iter().filter(|s| s.canonical() != key).collect();
    let initial = (*others.choose(rng)?).clone();
    let guiding = best.clone();
    let ti = concatenate(instance, &initial, rng);
    let tg = concatenate(instance, &guiding, rng);
    let mut rn = RestrictedNeighborhood::new(&ti, &tg, search.params().eta_pr);
    rn.list.shuffle(rng);
    let (_, mut stats) =
        evaluate_neighborhood(instance, search, &ti, &tg, rn.budget, &rn.list, pool, best, rng);
    stats.delta = rn.delta;
    stats.budget = rn.budget;
    Some(stats)
}
