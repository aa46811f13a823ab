//! Neighbourhood search: destroy/repair perturbation followed by a two-level
//! randomized local search restricted to recently moved vertices.

pub mod moves;
mod params;

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::instance::{Instance, Node, RouteClass, DEPOT};
use crate::solution::Solution;

pub use moves::{Move, MoveKind};
pub use params::Params;

/// How freed customers are reinserted by [`Search::destroy_repair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Strategy {
    /// Best position over every route.
    Full,
    /// Positions next to the `gamma_max` nearest neighbours.
    FullGranular,
    /// Positions next to the current-Γ nearest neighbours.
    Granular,
}

/// Insertion strategy given the number of pool regenerations since the last
/// new global best.
pub fn select_strategy(class: RouteClass, regens_without_best: u32) -> Strategy {
    match class {
        RouteClass::Short => match regens_without_best {
            0..=2 => Strategy::Full,
            3 => Strategy::FullGranular,
            _ => Strategy::Granular,
        },
        RouteClass::Long => match regens_without_best {
            0..=1 => Strategy::Full,
            _ => Strategy::Granular,
        },
    }
}

/// Bounded FIFO of banned `(ci, cj)` pairs.
#[derive(Debug, Clone)]
pub struct TabuList {
    cap: usize,
    items: VecDeque<(Node, Node)>,
}

impl TabuList {
    pub fn new(cap: usize) -> Self {
        TabuList {
            cap,
            items: VecDeque::with_capacity(cap),
        }
    }

    pub fn push(&mut self, key: (Node, Node)) {
        if self.items.len() == self.cap {
            self.items.pop_front();
        }
        self.items.push_back(key);
    }

    pub fn contains(&self, key: (Node, Node)) -> bool {
        self.items.contains(&key)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn clear(&mut self) {
        self.items.clear();
    }
}

/// The recently moved customers the local search is restricted to.
/// Re-inserting a cached vertex refreshes it; the oldest entry is evicted
/// past capacity.
#[derive(Debug, Clone)]
pub struct VertexCache {
    cap: usize,
    items: VecDeque<Node>,
}

impl VertexCache {
    pub fn new(cap: usize) -> Self {
        VertexCache {
            cap,
            items: VecDeque::with_capacity(cap),
        }
    }

    pub fn push(&mut self, c: Node) {
        if c == DEPOT {
            return;
        }
        if let Some(i) = self.items.iter().position(|&x| x == c) {
            self.items.remove(i);
        } else if self.items.len() == self.cap {
            self.items.pop_front();
        }
        self.items.push_back(c);
    }

    /// Replaces the contents with `nodes`, keeping the most recent ones.
    pub fn seed(&mut self, nodes: impl IntoIterator<Item = Node>) {
        self.items.clear();
        for c in nodes {
            self.push(c);
        }
    }

    pub fn nodes(&self) -> Vec<Node> {
        self.items.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Growing granular neighbourhood size Γ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GranularState {
    current: usize,
    initial: usize,
    step: usize,
    max: usize,
}

impl GranularState {
    pub fn new(params: &Params) -> Self {
        GranularState {
            current: params.gamma0,
            initial: params.gamma0,
            step: params.gamma_step,
            max: params.gamma_max,
        }
    }

    pub fn current(&self) -> usize {
        self.current
    }

    pub fn max(&self) -> usize {
        self.max
    }

    pub fn grow(&mut self) {
        self.current = (self.current + self.step).min(self.max);
    }

    pub fn reset(&mut self) {
        self.current = self.initial;
    }
}

/// Replaces `best` by `s` when `s` is strictly cheaper.
pub(crate) fn offer_best(best: &mut Solution, s: &Solution) -> bool {
    if s.cost() < best.cost() {
        *best = s.clone();
        true
    } else {
        false
    }
}

/// Cheapest capacity-feasible insertion of `c`. `around` restricts the
/// candidate slots to those adjacent to the given customers; `None` scans
/// every route. Ties keep the first slot found.
pub(crate) fn best_insertion(
    inst: &Instance,
    s: &Solution,
    c: Node,
    around: Option<&[Node]>,
) -> Option<(usize, usize, i64)> {
    let q = inst.demand(c);
    let d = |a: Node, b: Node| inst.distance(a, b);
    let mut best: Option<(usize, usize, i64)> = None;
    let mut consider = |r: usize, pos: usize, seq: &[Node]| {
        let prev = if pos == 0 { DEPOT } else { seq[pos - 1] };
        let next = seq.get(pos).copied().unwrap_or(DEPOT);
        let delta = d(prev, c) + d(c, next) - d(prev, next);
        if best.map_or(true, |(_, _, b)| delta < b) {
            best = Some((r, pos, delta));
        }
    };
    match around {
        None => {
            for (r, route) in s.routes().iter().enumerate() {
                if route.load() + q > inst.capacity() {
                    continue;
                }
                for pos in 0..=route.len() {
                    consider(r, pos, route.customers());
                }
            }
        }
        Some(nodes) => {
            for &n in nodes {
                let Some((r, p)) = s.locate(n) else { continue };
                let route = s.route(r);
                if route.load() + q > inst.capacity() {
                    continue;
                }
                consider(r, p, route.customers());
                consider(r, p + 1, route.customers());
            }
        }
    }
    best
}

/// Counters of the search effort, reported in run traces.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub perturbations: u64,
    pub operator_calls: u64,
    pub moves_applied: u64,
}

/// Per-run search state: Γ, the vertex cache and effort counters.
#[derive(Debug, Clone)]
pub struct Search<'a> {
    inst: &'a Instance,
    params: &'a Params,
    class: RouteClass,
    pub granular: GranularState,
    pub cache: VertexCache,
    tabu: TabuList,
    pub stats: SearchStats,
}

impl<'a> Search<'a> {
    pub fn new(inst: &'a Instance, params: &'a Params, class: RouteClass) -> Self {
        Search {
            inst,
            params,
            class,
            granular: GranularState::new(params),
            cache: VertexCache::new(params.cache_size),
            tabu: TabuList::new(params.tabu_size),
            stats: SearchStats::default(),
        }
    }

    pub fn class(&self) -> RouteClass {
        self.class
    }

    pub fn params(&self) -> &Params {
        self.params
    }

    /// Destroys one (long class) or two (short class) random routes and
    /// reinserts the freed customers in random order. Customers without a
    /// feasible slot open a new route. The cache is reseeded with the
    /// reinserted customers.
    pub fn destroy_repair<R: Rng + ?Sized>(
        &mut self,
        s: &mut Solution,
        best: &mut Solution,
        strategy: Strategy,
        rng: &mut R,
    ) {
        self.stats.perturbations += 1;
        let inst = self.inst;
        let wanted = match self.class {
            RouteClass::Short => 2,
            RouteClass::Long => 1,
        };
        let mut which: Vec<usize> = (0..s.num_routes()).collect();
        which.shuffle(rng);
        which.truncate(wanted.min(s.num_routes()));
        let mut freed = s.remove_routes(inst, which);
        freed.shuffle(rng);
        let width = match strategy {
            Strategy::Full => None,
            Strategy::FullGranular => Some(self.granular.max()),
            Strategy::Granular => Some(self.granular.current()),
        };
        for &c in &freed {
            let around = width.map(|w| &inst.neighbors().list(c)[..w.min(inst.num_customers() - 1)]);
            match best_insertion(inst, s, c, around) {
                Some((r, pos, _)) => s.insert(inst, c, r, pos),
                None => {
                    s.push_route(inst, vec![c]);
                }
            }
        }
        self.cache.seed(freed);
        offer_best(best, s);
    }

    /// Two-level local search: level 0 until it fails, then level 1; any
    /// improvement restarts at level 0.
    pub fn local_search_improvement<R: Rng + ?Sized>(
        &mut self,
        s: &mut Solution,
        best: &mut Solution,
        rng: &mut R,
    ) {
        self.local_search_levels(s, best, rng, 2);
    }

    /// [`Search::local_search_improvement`] over levels `0..levels`.
    pub(crate) fn local_search_levels<R: Rng + ?Sized>(
        &mut self,
        s: &mut Solution,
        best: &mut Solution,
        rng: &mut R,
        levels: usize,
    ) {
        let mut p = 0;
        while p < levels {
            let before = s.cost();
            self.random_neighborhood_search(p, s, best, rng);
            if s.cost() < before {
                p = 0;
                offer_best(best, s);
            } else {
                p += 1;
            }
        }
    }

    /// Runs the operators of level `p` in a random order, cycling with a
    /// current pointer R and a last pointer L until a full cycle brings no
    /// improvement.
    pub fn random_neighborhood_search<R: Rng + ?Sized>(
        &mut self,
        p: usize,
        s: &mut Solution,
        best: &mut Solution,
        rng: &mut R,
    ) -> Vec<MoveKind> {
        let mut ops = MoveKind::of_level(p);
        ops.shuffle(rng);
        let mut executed = Vec::new();
        let (mut r, mut l) = (0usize, 0usize);
        loop {
            executed.push(ops[l]);
            if self.execute_operator(ops[l], s, best) {
                r = l;
                offer_best(best, s);
            }
            l = (l + 1) % ops.len();
            if r == l {
                break;
            }
        }
        executed
    }

    /// One pass of `kind` over the vertex cache. For every cached `ci` the
    /// first improving non-tabu move towards one of its Γ nearest neighbours
    /// is applied and the customers it touches are queued again, so a pass
    /// ends once no queued vertex admits an improving move. Moves reaching a
    /// new global best bypass the tabu list. Returns whether the solution
    /// improved.
    pub fn execute_operator(&mut self, kind: MoveKind, s: &mut Solution, best: &Solution) -> bool {
        let mut tabu = std::mem::replace(&mut self.tabu, TabuList::new(0));
        tabu.clear();
        let improved = self.execute_with_tabu(kind, s, best, &mut tabu);
        self.tabu = tabu;
        improved
    }

    fn execute_with_tabu(
        &mut self,
        kind: MoveKind,
        s: &mut Solution,
        best: &Solution,
        tabu: &mut TabuList,
    ) -> bool {
        self.stats.operator_calls += 1;
        let inst = self.inst;
        let start = s.cost();
        let gamma = self.granular.current().min(inst.num_customers().saturating_sub(1));
        let mut queue: VecDeque<Node> = self.cache.nodes().into();
        let mut queued = vec![false; inst.dimension()];
        for &c in &queue {
            queued[c as usize] = true;
        }
        while let Some(ci) = queue.pop_front() {
            queued[ci as usize] = false;
            for &cj in &inst.neighbors().list(ci)[..gamma] {
                let Some(mv) = moves::evaluate(inst, s, kind, ci, cj, gamma) else { continue };
                if mv.delta >= 0 {
                    continue;
                }
                let aspiration = s.cost() + mv.delta < best.cost();
                if tabu.contains((ci, cj)) && !aspiration {
                    continue;
                }
                let touched = mv.touched(s);
                moves::apply(inst, s, &mv);
                self.stats.moves_applied += 1;
                tabu.push((ci, cj));
                for c in touched {
                    self.cache.push(c);
                    if !queued[c as usize] {
                        queued[c as usize] = true;
                        queue.push_back(c);
                    }
                }
                break;
            }
        }
        s.cost() < start
    }
}
