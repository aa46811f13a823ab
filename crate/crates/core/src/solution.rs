//! Feasible CVRP solutions, giant tours, and the measures defined on them.

use std::fmt;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::{Instance, Node, DEPOT};

/// One vehicle route. The depot is implicit at both ends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Route {
    customers: Vec<Node>,
    load: i64,
    cost: i64,
}

impl Route {
    fn new(instance: &Instance, customers: Vec<Node>) -> Self {
        let load = customers.iter().map(|&c| instance.demand(c)).sum();
        let cost = route_cost(instance, &customers);
        Route {
            customers,
            load,
            cost,
        }
    }

    pub fn customers(&self) -> &[Node] {
        &self.customers
    }

    pub fn load(&self) -> i64 {
        self.load
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.customers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.customers.is_empty()
    }
}

/// `d(D,c1) + Σ d(ci,ci+1) + d(ck,D)`; zero for an empty route.
pub fn route_cost(instance: &Instance, customers: &[Node]) -> i64 {
    let Some((&first, &last)) = customers.first().zip(customers.last()) else {
        return 0;
    };
    let inner: i64 = customers
        .windows(2)
        .map(|w| instance.distance(w[0], w[1]))
        .sum();
    instance.distance(DEPOT, first) + inner + instance.distance(last, DEPOT)
}

/// A set of routes over the customers of one instance, with cached loads,
/// costs, and a customer → (route, position) index.
#[derive(Debug, Clone)]
pub struct Solution {
    routes: Vec<Route>,
    cost: i64,
    route_of: Vec<u32>,
    pos_of: Vec<u32>,
}

impl PartialEq for Solution {
    fn eq(&self, other: &Self) -> bool {
        self.routes == other.routes
    }
}

impl Eq for Solution {}

const UNROUTED: u32 = u32::MAX;

impl Solution {
    /// Builds a solution from customer sequences; empty sequences are dropped.
    ///
    /// No partition or capacity checks are made here; see [`Solution::check`].
    pub fn from_routes(instance: &Instance, routes: Vec<Vec<Node>>) -> Self {
        let routes: Vec<Route> = routes
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| Route::new(instance, r))
            .collect();
        let mut s = Solution {
            cost: routes.iter().map(|r| r.cost).sum(),
            routes,
            route_of: vec![UNROUTED; instance.dimension()],
            pos_of: vec![UNROUTED; instance.dimension()],
        };
        for r in 0..s.routes.len() {
            s.reindex(r);
        }
        s
    }

    fn reindex(&mut self, r: usize) {
        for (p, &c) in self.routes[r].customers.iter().enumerate() {
            self.route_of[c as usize] = r as u32;
            self.pos_of[c as usize] = p as u32;
        }
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route(&self, r: usize) -> &Route {
        &self.routes[r]
    }

    pub fn num_routes(&self) -> usize {
        self.routes.len()
    }

    /// Cached total length.
    pub fn cost(&self) -> i64 {
        self.cost
    }

    /// Route index and position of a routed customer.
    #[inline]
    pub fn locate(&self, c: Node) -> Option<(usize, usize)> {
        match self.route_of[c as usize] {
            UNROUTED => None,
            r => Some((r as usize, self.pos_of[c as usize] as usize)),
        }
    }

    #[inline]
    pub(crate) fn route_index(&self, c: Node) -> usize {
        self.route_of[c as usize] as usize
    }

    #[inline]
    pub(crate) fn position(&self, c: Node) -> usize {
        self.pos_of[c as usize] as usize
    }

    /// Successor of `c` in its route; the depot at the route end.
    #[inline]
    pub fn next(&self, c: Node) -> Node {
        let r = &self.routes[self.route_index(c)].customers;
        r.get(self.position(c) + 1).copied().unwrap_or(DEPOT)
    }

    /// Predecessor of `c` in its route; the depot at the route start.
    #[inline]
    pub fn prev(&self, c: Node) -> Node {
        let p = self.position(c);
        if p == 0 {
            DEPOT
        } else {
            self.routes[self.route_index(c)].customers[p - 1]
        }
    }

    /// Replaces the customers of route `r`. Empty routes stay until
    /// [`Solution::drop_empty_routes`].
    pub(crate) fn set_route(&mut self, instance: &Instance, r: usize, customers: Vec<Node>) {
        let old_cost = self.routes[r].cost;
        for &c in &self.routes[r].customers {
            if self.route_of[c as usize] == r as u32 {
                self.route_of[c as usize] = UNROUTED;
            }
        }
        self.routes[r] = Route::new(instance, customers);
        self.cost += self.routes[r].cost - old_cost;
        self.reindex(r);
    }

    /// Appends a route and returns its index.
    pub(crate) fn push_route(&mut self, instance: &Instance, customers: Vec<Node>) -> usize {
        let route = Route::new(instance, customers);
        self.cost += route.cost;
        self.routes.push(route);
        let r = self.routes.len() - 1;
        self.reindex(r);
        r
    }

    /// Removes every empty route.
    pub(crate) fn drop_empty_routes(&mut self) {
        let mut r = 0;
        while r < self.routes.len() {
            if self.routes[r].customers.is_empty() {
                self.routes.swap_remove(r);
                if r < self.routes.len() {
                    self.reindex(r);
                }
            } else {
                r += 1;
            }
        }
    }

    /// Removes the given routes and returns their customers in route order.
    pub(crate) fn remove_routes(&mut self, instance: &Instance, mut which: Vec<usize>) -> Vec<Node> {
        which.sort_unstable();
        which.dedup();
        let mut freed = Vec::new();
        for &r in &which {
            let customers = std::mem::take(&mut self.routes[r].customers);
            for &c in &customers {
                self.route_of[c as usize] = UNROUTED;
            }
            freed.extend(customers);
            self.set_route(instance, r, Vec::new());
        }
        self.drop_empty_routes();
        freed
    }

    /// Inserts `c` into route `r` at position `pos`.
    pub(crate) fn insert(&mut self, instance: &Instance, c: Node, r: usize, pos: usize) {
        let mut seq = self.routes[r].customers.clone();
        seq.insert(pos, c);
        self.set_route(instance, r, seq);
    }

    /// Full recomputation of the total length, independent of the cache.
    pub fn recompute_cost(&self, instance: &Instance) -> i64 {
        self.routes
            .iter()
            .map(|r| route_cost(instance, &r.customers))
            .sum()
    }

    /// Checks partition, capacity and cache consistency; reports the first violation.
    pub fn check(&self, instance: &Instance) -> Result<(), Violation> {
        let n = instance.num_customers();
        let mut seen = vec![false; n + 1];
        for (ri, route) in self.routes.iter().enumerate() {
            if route.customers.is_empty() {
                return Err(Violation::EmptyRoute(ri));
            }
            for &c in &route.customers {
                if c == DEPOT || c as usize > n {
                    return Err(Violation::UnknownNode(c));
                }
                if std::mem::replace(&mut seen[c as usize], true) {
                    return Err(Violation::Duplicate(c));
                }
            }
            let load: i64 = route.customers.iter().map(|&c| instance.demand(c)).sum();
            if load > instance.capacity() {
                return Err(Violation::CapacityExceeded { route: ri, load });
            }
            if load != route.load {
                return Err(Violation::CacheMismatch(format!("route {ri} load")));
            }
            if route_cost(instance, &route.customers) != route.cost {
                return Err(Violation::CacheMismatch(format!("route {ri} cost")));
            }
        }
        if let Some(c) = (1..=n).find(|&c| !seen[c]) {
            return Err(Violation::CustomerMissing(c as Node));
        }
        if self.recompute_cost(instance) != self.cost {
            return Err(Violation::CacheMismatch("total cost".into()));
        }
        for (ri, route) in self.routes.iter().enumerate() {
            for (p, &c) in route.customers.iter().enumerate() {
                if self.locate(c) != Some((ri, p)) {
                    return Err(Violation::CacheMismatch(format!("index of customer {c}")));
                }
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.check(instance).is_ok()
    }

    /// Order-independent form: each route starts at its smaller end, routes
    /// sorted by first customer.
    pub fn canonical(&self) -> Vec<Vec<Node>> {
        let mut out: Vec<Vec<Node>> = self
            .routes
            .iter()
            .map(|r| {
                let mut v = r.customers.clone();
                if v.last() < v.first() {
                    v.reverse();
                }
                v
            })
            .collect();
        out.sort();
        out
    }

    /// Successor and predecessor tables indexed by customer.
    fn adjacency(&self, dim: usize) -> (Vec<Node>, Vec<Node>) {
        let mut next = vec![DEPOT; dim];
        let mut prev = vec![DEPOT; dim];
        for r in &self.routes {
            for (i, &c) in r.customers.iter().enumerate() {
                prev[c as usize] = if i == 0 { DEPOT } else { r.customers[i - 1] };
                next[c as usize] = r.customers.get(i + 1).copied().unwrap_or(DEPOT);
            }
        }
        (next, prev)
    }

    /// Writes the CVRPLIB `.sol` format. Customers are numbered by their dense id,
    /// which coincides with the CVRPLIB numbering when the depot is node 1.
    pub fn to_sol_string(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.routes.iter().enumerate() {
            let _ = write!(out, "Route #{}:", i + 1);
            for c in &r.customers {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "Cost {}", self.cost);
        out
    }

    /// Parses a `.sol` file. Returns the solution and the declared cost, if any.
    pub fn parse_sol(instance: &Instance, text: &str) -> Result<(Self, Option<i64>), String> {
        let mut routes = Vec::new();
        let mut declared = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            if line.to_ascii_lowercase().starts_with("route") {
                let (_, body) = line
                    .split_once(':')
                    .ok_or_else(|| format!("route line without ':': {line}"))?;
                let route = body
                    .split_whitespace()
                    .map(|t| t.parse::<Node>().map_err(|_| format!("bad customer id {t:?}")))
                    .collect::<Result<Vec<_>, _>>()?;
                if let Some(&bad) = route.iter().find(|&&c| c == 0 || c as usize > instance.num_customers()) {
                    return Err(format!("customer id {bad} out of range"));
                }
                routes.push(route);
            } else if line.to_ascii_lowercase().starts_with("cost") {
                let v = line[4..].trim();
                declared = Some(
                    v.parse::<f64>()
                        .map_err(|_| format!("bad cost {v:?}"))?
                        .round() as i64,
                );
            }
        }
        Ok((Solution::from_routes(instance, routes), declared))
    }
}

/// First violation found by [`Solution::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    CustomerMissing(Node),
    Duplicate(Node),
    UnknownNode(Node),
    EmptyRoute(usize),
    CapacityExceeded { route: usize, load: i64 },
    CacheMismatch(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CustomerMissing(c) => write!(f, "customer missing: {c}"),
            Violation::Duplicate(c) => write!(f, "customer visited twice: {c}"),
            Violation::UnknownNode(c) => write!(f, "unknown node in route: {c}"),
            Violation::EmptyRoute(r) => write!(f, "empty route {r}"),
            Violation::CapacityExceeded { route, load } => {
                write!(f, "capacity exceeded: route {route} carries {load}")
            }
            Violation::CacheMismatch(what) => write!(f, "cached value out of date: {what}"),
        }
    }
}

/// Proximity distance between two solutions over the same instance.
///
/// For each customer `c`: +1 when `next_i(c)` is neither `next_j(c)` nor
/// `prev_j(c)`; +1 more when `c` starts a route in `S_i` but touches the depot
/// on neither side in `S_j`. Not symmetric in its arguments.
pub fn proximity(instance: &Instance, si: &Solution, sj: &Solution) -> usize {
    let dim = instance.dimension();
    assert!(
        si.route_of.len() == dim && sj.route_of.len() == dim,
        "proximity: solutions belong to a different instance"
    );
    let (next_i, prev_i) = si.adjacency(dim);
    let (next_j, prev_j) = sj.adjacency(dim);
    let mut delta = 0;
    for c in instance.customers() {
        let c = c as usize;
        if next_i[c] != next_j[c] && next_i[c] != prev_j[c] {
            delta += 1;
        }
        if prev_i[c] == DEPOT && prev_j[c] != DEPOT && next_j[c] != DEPOT {
            delta += 1;
        }
    }
    delta
}

/// Percentage excess of `obtained` over `reference`.
pub fn gap(obtained: f64, reference: f64) -> f64 {
    assert!(reference > 0.0, "gap: reference must be positive, got {reference}");
    100.0 * (obtained - reference) / reference
}

/// A permutation of all customers, costed as the cycle depot → order → depot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GiantTour {
    order: Vec<Node>,
    pos: Vec<u32>,
    cost: i64,
}

impl GiantTour {
    pub fn new(instance: &Instance, order: Vec<Node>) -> Self {
        let mut pos = vec![u32::MAX; instance.dimension()];
        for (i, &c) in order.iter().enumerate() {
            pos[c as usize] = i as u32;
        }
        let cost = route_cost(instance, &order);
        GiantTour { order, pos, cost }
    }

    /// Concatenates the routes of `solution` in a random route order.
    pub fn concatenate<R: Rng + ?Sized>(instance: &Instance, solution: &Solution, rng: &mut R) -> Self {
        let mut heads: Vec<usize> = (0..solution.num_routes()).collect();
        heads.shuffle(rng);
        let order = heads
            .into_iter()
            .flat_map(|r| solution.route(r).customers().iter().copied())
            .collect();
        Self::new(instance, order)
    }

    pub fn order(&self) -> &[Node] {
        &self.order
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Index of customer `c` in the tour.
    pub fn position(&self, c: Node) -> usize {
        self.pos[c as usize] as usize
    }

    fn at(&self, i: isize) -> Node {
        if i < 0 || i as usize >= self.order.len() {
            DEPOT
        } else {
            self.order[i as usize]
        }
    }

    /// Cost change of exchanging the customers at positions `a` and `b`.
    pub fn swap_delta(&self, instance: &Instance, a: usize, b: usize) -> i64 {
        if a == b {
            return 0;
        }
        let (a, b) = (a.min(b) as isize, a.max(b) as isize);
        let (pa, x, na) = (self.at(a - 1), self.at(a), self.at(a + 1));
        let (pb, y, nb) = (self.at(b - 1), self.at(b), self.at(b + 1));
        let d = |u, v| instance.distance(u, v);
        if b == a + 1 {
            // pa x y nb -> pa y x nb
            d(pa, y) + d(x, nb) - d(pa, x) - d(y, nb)
        } else {
            d(pa, y) + d(y, na) + d(pb, x) + d(x, nb) - d(pa, x) - d(x, na) - d(pb, y) - d(y, nb)
        }
    }

    /// Exchanges positions `a` and `b`, updating the cost incrementally.
    pub fn swap(&mut self, instance: &Instance, a: usize, b: usize) {
        let delta = self.swap_delta(instance, a, b);
        self.order.swap(a, b);
        self.pos[self.order[a] as usize] = a as u32;
        self.pos[self.order[b] as usize] = b as u32;
        self.cost += delta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line_instance(n: usize, cap: i64) -> Instance {
        let coords = (0..=n).map(|i| (i as f64 * 3.0, (i % 3) as f64 * 4.0)).collect();
        let mut demands = vec![1; n + 1];
        demands[0] = 0;
        Instance::new("line", coords, demands, cap).unwrap()
    }

    #[test]
    fn single_route_cost() {
        let inst = Instance::new("p", vec![(0.0, 0.0), (3.0, 4.0)], vec![0, 1], 1).unwrap();
        let s = Solution::from_routes(&inst, vec![vec![1]]);
        assert_eq!(s.cost(), 10);
        assert!(s.is_feasible(&inst));
    }

    #[test]
    fn feasibility_report() {
        let inst = line_instance(4, 2);
        let s = Solution::from_routes(&inst, vec![vec![1, 2], vec![3]]);
        assert_eq!(s.check(&inst), Err(Violation::CustomerMissing(4)));
        assert!(s.check(&inst).unwrap_err().to_string().contains("customer missing"));
        let s = Solution::from_routes(&inst, vec![vec![1, 2, 3], vec![4]]);
        assert!(matches!(s.check(&inst), Err(Violation::CapacityExceeded { load: 3, .. })));
        assert!(s.check(&inst).unwrap_err().to_string().contains("capacity exceeded"));
        let s = Solution::from_routes(&inst, vec![vec![1, 2], vec![3, 4]]);
        assert!(s.is_feasible(&inst));
    }

    #[test]
    fn proximity_cases() {
        let inst = line_instance(3, 10);
        let a = Solution::from_routes(&inst, vec![vec![1, 2, 3]]);
        let b = Solution::from_routes(&inst, vec![vec![3, 2, 1]]);
        assert_eq!(proximity(&inst, &a, &a), 0);
        assert_eq!(proximity(&inst, &a, &b), 0);
        assert_eq!(proximity(&inst, &b, &a), 0);

        // Hand trace: S_i = {(1,2),(3)}, S_j = {(1,3,2)}.
        // next_i = [_,2,D,D] prev_i = [_,D,1,D]; next_j = [_,3,D,2] prev_j = [_,D,3,1].
        // c=1: next_i 2 vs {3, D} -> +1; prev_i D, prev_j D -> no.
        // c=2: next_i D vs {D, 3} -> no; prev_i 1 -> no.
        // c=3: next_i D vs {2, 1} -> +1; prev_i D, prev_j 1, next_j 2 -> +1.
        let si = Solution::from_routes(&inst, vec![vec![1, 2], vec![3]]);
        let sj = Solution::from_routes(&inst, vec![vec![1, 3, 2]]);
        assert_eq!(proximity(&inst, &si, &sj), 3);
    }

    #[test]
    fn gap_values() {
        assert_eq!(format!("{:.2}", gap(27630.4, 27591.0)), "0.14");
        assert_eq!(format!("{:.2}", gap(18200.0, 18200.0)), "0.00");
        assert!((gap(110.0, 100.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    #[should_panic]
    fn gap_rejects_nonpositive_reference() {
        gap(1.0, 0.0);
    }

    #[test]
    fn canonical_ignores_orientation_and_order() {
        let inst = line_instance(5, 10);
        let a = Solution::from_routes(&inst, vec![vec![4, 5], vec![3, 2, 1]]);
        let b = Solution::from_routes(&inst, vec![vec![1, 2, 3], vec![5, 4]]);
        assert_eq!(a.canonical(), b.canonical());
        assert_eq!(a.canonical(), vec![vec![1, 2, 3], vec![4, 5]]);
    }

    #[test]
    fn sol_round_trip() {
        let inst = line_instance(5, 3);
        let s = Solution::from_routes(&inst, vec![vec![4, 5], vec![3, 2, 1]]);
        let (t, declared) = Solution::parse_sol(&inst, &s.to_sol_string()).unwrap();
        assert_eq!(s, t);
        assert_eq!(declared, Some(s.cost()));
    }

    #[test]
    fn giant_tour_swap_delta_matches_recompute() {
        let inst = line_instance(9, 100);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut order: Vec<Node> = inst.customers().collect();
        order.shuffle(&mut rng);
        let mut t = GiantTour::new(&inst, order);
        for _ in 0..500 {
            let a = rng.gen_range(0..t.len());
            let b = rng.gen_range(0..t.len());
            t.swap(&inst, a, b);
            assert_eq!(t.cost(), route_cost(&inst, t.order()));
            for (i, &c) in t.order().iter().enumerate() {
                assert_eq!(t.position(c), i);
            }
        }
    }

    #[test]
    fn structural_edits_keep_cache() {
        let inst = line_instance(6, 3);
        let mut s = Solution::from_routes(&inst, vec![vec![1, 2], vec![3, 4], vec![5, 6]]);
        let freed = s.remove_routes(&inst, vec![0, 2]);
        assert_eq!(freed, vec![1, 2, 5, 6]);
        assert_eq!(s.num_routes(), 1);
        s.insert(&inst, 1, 0, 1);
        s.push_route(&inst, vec![2, 5]);
        s.push_route(&inst, vec![6]);
        assert!(s.is_feasible(&inst));
        assert_eq!(s.cost(), s.recompute_cost(&inst));
        assert_eq!(s.next(1), 4);
        assert_eq!(s.prev(3), DEPOT);
        assert_eq!(s.next(4), DEPOT);
    }
}
