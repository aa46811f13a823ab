#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mscvrp::instance::{Instance, Node};
use mscvrp::features::{instance_features, solution_features};
use mscvrp::solution::{route_cost, Solution};

#[derive(Debug, Clone, Copy)]
pub enum DepotPos {
    Central,
    Eccentric,
    Random,
}

#[derive(Debug, Clone, Copy)]
pub enum CustomerPos {
    Random,
    Clustered,
    RandomClustered,
}

#[derive(Debug, Clone, Copy)]
pub enum DemandKind {
    Unitary,
    Small,
    Large,
    SmallManyLargeFew,
}

/// A 100-customer instance on the 1000 × 1000 grid in the style of the
/// XML100 generator: depot placement, customer layout, demand profile and
/// target average route size.
pub fn xml_like(
    seed: u64,
    depot: DepotPos,
    layout: CustomerPos,
    demand: DemandKind,
    route_size: f64,
) -> Instance {
    let n = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot_xy = match depot {
        DepotPos::Central => (500.0, 500.0),
        DepotPos::Eccentric => (0.0, 0.0),
        DepotPos::Random => (rng.gen_range(0.0..=1000.0f64).round(), rng.gen_range(0.0..=1000.0f64).round()),
    };
    let uniform = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..=1000.0f64).round(), rng.gen_range(0.0..=1000.0f64).round());
    let seeds: Vec<(f64, f64)> = (0..rng.gen_range(3..=8)).map(|_| uniform(&mut rng)).collect();
    let clustered = |rng: &mut ChaCha8Rng| loop {
        let (sx, sy): (f64, f64) = *seeds.choose(rng).unwrap();
        let x = (sx + rng.gen_range(-60.0..=60.0f64)).round();
        let y = (sy + rng.gen_range(-60.0..=60.0f64)).round();
        if (0.0..=1000.0).contains(&x) && (0.0..=1000.0).contains(&y) {
            return (x, y);
        }
    };
    let mut coords = vec![depot_xy];
    for i in 0..n {
        coords.push(match layout {
            CustomerPos::Random => uniform(&mut rng),
            CustomerPos::Clustered => clustered(&mut rng),
            CustomerPos::RandomClustered if i % 2 == 0 => uniform(&mut rng),
            CustomerPos::RandomClustered => clustered(&mut rng),
        });
    }
    let mut demands = vec![0i64];
    for _ in 0..n {
        demands.push(match demand {
            DemandKind::Unitary => 1,
            DemandKind::Small => rng.gen_range(1..=10),
            DemandKind::Large => rng.gen_range(50..=100),
            DemandKind::SmallManyLargeFew => {
                if rng.gen_bool(0.8) {
                    rng.gen_range(1..=10)
                } else {
                    rng.gen_range(50..=100)
                }
            }
        });
    }
    let total: i64 = demands.iter().sum();
    let max = *demands.iter().max().unwrap();
    let capacity = ((route_size * total as f64 / n as f64).ceil() as i64).max(max);
    Instance::new(&format!("XL100_{seed}"), coords, demands, capacity).unwrap()
}

/// Three structurally different 100-customer instances.
pub fn fuzz_trio() -> Vec<Instance> {
    vec![
        xml_like(1, DepotPos::Central, CustomerPos::Random, DemandKind::Small, 6.0),
        xml_like(2, DepotPos::Eccentric, CustomerPos::Clustered, DemandKind::SmallManyLargeFew, 12.0),
        xml_like(3, DepotPos::Random, CustomerPos::RandomClustered, DemandKind::Unitary, 25.0),
    ]
}

/// Random instance with `n` customers on a 100 × 100 grid.
pub fn random_instance(n: usize, rng: &mut impl Rng) -> Instance {
    let coords = (0..=n)
        .map(|_| (rng.gen_range(0..=100) as f64, rng.gen_range(0..=100) as f64))
        .collect();
    let demands: Vec<i64> = (0..=n).map(|i| if i == 0 { 0 } else { rng.gen_range(1..=10) }).collect();
    let max = *demands.iter().max().unwrap();
    let total: i64 = demands.iter().sum();
    let capacity = rng.gen_range(max..=total.max(max));
    Instance::new("rand", coords, demands, capacity).unwrap()
}

/// Generated corpus of instances with 3 to 8 customers.
pub fn small_corpus(count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..count)
        .map(|k| {
            let n = 3 + k % 6;
            random_instance(n, &mut rng)
        })
        .collect()
}

/// Random feasible solution: a shuffled customer order cut greedily by capacity.
pub fn random_solution(instance: &Instance, rng: &mut impl Rng) -> Solution {
    let mut order: Vec<Node> = instance.customers().collect();
    order.shuffle(rng);
    let mut routes: Vec<Vec<Node>> = vec![Vec::new()];
    let mut load = 0;
    for c in order {
        let q = instance.demand(c);
        if load + q > instance.capacity() || (rng.gen_bool(0.15) && !routes.last().unwrap().is_empty()) {
            routes.push(Vec::new());
            load = 0;
        }
        routes.last_mut().unwrap().push(c);
        load += q;
    }
    Solution::from_routes(instance, routes)
}

/// Optimal CVRP cost by enumeration: Held–Karp for the shortest closed tour
/// of every capacity-feasible customer subset, then the cheapest partition
/// of all customers into such subsets.
pub fn brute_force_optimum(instance: &Instance) -> i64 {
    let n = instance.num_customers();
    assert!(n <= 12, "enumeration oracle is exponential");
    let full = (1usize << n) - 1;
    let d = |a: usize, b: usize| instance.distance(a as Node, b as Node);
    // hk[mask][j]: shortest depot path visiting mask and ending at customer j+1.
    let mut hk = vec![vec![i64::MAX; n]; full + 1];
    for j in 0..n {
        hk[1 << j][j] = d(0, j + 1);
    }
    for mask in 1..=full {
        for j in 0..n {
            let cur = hk[mask][j];
            if cur == i64::MAX || mask & (1 << j) == 0 {
                continue;
            }
            for k in 0..n {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let v = cur + d(j + 1, k + 1);
                if v < hk[next][k] {
                    hk[next][k] = v;
                }
            }
        }
    }
    let mut route = vec![i64::MAX; full + 1];
    for mask in 1..=full {
        let load: i64 = (0..n).filter(|j| mask & (1 << j) != 0).map(|j| instance.demand(j as Node + 1)).sum();
        if load > instance.capacity() {
            continue;
        }
        route[mask] = (0..n)
            .filter(|j| mask & (1 << j) != 0)
            .map(|j| hk[mask][j] + d(j + 1, 0))
            .min()
            .unwrap();
    }
    let mut part = vec![i64::MAX; full + 1];
    part[0] = 0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        loop {
            let s = sub | low;
            if route[s] != i64::MAX && part[mask ^ s] != i64::MAX {
                part[mask] = part[mask].min(route[s] + part[mask ^ s]);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    part[full]
}

// Feature oracle fixture.

/// Values printed by tests/data/feature_oracle.py for the same fixture.
pub const TWO_ROUTE_EXPECTED: [f64; 31] = [
    6.0,
    2.0,
    0.9,
    212.8285682925518,
    381.756028257628,
    28.631324083504428,
    3.2270649035936487,
    2.8645803483036865,
    1.8858221516860316,
    43.422846160179134,
    4.149941317696019,
    1.8178757390418068,
    0.14992858909736162,
    31.96996093998576,
    1.5561482884946614,
    0.26118328383176137,
    31.46849578409295,
    0.3124131161053981,
    0.2721576953393156,
    27.990812377457498,
    4.5,
    6.5,
    0.5,
    6.829032462626856,
    31.90317382330479,
    0.5,
    3.6666666666666665,
    0.9,
    0.09999999999999998,
    0.02278539227794491,
    0.0023088883834798696,
];

pub fn two_route_fixture() -> (Instance, Solution) {
    let coords = vec![(50.0, 50.0), (62.0, 71.0), (80.0, 55.0), (74.0, 33.0), (31.0, 66.0), (22.0, 41.0), (40.0, 18.0)];
    let inst = Instance::new("two-route", coords, vec![0, 7, 3, 5, 4, 6, 2], 15).unwrap();
    let sol = Solution::from_routes(&inst, vec![vec![1, 2, 3], vec![6, 5, 4]]);
    (inst, sol)
}

pub fn scaled(inst: &Instance, lambda: f64) -> Instance {
    let coords = (0..inst.dimension() as u32)
        .map(|i| {
            let (x, y) = inst.coord(i);
            (x * lambda, y * lambda)
        })
        .collect();
    let demands = (0..inst.dimension() as u32).map(|i| inst.demand(i)).collect();
    Instance::new("scaled", coords, demands, inst.capacity()).unwrap()
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Exponent of λ picked up by each feature when all coordinates scale by λ.
const SOLUTION_SCALING: [i32; 22] = [1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 0, -1, -1];
const INSTANCE_SCALING: [i32; 9] = [0, 0, 0, 1, 1, 1, 1, 0, 0];

pub fn check_scaling(inst: &Instance, sol: &Solution, lambda: f64) -> Result<(), String> {
    let big = scaled(inst, lambda);
    let routes: Vec<Vec<u32>> = sol.routes().iter().map(|r| r.customers().to_vec()).collect();
    let big_sol = Solution::from_routes(&big, routes);
    let (a, b) = (solution_features(inst, sol), solution_features(&big, &big_sol));
    for k in 0..22 {
        let want = a[k] * lambda.powi(SOLUTION_SCALING[k]);
        if !close(b[k], want) {
            return Err(format!("s{:02}: {} vs {}", k + 1, b[k], want));
        }
    }
    let r = sol.num_routes();
    let (a, b) = (instance_features(inst, r), instance_features(&big, r));
    for k in 0..9 {
        let want = a[k] * lambda.powi(INSTANCE_SCALING[k]);
        if !close(b[k], want) {
            return Err(format!("i{:02}: {} vs {}", k + 1, b[k], want));
        }
    }
    Ok(())
}


/// Cheapest cut of `order` into contiguous capacity-feasible routes, by
/// enumerating every subset of cut points.
pub fn split_reference(inst: &Instance, order: &[Node]) -> i64 {
    let n = order.len();
    let mut best = i64::MAX;
    for cuts in 0u32..(1 << (n - 1)) {
        let mut total = 0;
        let mut start = 0;
        let mut ok = true;
        for end in 1..=n {
            if end == n || cuts & (1 << (end - 1)) != 0 {
                let seg = &order[start..end];
                let load: i64 = seg.iter().map(|&c| inst.demand(c)).sum();
                if load > inst.capacity() {
                    ok = false;
                    break;
                }
                total += route_cost(inst, seg);
                start = end;
            }
        }
        if ok {
            best = best.min(total);
        }
    }
    best
}

/// P(W+ ≤ observed) by flipping the sign of every non-zero difference.
pub fn sign_flip_p(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()));
    let mut rank = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && d[order[j + 1]].abs() == d[order[i]].abs() {
            j += 1;
        }
        for &k in &order[i..=j] {
            rank[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    let observed: f64 = (0..n).filter(|&k| d[k] > 0.0).map(|k| rank[k]).sum();
    let mut hits = 0u64;
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n).filter(|&k| mask & (1 << k) != 0).map(|k| rank[k]).sum();
        if w <= observed + 1e-9 {
            hits += 1;
        }
    }
    hits as f64 / (1u64 << n) as f64
}

/// Paired samples with a few deliberate ties and zero differences.
pub fn random_pairs(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let shift = rng.gen_range(-1.0..1.0);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen_range(0.0..5.0);
        let d = match rng.gen_range(0..10) {
            0 => 0.0,
            1 | 2 => (rng.gen_range(-3..=3) as f64) * 0.5,
            _ => rng.gen_range(-2.0..2.0) + shift,
        };
        a.push(x + d);
        b.push(x);
    }
    (a, b)
}

