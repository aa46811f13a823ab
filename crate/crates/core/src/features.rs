//! Instance and solution features (I01–I09, S01–S22) and the CSV dataset export.
//!
//! Geometric features use the unrounded Euclidean metric. Standard deviations
//! are population deviations. Angles are polar angles around the depot.

use std::f64::consts::PI;
use std::io::Write;

use crate::instance::{Instance, Node, DEPOT};
use crate::solution::Solution;

pub const INSTANCE_FEATURES: usize = 9;
pub const SOLUTION_FEATURES: usize = 22;

/// One dataset row: nine instance features, 22 solution features and an
/// optional label (1 optimal, 0 near-optimal).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub instance: [f64; INSTANCE_FEATURES],
    pub solution: [f64; SOLUTION_FEATURES],
    pub label: Option<u8>,
}

impl FeatureVector {
    pub fn compute(instance: &Instance, solution: &Solution, label: Option<u8>) -> Self {
        FeatureVector {
            instance: instance_features(instance, solution.num_routes()),
            solution: solution_features(instance, solution),
            label,
        }
    }

    pub fn s19(&self) -> f64 {
        self.solution[18]
    }

    pub fn s20(&self) -> f64 {
        self.solution[19]
    }
}

/// CSV header: `i01..i09,s01..s22,label`.
pub fn csv_header() -> Vec<String> {
    (1..=INSTANCE_FEATURES)
        .map(|i| format!("i{i:02}"))
        .chain((1..=SOLUTION_FEATURES).map(|i| format!("s{i:02}")))
        .chain(std::iter::once("label".to_string()))
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    std_dev_around(xs, m, xs.len() as f64)
}

fn std_dev_around(xs: &[f64], center: f64, divisor: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    (xs.iter().map(|x| (x - center).powi(2)).sum::<f64>() / divisor).sqrt()
}

/// Polar angle of `node` around the depot in `[0, 2π)`.
pub fn polar_angle(instance: &Instance, node: Node) -> f64 {
    let (dx, dy) = sub(instance.coord(node), instance.coord(DEPOT));
    let a = dy.atan2(dx);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Angle spanned at the depot between two nodes, in `[0, π]`.
pub fn angle_between(instance: &Instance, a: Node, b: Node) -> f64 {
    let diff = (polar_angle(instance, a) - polar_angle(instance, b)).abs();
    if diff > PI {
        2.0 * PI - diff
    } else {
        diff
    }
}

fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 - b.0, a.1 - b.1)
}

/// I01–I09 for an instance solved with `routes` vehicles.
pub fn instance_features(instance: &Instance, routes: usize) -> [f64; INSTANCE_FEATURES] {
    assert!(routes >= 1, "instance features need at least one route");
    let n = instance.num_customers();
    let nf = n as f64;
    let customers: Vec<Node> = instance.customers().collect();

    let mut pair = Vec::with_capacity(n * n.saturating_sub(1));
    for &i in &customers {
        for &j in &customers {
            if i != j {
                pair.push(instance.exact_distance(i, j));
            }
        }
    }
    // Sums over ordered pairs divided by N.
    let i04 = pair.iter().sum::<f64>() / nf;
    let i05 = std_dev_around(&pair, i04, nf);

    let depot_d: Vec<f64> = customers
        .iter()
        .map(|&c| instance.exact_distance(c, DEPOT))
        .collect();
    let angles: Vec<f64> = customers.iter().map(|&c| polar_angle(instance, c)).collect();

    [
        nf,
        routes as f64,
        instance.total_demand() as f64 / (instance.capacity() * routes as i64) as f64,
        i04,
        i05,
        mean(&depot_d),
        std_dev(&depot_d),
        mean(&angles),
        std_dev(&angles),
    ]
}

/// Per-route quantities shared by several solution features.
struct RouteStats {
    width: f64,
    span: f64,
    depth: f64,
    length: f64,
    end_edges: f64,
    longest_edge: f64,
    longest_interior: f64,
    end_demand: f64,
    max_demand: f64,
    size: f64,
    avg_rank: f64,
    utilization: f64,
    diameter: f64,
    gravity: (f64, f64),
}

fn route_stats(instance: &Instance, route: &[Node]) -> RouteStats {
    let d = |a: Node, b: Node| instance.exact_distance(a, b);
    let depot = instance.coord(DEPOT);
    let m = route.len();
    let first = route[0];
    let last = route[m - 1];

    let (sx, sy) = route.iter().fold(depot, |acc, &c| {
        let p = instance.coord(c);
        (acc.0 + p.0, acc.1 + p.1)
    });
    let gravity = (sx / (m + 1) as f64, sy / (m + 1) as f64);

    // Signed distance to the line depot -> gravity centre, positive on the right.
    let (gx, gy) = sub(gravity, depot);
    let norm = (gx * gx + gy * gy).sqrt();
    let offsets: Vec<f64> = route
        .iter()
        .map(|&c| {
            if norm == 0.0 {
                return 0.0;
            }
            let (cx, cy) = sub(instance.coord(c), depot);
            -(gx * cy - gy * cx) / norm
        })
        .collect();
    let width = offsets.iter().cloned().fold(f64::MIN, f64::max)
        - offsets.iter().cloned().fold(f64::MAX, f64::min);

    let mut span = 0.0f64;
    let mut rank_sum = 0.0;
    for (a, &i) in route.iter().enumerate() {
        for (b, &j) in route.iter().enumerate() {
            if a != b {
                span = span.max(angle_between(instance, i, j));
                rank_sum += instance.neighbors().rank(i, j).unwrap_or(0) as f64;
            }
        }
    }

    let depth = route.iter().map(|&c| d(c, DEPOT)).fold(0.0, f64::max);
    let interior: Vec<f64> = route.windows(2).map(|w| d(w[0], w[1])).collect();
    let end_edges = d(DEPOT, first) + d(last, DEPOT);
    let length = end_edges + interior.iter().sum::<f64>();
    let longest_interior = interior.iter().cloned().fold(0.0, f64::max);
    let longest_edge = longest_interior.max(d(DEPOT, first)).max(d(last, DEPOT));

    let mut diameter = depth;
    for (a, &i) in route.iter().enumerate() {
        for &j in &route[a + 1..] {
            diameter = diameter.max(d(i, j));
        }
    }

    let load: i64 = route.iter().map(|&c| instance.demand(c)).sum();
    RouteStats {
        width,
        span,
        depth,
        length,
        end_edges,
        longest_edge,
        longest_interior,
        end_demand: (instance.demand(first) + instance.demand(last)) as f64,
        max_demand: route.iter().map(|&c| instance.demand(c)).max().unwrap_or(0) as f64,
        size: m as f64,
        avg_rank: rank_sum / m as f64,
        utilization: load as f64 / instance.capacity() as f64,
        diameter,
        gravity,
    }
}

/// Mean and standard deviation of per-route capacity utilization (S19, S20).
pub fn capacity_utilization(instance: &Instance, solution: &Solution) -> (f64, f64) {
    let u: Vec<f64> = solution
        .routes()
        .iter()
        .map(|r| r.load() as f64 / instance.capacity() as f64)
        .collect();
    (mean(&u), std_dev(&u))
}

/// S01–S22 of a solution.
pub fn solution_features(instance: &Instance, solution: &Solution) -> [f64; SOLUTION_FEATURES] {
    let stats: Vec<RouteStats> = solution
        .routes()
        .iter()
        .map(|r| route_stats(instance, r.customers()))
        .collect();
    let r = stats.len() as f64;
    let col = |f: fn(&RouteStats) -> f64| stats.iter().map(f).collect::<Vec<f64>>();

    let width = col(|s| s.width);
    let span = col(|s| s.span);
    let depth = col(|s| s.depth);
    let length = col(|s| s.length);
    let max_demand = col(|s| s.max_demand);
    let utilization = col(|s| s.utilization);
    let inv_diameter = col(|s| if s.diameter > 0.0 { 1.0 / s.diameter } else { 0.0 });
    let mean_length = mean(&length);

    let s07 = stats
        .iter()
        .map(|s| if s.length > 0.0 { s.end_edges / s.length } else { 0.0 })
        .sum::<f64>()
        / (2.0 * r);
    let ratio = |x: f64| if mean_length > 0.0 { x / mean_length } else { 0.0 };

    let mut s16 = 0.0;
    if stats.len() > 1 {
        for (a, sa) in stats.iter().enumerate() {
            for (b, sb) in stats.iter().enumerate() {
                if a != b {
                    let (dx, dy) = sub(sa.gravity, sb.gravity);
                    s16 += (dx * dx + dy * dy).sqrt();
                }
            }
        }
        s16 /= r * (r - 1.0);
    }

    let sizes = col(|s| s.size);
    let s17 = std_dev_around(&sizes, instance.dimension() as f64 / r, r);

    [
        mean(&width),
        std_dev(&width),
        mean(&span),
        std_dev(&span),
        mean(&depth),
        std_dev(&depth),
        s07,
        mean(&col(|s| s.longest_edge)),
        ratio(stats.iter().map(|s| s.longest_edge).fold(0.0, f64::max)),
        ratio(stats.iter().map(|s| s.longest_interior).fold(0.0, f64::max)),
        stats.iter().map(|s| s.end_edges).sum::<f64>() / (2.0 * r),
        stats.iter().map(|s| s.end_demand).sum::<f64>() / (2.0 * r),
        mean(&max_demand),
        std_dev(&max_demand),
        std_dev(&length),
        s16,
        s17,
        mean(&col(|s| s.avg_rank)),
        mean(&utilization),
        std_dev(&utilization),
        mean(&inv_diameter),
        std_dev(&inv_diameter),
    ]
}

/// Mean S19 and mean S20 over a set of solutions.
pub fn pool_guidance_stats<'a>(
    instance: &Instance,
    pool: impl IntoIterator<Item = &'a Solution>,
) -> (f64, f64) {
    let (mut a, mut b, mut k) = (0.0, 0.0, 0usize);
    for s in pool {
        let (u, sd) = capacity_utilization(instance, s);
        a += u;
        b += sd;
        k += 1;
    }
    assert!(k > 0, "pool guidance statistics need a non-empty pool");
    (a / k as f64, b / k as f64)
}

/// Writes the dataset as CSV, header first.
pub fn export_dataset<W: Write>(out: W, rows: &[FeatureVector], with_header: bool) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if with_header {
        w.write_record(csv_header())?;
    }
    for row in rows {
        let mut rec: Vec<String> = row
            .instance
            .iter()
            .chain(row.solution.iter())
            .map(|v| v.to_string())
            .collect();
        rec.push(row.label.map(|l| l.to_string()).unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
