//! CVRP instances in the CVRPLIB keyword-section format.
//!
//! Node 0 is always the depot; customers are `1..=N` in file order. Distances
//! are Euclidean lengths rounded half away from zero, the convention under
//! which published CVRPLIB costs are integral.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Dense node index. The depot is `0`.
pub type Node = u32;

/// The depot index.
pub const DEPOT: Node = 0;

#[derive(Debug, Error, PartialEq)]
pub enum InstanceError {
    #[error("missing or malformed section {0}")]
    Section(String),
    #[error("malformed line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("unsupported format: {0}")]
    Unsupported(String),
    #[error("infeasible instance: customer {customer} has demand {demand} > capacity {capacity}")]
    Infeasible {
        customer: usize,
        demand: i64,
        capacity: i64,
    },
    #[error("degenerate instance: {0}")]
    Degenerate(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Instance class from the estimated number of customers per route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum RouteClass {
    Long,
    Short,
}

/// Immutable CVRP problem data together with its distance oracle and
/// nearest-neighbour rankings.
#[derive(Debug, Clone)]
pub struct Instance {
    name: String,
    coords: Vec<(f64, f64)>,
    demands: Vec<i64>,
    capacity: i64,
    /// Original 1-based file ids, indexed by dense node id.
    file_ids: Vec<usize>,
    dist: Vec<i64>,
    ranks: NeighborRanks,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.coords == other.coords
            && self.demands == other.demands
            && self.capacity == other.capacity
            && self.file_ids == other.file_ids
    }
}

/// Per-node lists of customers sorted by ascending distance, with the
/// inverse rank lookup.
#[derive(Debug, Clone)]
pub struct NeighborRanks {
    dim: usize,
    lists: Vec<Vec<Node>>,
    /// `rank[i * dim + j]` = 1-based position of `j` in `lists[i]`, 0 when absent.
    rank: Vec<u32>,
}

impl NeighborRanks {
    fn build(dim: usize, coords: &[(f64, f64)]) -> Self {
        let mut lists = Vec::with_capacity(dim);
        let mut rank = vec![0u32; dim * dim];
        for i in 0..dim {
            let mut list: Vec<Node> = (1..dim as Node).filter(|&j| j as usize != i).collect();
            // Rounded distances tie often, so order by the exact length. Lengths
            // equal up to float noise count as ties and go by id, which keeps
            // the ranks unchanged when all coordinates are scaled.
            let exact: Vec<f64> = (0..dim).map(|j| euclid(coords[i], coords[j])).collect();
            list.sort_by(|&a, &b| exact[a as usize].total_cmp(&exact[b as usize]).then(a.cmp(&b)));
            let mut start = 0;
            while start < list.len() {
                let base = exact[list[start] as usize];
                let mut end = start + 1;
                while end < list.len() && exact[list[end] as usize] - base <= 1e-9 * base.max(1e-9) {
                    end += 1;
                }
                list[start..end].sort_unstable();
                start = end;
            }
            for (pos, &j) in list.iter().enumerate() {
                rank[i * dim + j as usize] = pos as u32 + 1;
            }
            lists.push(list);
        }
        NeighborRanks { dim, lists, rank }
    }

    /// Customers ordered by distance from `node` (never contains `node` or the depot).
    pub fn list(&self, node: Node) -> &[Node] {
        &self.lists[node as usize]
    }

    /// 1-based rank of `to` in the list of `from`; `None` for the depot or `from == to`.
    pub fn rank(&self, from: Node, to: Node) -> Option<u32> {
        match self.rank[from as usize * self.dim + to as usize] {
            0 => None,
            r => Some(r),
        }
    }
}

pub(crate) fn euclid(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    (dx * dx + dy * dy).sqrt()
}

impl Instance {
    /// Builds an instance from raw data. `coords[0]` and `demands[0]` belong to the depot.
    pub fn new(
        name: impl Into<String>,
        coords: Vec<(f64, f64)>,
        demands: Vec<i64>,
        capacity: i64,
    ) -> Result<Self, InstanceError> {
        let file_ids = (1..=coords.len()).collect();
        Self::with_file_ids(name.into(), coords, demands, capacity, file_ids)
    }

    fn with_file_ids(
        name: String,
        coords: Vec<(f64, f64)>,
        mut demands: Vec<i64>,
        capacity: i64,
        file_ids: Vec<usize>,
    ) -> Result<Self, InstanceError> {
        if coords.len() != demands.len() {
            return Err(InstanceError::Section(format!(
                "DEMAND_SECTION ({} demands for {} nodes)",
                demands.len(),
                coords.len()
            )));
        }
        if coords.len() < 2 {
            return Err(InstanceError::Degenerate("an instance needs at least one customer".into()));
        }
        if capacity <= 0 {
            return Err(InstanceError::Section("CAPACITY".into()));
        }
        if demands[0] != 0 {
            log::warn!("depot demand {} ignored", demands[0]);
            demands[0] = 0;
        }
        for (c, &q) in demands.iter().enumerate().skip(1) {
            if q < 0 {
                return Err(InstanceError::Malformed {
                    line: 0,
                    msg: format!("negative demand for customer {c}"),
                });
            }
            if q > capacity {
                return Err(InstanceError::Infeasible {
                    customer: c,
                    demand: q,
                    capacity,
                });
            }
        }
        let dim = coords.len();
        let mut dist = vec![0i64; dim * dim];
        for i in 0..dim {
            for j in (i + 1)..dim {
                let d = euclid(coords[i], coords[j]).round() as i64;
                dist[i * dim + j] = d;
                dist[j * dim + i] = d;
            }
        }
        let ranks = NeighborRanks::build(dim, &coords);
        Ok(Instance {
            name,
            coords,
            demands,
            capacity,
            file_ids,
            dist,
            ranks,
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| InstanceError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Parses the CVRPLIB keyword-section format (EUC_2D only).
    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        #[derive(PartialEq)]
        enum Sect {
            Header,
            Coords,
            Demands,
            Depots,
        }
        let mut name = String::new();
        let mut dimension: Option<usize> = None;
        let mut capacity: Option<i64> = None;
        let mut weight_type: Option<String> = None;
        let mut coords: Vec<(usize, f64, f64)> = Vec::new();
        let mut demands: Vec<(usize, i64)> = Vec::new();
        let mut depots: Vec<usize> = Vec::new();
        let (mut seen_coords, mut seen_demands, mut seen_depots) = (false, false, false);
        let mut sect = Sect::Header;

        let malformed = |line: usize, msg: &str| InstanceError::Malformed {
            line: line + 1,
            msg: msg.to_string(),
        };

        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let upper = line.to_ascii_uppercase();
            if upper == "EOF" {
                break;
            }
            if upper.starts_with("NODE_COORD_SECTION") {
                sect = Sect::Coords;
                seen_coords = true;
                continue;
            }
            if upper.starts_with("DEMAND_SECTION") {
                sect = Sect::Demands;
                seen_demands = true;
                continue;
            }
            if upper.starts_with("DEPOT_SECTION") {
                sect = Sect::Depots;
                seen_depots = true;
                continue;
            }
            if let Some((key, value)) = line.split_once(':') {
                let key = key.trim().to_ascii_uppercase();
                let value = value.trim();
                if key.chars().all(|c| c.is_ascii_uppercase() || c == '_') && !key.is_empty() {
                    sect = Sect::Header;
                    match key.as_str() {
                        "NAME" => name = value.to_string(),
                        "DIMENSION" => {
                            dimension = Some(
                                value
                                    .parse()
                                    .map_err(|_| InstanceError::Section("DIMENSION".into()))?,
                            )
                        }
                        "CAPACITY" => {
                            capacity = Some(
                                value
                                    .parse()
                                    .map_err(|_| InstanceError::Section("CAPACITY".into()))?,
                            )
                        }
                        "EDGE_WEIGHT_TYPE" => weight_type = Some(value.to_ascii_uppercase()),
                        "TYPE" => {
                            let t = value.to_ascii_uppercase();
                            if t != "CVRP" {
                                return Err(InstanceError::Unsupported(format!("TYPE {value}")));
                            }
                        }
                        _ => {}
                    }
                    continue;
                }
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            match sect {
                Sect::Header => {}
                Sect::Coords => {
                    if fields.len() != 3 {
                        return Err(malformed(ln, "NODE_COORD_SECTION expects `id x y`"));
                    }
                    let id = fields[0].parse().map_err(|_| malformed(ln, "bad node id"))?;
                    let x = fields[1].parse().map_err(|_| malformed(ln, "bad x coordinate"))?;
                    let y = fields[2].parse().map_err(|_| malformed(ln, "bad y coordinate"))?;
                    coords.push((id, x, y));
                }
                Sect::Demands => {
                    if fields.len() != 2 {
                        return Err(malformed(ln, "DEMAND_SECTION expects `id demand`"));
                    }
                    let id = fields[0].parse().map_err(|_| malformed(ln, "bad node id"))?;
                    let q = fields[1].parse().map_err(|_| malformed(ln, "bad demand"))?;
                    demands.push((id, q));
                }
                Sect::Depots => {
                    let id: i64 = fields[0].parse().map_err(|_| malformed(ln, "bad depot id"))?;
                    if id >= 0 {
                        depots.push(id as usize);
                    } else {
                        sect = Sect::Header;
                    }
                }
            }
        }

        match weight_type.as_deref() {
            Some("EUC_2D") => {}
            Some(other) => {
                return Err(InstanceError::Unsupported(format!("EDGE_WEIGHT_TYPE {other}")))
            }
            None => return Err(InstanceError::Section("EDGE_WEIGHT_TYPE".into())),
        }
        let dimension = dimension.ok_or_else(|| InstanceError::Section("DIMENSION".into()))?;
        let capacity = capacity.ok_or_else(|| InstanceError::Section("CAPACITY".into()))?;
        if !seen_coords || coords.len() != dimension {
            return Err(InstanceError::Section("NODE_COORD_SECTION".into()));
        }
        if !seen_demands || demands.len() != dimension {
            return Err(InstanceError::Section("DEMAND_SECTION".into()));
        }
        let depot_id = match (seen_depots, depots.as_slice()) {
            (false, _) | (true, []) => coords[0].0,
            (true, [d]) => *d,
            (true, _) => return Err(InstanceError::Unsupported("multiple depots".into())),
        };

        let demand_of = |id: usize| demands.iter().find(|(d, _)| *d == id).map(|&(_, q)| q);
        let depot = coords
            .iter()
            .find(|c| c.0 == depot_id)
            .ok_or_else(|| InstanceError::Section("DEPOT_SECTION".into()))?;
        let mut pts = vec![(depot.1, depot.2)];
        let mut qs = vec![demand_of(depot_id).ok_or_else(|| InstanceError::Section("DEMAND_SECTION".into()))?];
        let mut file_ids = vec![depot_id];
        for &(id, x, y) in coords.iter().filter(|c| c.0 != depot_id) {
            pts.push((x, y));
            qs.push(demand_of(id).ok_or_else(|| InstanceError::Section("DEMAND_SECTION".into()))?);
            file_ids.push(id);
        }
        Self::with_file_ids(name, pts, qs, capacity, file_ids)
    }

    /// Serializes back to the keyword-section format.
    pub fn to_vrp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME : {}", self.name);
        let _ = writeln!(out, "TYPE : CVRP");
        let _ = writeln!(out, "DIMENSION : {}", self.dimension());
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE : EUC_2D");
        let _ = writeln!(out, "CAPACITY : {}", self.capacity);
        let mut order: Vec<usize> = (0..self.dimension()).collect();
        order.sort_by_key(|&i| self.file_ids[i]);
        out.push_str("NODE_COORD_SECTION\n");
        for &i in &order {
            let (x, y) = self.coords[i];
            let _ = writeln!(out, "{} {} {}", self.file_ids[i], x, y);
        }
        out.push_str("DEMAND_SECTION\n");
        for &i in &order {
            let _ = writeln!(out, "{} {}", self.file_ids[i], self.demands[i]);
        }
        let _ = writeln!(out, "DEPOT_SECTION\n{}\n-1\nEOF", self.file_ids[0]);
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// V = N + 1.
    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    /// N, the number of customers.
    pub fn num_customers(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn customers(&self) -> impl Iterator<Item = Node> + Clone {
        1..self.coords.len() as Node
    }

    pub fn capacity(&self) -> i64 {
        self.capacity
    }

    #[inline]
    pub fn demand(&self, node: Node) -> i64 {
        self.demands[node as usize]
    }

    pub fn coord(&self, node: Node) -> (f64, f64) {
        self.coords[node as usize]
    }

    pub fn file_id(&self, node: Node) -> usize {
        self.file_ids[node as usize]
    }

    #[inline]
    pub fn distance(&self, i: Node, j: Node) -> i64 {
        self.dist[i as usize * self.coords.len() + j as usize]
    }

    /// Unrounded Euclidean distance.
    pub fn exact_distance(&self, i: Node, j: Node) -> f64 {
        euclid(self.coords[i as usize], self.coords[j as usize])
    }

    pub fn neighbors(&self) -> &NeighborRanks {
        &self.ranks
    }

    pub fn total_demand(&self) -> i64 {
        self.demands.iter().sum()
    }

    /// Fractional lower bound on the number of routes, `Σq / Q`.
    pub fn r_estimated(&self) -> f64 {
        self.total_demand() as f64 / self.capacity as f64
    }

    /// `ceil(Σq / Q)`, at least 1.
    pub fn min_routes(&self) -> usize {
        ((self.total_demand() + self.capacity - 1) / self.capacity).max(1) as usize
    }

    /// Estimated customers per route, `Q / (Σq / (N + 1))`.
    pub fn k_estimated(&self) -> Result<f64, InstanceError> {
        let total = self.total_demand();
        if total == 0 {
            return Err(InstanceError::Degenerate("all customer demands are zero".into()));
        }
        Ok(self.capacity as f64 / (total as f64 / self.dimension() as f64))
    }

    /// Long when more than 20 customers per route are expected.
    pub fn route_size_class(&self) -> Result<RouteClass, InstanceError> {
        Ok(if self.k_estimated()? > 20.0 {
            RouteClass::Long
        } else {
            RouteClass::Short
        })
    }
}

/// Reads a `instance,bks` CSV table.
pub fn read_bks_table(
    path: impl AsRef<Path>,
) -> Result<std::collections::BTreeMap<String, f64>, InstanceError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())
        .map_err(|e| InstanceError::Io(e.to_string()))?;
    let mut out = std::collections::BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| InstanceError::Io(e.to_string()))?;
        let (Some(name), Some(bks)) = (rec.get(0), rec.get(1)) else {
            continue;
        };
        let bks: f64 = bks.parse().map_err(|_| InstanceError::Malformed {
            line: rec.position().map_or(0, |p| p.line() as usize),
            msg: format!("bad BKS value {bks:?}"),
        })?;
        out.insert(name.to_string(), bks);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(demands: &[i64], capacity: i64) -> Instance {
        let coords = (0..demands.len()).map(|i| (i as f64, 0.0)).collect();
        Instance::new("t", coords, demands.to_vec(), capacity).unwrap()
    }

    const MINIMAL: &str = "NAME : min\nTYPE : CVRP\nDIMENSION : 2\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 1\nNODE_COORD_SECTION\n1 0 0\n2 3 4\nDEMAND_SECTION\n1 0\n2 1\nDEPOT_SECTION\n1\n-1\nEOF\n";

    #[test]
    fn minimal_instance() {
        let inst = Instance::parse(MINIMAL).unwrap();
        assert_eq!(inst.num_customers(), 1);
        assert_eq!(inst.capacity(), 1);
        assert_eq!(inst.distance(0, 1), 5);
        assert_eq!(inst.distance(1, 0), 5);
        assert_eq!(inst.distance(1, 1), 0);
    }

    #[test]
    fn missing_demand_section() {
        let text = MINIMAL.replace("DEMAND_SECTION\n1 0\n2 1\n", "");
        let err = Instance::parse(&text).unwrap_err();
        assert!(err.to_string().contains("DEMAND_SECTION"), "{err}");
    }

    #[test]
    fn unsupported_weight_type() {
        let text = MINIMAL.replace("EUC_2D", "GEO");
        assert!(matches!(Instance::parse(&text), Err(InstanceError::Unsupported(_))));
    }

    #[test]
    fn demand_above_capacity_is_infeasible() {
        let text = MINIMAL.replace("2 1\nDEPOT", "2 2\nDEPOT");
        assert!(matches!(Instance::parse(&text), Err(InstanceError::Infeasible { .. })));
    }

    #[test]
    fn depot_not_first_is_remapped() {
        let text = "NAME : d\nDIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nCAPACITY : 5\nNODE_COORD_SECTION\n1 10 0\n2 0 0\n3 0 7\nDEMAND_SECTION\n1 2\n2 0\n3 3\nDEPOT_SECTION\n2\n-1\nEOF\n";
        let inst = Instance::parse(text).unwrap();
        assert_eq!(inst.coord(0), (0.0, 0.0));
        assert_eq!(inst.file_id(0), 2);
        assert_eq!(inst.file_id(1), 1);
        assert_eq!(inst.demand(1), 2);
        assert_eq!(inst.distance(0, 2), 7);
        let again = Instance::parse(&inst.to_vrp_string()).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn rounding_is_nearest_integer() {
        let inst = Instance::new("r", vec![(0.0, 0.0), (1.0, 1.0), (0.5, 0.0), (1.5, 0.0)], vec![0, 1, 1, 1], 5).unwrap();
        assert_eq!(inst.distance(0, 1), 1); // sqrt(2)
        assert_eq!(inst.distance(0, 2), 1); // 0.5 rounds away from zero
        assert_eq!(inst.distance(0, 3), 2); // 1.5 rounds away from zero
    }

    #[test]
    fn route_estimates() {
        assert!((tiny(&[0, 1, 1, 1], 2).r_estimated() - 1.5).abs() < 1e-12);
        assert!((tiny(&[0, 0, 0, 7], 7).r_estimated() - 1.0).abs() < 1e-12);

        // Q = 100, N + 1 = 101, total demand 404 -> k = 25 -> long.
        let mut d = vec![0i64; 101];
        for q in d.iter_mut().skip(1) {
            *q = 4;
        }
        d[1] = 8;
        let inst = tiny(&d, 100);
        assert!((inst.k_estimated().unwrap() - 25.0).abs() < 1e-12);
        assert_eq!(inst.route_size_class().unwrap(), RouteClass::Long);

        // Q = 10, mean demand 5 over N + 1 nodes -> k = 2 -> short.
        let inst = tiny(&[0, 10], 10);
        assert!((inst.k_estimated().unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(inst.route_size_class().unwrap(), RouteClass::Short);

        // Exactly 20 is short.
        let inst = tiny(&[0, 5, 5], 50);
        assert!((inst.k_estimated().unwrap() - 15.0).abs() < 1e-12);
        let inst = tiny(&[0, 5, 5, 5, 5, 5, 5, 5, 5, 5], 100);
        assert!((inst.k_estimated().unwrap() - 22.222222222222221).abs() < 1e-9);
        let inst = tiny(&[0, 10, 10, 10, 10, 10, 10, 10, 10, 10], 180);
        assert!((inst.k_estimated().unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(inst.route_size_class().unwrap(), RouteClass::Short);

        assert!(matches!(tiny(&[0, 0, 0], 3).route_size_class(), Err(InstanceError::Degenerate(_))));
    }

    #[test]
    fn neighbor_ranks_consistent() {
        let inst = Instance::new(
            "n",
            vec![(0.0, 0.0), (1.0, 0.0), (5.0, 0.0), (2.0, 0.0), (9.0, 9.0)],
            vec![0, 1, 1, 1, 1],
            10,
        )
        .unwrap();
        let nr = inst.neighbors();
        assert_eq!(nr.list(1), &[3, 2, 4]);
        assert_eq!(nr.list(0), &[1, 3, 2, 4]);
        assert_eq!(nr.rank(1, 3), Some(1));
        assert_eq!(nr.rank(1, 4), Some(3));
        assert_eq!(nr.rank(1, 1), None);
        assert_eq!(nr.rank(1, 0), None);
    }
}
