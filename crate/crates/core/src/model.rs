//! Instances, problem variants, solutions and objective evaluation.

use crate::amount::{format_scaled, Amount};
use crate::contiguity;
use crate::error::{Error, Result};

/// A candidate facility location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// The unit this candidate sits on. Benchmark families keep facilities
    /// and customers in separate index spaces and leave this empty.
    pub site: Option<usize>,
    pub capacity: i64,
    pub fixed_cost: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A facility location instance. All amounts are integers scaled by
/// `10^scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    scale: u32,
    demands: Vec<i64>,
    candidates: Vec<Candidate>,
    costs: Vec<i64>,
    coords: Option<Vec<Point>>,
    site_index: Vec<Option<usize>>,
}

impl Instance {
    /// Builds an instance; `costs` is row-major, one row of `demands.len()`
    /// entries per candidate.
    pub fn new(
        scale: u32,
        demands: Vec<i64>,
        candidates: Vec<Candidate>,
        costs: Vec<i64>,
        coords: Option<Vec<Point>>,
    ) -> Result<Self> {
        let n = demands.len();
        let m = candidates.len();
        if n == 0 {
            return Err(Error::Structure("instance has no units".into()));
        }
        if m == 0 {
            return Err(Error::Structure("instance has no candidates".into()));
        }
        if costs.len() != n * m {
            return Err(Error::Structure(format!(
                "cost matrix has {} entries, expected {m} x {n}",
                costs.len()
            )));
        }
        if let Some(c) = &coords {
            if c.len() != n {
                return Err(Error::Structure(format!(
                    "{} coordinates for {n} units",
                    c.len()
                )));
            }
        }
        if let Some(j) = demands.iter().position(|&d| d < 0) {
            return Err(Error::Structure(format!("unit {j} has negative demand")));
        }
        if let Some(k) = costs.iter().position(|&c| c < 0) {
            return Err(Error::Structure(format!(
                "negative cost for candidate {} and unit {}",
                k / n,
                k % n
            )));
        }
        let mut site_index = vec![None; n];
        for (i, cand) in candidates.iter().enumerate() {
            if cand.capacity <= 0 {
                return Err(Error::Structure(format!(
                    "candidate {i} has nonpositive capacity"
                )));
            }
            if cand.fixed_cost < 0 {
                return Err(Error::Structure(format!(
                    "candidate {i} has negative fixed cost"
                )));
            }
            if let Some(site) = cand.site {
                if site >= n {
                    return Err(Error::Structure(format!(
                        "candidate {i} sits on unknown unit {site}"
                    )));
                }
                if site_index[site].replace(i).is_some() {
                    return Err(Error::Structure(format!(
                        "unit {site} carries more than one candidate"
                    )));
                }
            }
        }
        Ok(Instance {
            scale,
            demands,
            candidates,
            costs,
            coords,
            site_index,
        })
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    /// Number of units (customers).
    pub fn n(&self) -> usize {
        self.demands.len()
    }

    /// Number of candidate facilities.
    pub fn m(&self) -> usize {
        self.candidates.len()
    }

    pub fn demands(&self) -> &[i64] {
        &self.demands
    }

    pub fn demand(&self, j: usize) -> i64 {
        self.demands[j]
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn candidate(&self, i: usize) -> &Candidate {
        &self.candidates[i]
    }

    pub fn capacity(&self, i: usize) -> i64 {
        self.candidates[i].capacity
    }

    pub fn fixed_cost(&self, i: usize) -> i64 {
        self.candidates[i].fixed_cost
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> i64 {
        self.costs[i * self.demands.len() + j]
    }

    pub fn cost_row(&self, i: usize) -> &[i64] {
        let n = self.demands.len();
        &self.costs[i * n..(i + 1) * n]
    }

    pub fn costs(&self) -> &[i64] {
        &self.costs
    }

    pub fn coords(&self) -> Option<&[Point]> {
        self.coords.as_deref()
    }

    /// The candidate located on unit `j`, if any.
    pub fn candidate_at_unit(&self, j: usize) -> Option<usize> {
        self.site_index.get(j).copied().flatten()
    }

    pub fn total_demand(&self) -> i64 {
        self.demands.iter().sum()
    }

    pub fn total_capacity(&self) -> i64 {
        self.candidates.iter().map(|c| c.capacity).sum()
    }

    pub fn total_fixed_cost(&self) -> i64 {
        self.candidates.iter().map(|c| c.fixed_cost).sum()
    }

    /// Renders a scaled amount with the instance's number of decimals.
    pub fn format_amount(&self, value: Amount) -> String {
        format_scaled(value, self.scale)
    }
}

/// Symmetric, irreflexive neighbor lists over units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyGraph {
    neighbors: Vec<Vec<usize>>,
}

impl AdjacencyGraph {
    /// Builds the graph from undirected edges. Duplicates and self-loops are
    /// rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Structure(format!("edge {a}-{b} leaves the unit range")));
            }
            if a == b {
                return Err(Error::Structure(format!("self-loop on unit {a}")));
            }
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for (j, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Structure(format!("duplicate edge at unit {j}")));
            }
        }
        Ok(AdjacencyGraph { neighbors })
    }

    /// Validates explicit neighbor lists.
    pub fn from_neighbors(mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        for list in neighbors.iter_mut() {
            list.sort_unstable();
            list.dedup();
        }
        for (j, list) in neighbors.iter().enumerate() {
            for &k in list {
                if k >= n {
                    return Err(Error::Structure(format!("unit {j} lists unknown neighbor {k}")));
                }
                if k == j {
                    return Err(Error::Structure(format!("unit {j} lists itself")));
                }
                if neighbors[k].binary_search(&j).is_err() {
                    return Err(Error::Structure(format!("edge {j}-{k} is not symmetric")));
                }
            }
        }
        Ok(AdjacencyGraph { neighbors })
    }

    /// Rook adjacency on a `rows x cols` grid, units numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let u = r * cols + c;
                if c + 1 < cols {
                    edges.push((u, u + 1));
                }
                if r + 1 < rows {
                    edges.push((u, u + cols));
                }
            }
        }
        Self::from_edges(rows * cols, &edges).expect("grid edges are valid")
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, j: usize) -> &[usize] {
        &self.neighbors[j]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    /// Σ_j |N_j|, i.e. twice the number of edges.
    pub fn degree_sum(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    /// Edges as `(a, b)` pairs with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.degree_sum() / 2);
        for (a, list) in self.neighbors.iter().enumerate() {
            out.extend(list.iter().filter(|&&b| a < b).map(|&b| (a, b)));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Sscflp,
    Ssckflp,
    Cflsap,
    Ckflsap,
}

impl Variant {
    pub fn requires_adjacency(self) -> bool {
        matches!(self, Variant::Cflsap | Variant::Ckflsap)
    }

    pub fn requires_cardinality(self) -> bool {
        matches!(self, Variant::Ssckflp | Variant::Ckflsap)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Sscflp => "sscflp",
            Variant::Ssckflp => "ssckflp",
            Variant::Cflsap => "cflsap",
            Variant::Ckflsap => "ckflsap",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sscflp" => Ok(Variant::Sscflp),
            "ssckflp" => Ok(Variant::Ssckflp),
            "cflsap" => Ok(Variant::Cflsap),
            "ckflsap" => Ok(Variant::Ckflsap),
            other => Err(Error::Config(format!("unknown problem variant `{other}`"))),
        }
    }
}

/// Constraint on the number of open facilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Exact(usize),
    Range { min: usize, max: usize },
}

impl Cardinality {
    pub fn bounds(self) -> (usize, usize) {
        match self {
            Cardinality::Exact(k) => (k, k),
            Cardinality::Range { min, max } => (min, max),
        }
    }

    pub fn admits(self, open: usize) -> bool {
        let (lo, hi) = self.bounds();
        lo <= open && open <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    pub variant: Variant,
    pub cardinality: Option<Cardinality>,
}

impl ProblemSpec {
    pub fn new(variant: Variant, cardinality: Option<Cardinality>) -> Self {
        ProblemSpec {
            variant,
            cardinality,
        }
    }

    pub fn sscflp() -> Self {
        Self::new(Variant::Sscflp, None)
    }

    pub fn requires_adjacency(&self) -> bool {
        self.variant.requires_adjacency()
    }

    /// Checks the spec against an instance and the graph on hand.
    pub fn validate(&self, instance: &Instance, graph: Option<&AdjacencyGraph>) -> Result<()> {
        match (self.variant.requires_cardinality(), self.cardinality) {
            (true, None) => {
                return Err(Error::Config(format!(
                    "{} requires a facility count",
                    self.variant.name()
                )))
            }
            (false, Some(Cardinality::Exact(_))) => {
                return Err(Error::Config(format!(
                    "{} accepts only a facility count range",
                    self.variant.name()
                )))
            }
            _ => {}
        }
        if let Some(card) = self.cardinality {
            let (lo, hi) = card.bounds();
            if lo < 1 || lo > hi || hi > instance.m() {
                return Err(Error::Config(format!(
                    "facility count {lo}..={hi} is outside 1..={}",
                    instance.m()
                )));
            }
        }
        if self.requires_adjacency() {
            let graph = graph.ok_or_else(|| {
                Error::Config(format!("{} requires adjacency data", self.variant.name()))
            })?;
            if graph.n() != instance.n() {
                return Err(Error::Config(format!(
                    "graph has {} units, instance has {}",
                    graph.n(),
                    instance.n()
                )));
            }
            if let Some(i) = instance.candidates().iter().position(|c| c.site.is_none()) {
                return Err(Error::Config(format!(
                    "candidate {i} has no unit; contiguity needs every candidate on a unit"
                )));
            }
        }
        Ok(())
    }
}

/// Penalty coefficient α for capacity overload, in cost units per demand unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Penalty {
    pub alpha: i64,
}

impl Penalty {
    pub fn new(alpha: i64) -> Result<Self> {
        if alpha <= 0 {
            return Err(Error::Config("penalty coefficient must be positive".into()));
        }
        Ok(Penalty { alpha })
    }

    /// The smallest integer strictly above
    /// `(Σ_i f_i + Σ_j max_i c_ij) / min_j d_j` over positive demands.
    pub fn for_instance(instance: &Instance) -> Self {
        let mut total: i128 = instance.total_fixed_cost() as i128;
        for j in 0..instance.n() {
            let worst = (0..instance.m()).map(|i| instance.cost(i, j)).max().unwrap_or(0);
            total += worst as i128;
        }
        let dmin = instance
            .demands()
            .iter()
            .copied()
            .filter(|&d| d > 0)
            .min()
            .unwrap_or(1) as i128;
        let alpha = (total / dmin + 1).min(i64::MAX as i128) as i64;
        Penalty { alpha }
    }

    pub fn charge(&self, overload: i64) -> Amount {
        self.alpha as Amount * overload as Amount
    }
}

/// A total assignment of units to candidates with cached loads and costs.
///
/// A candidate is open exactly when it serves at least one unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    assign: Vec<usize>,
    loads: Vec<i64>,
    members: Vec<usize>,
    objective: Amount,
    overload: i64,
}

impl Solution {
    pub fn from_assignment(instance: &Instance, assign: Vec<usize>) -> Result<Self> {
        if assign.len() != instance.n() {
            return Err(Error::Structure(format!(
                "assignment covers {} of {} units",
                assign.len(),
                instance.n()
            )));
        }
        let m = instance.m();
        let mut loads = vec![0i64; m];
        let mut members = vec![0usize; m];
        let mut objective: Amount = 0;
        for (j, &i) in assign.iter().enumerate() {
            if i >= m {
                return Err(Error::InvalidCandidate(i));
            }
            loads[i] += instance.demand(j);
            members[i] += 1;
            objective += instance.cost(i, j) as Amount;
        }
        let mut overload = 0;
        for i in 0..m {
            if members[i] > 0 {
                objective += instance.fixed_cost(i) as Amount;
                overload += (loads[i] - instance.capacity(i)).max(0);
            }
        }
        Ok(Solution {
            assign,
            loads,
            members,
            objective,
            overload,
        })
    }

    /// Moves unit `j` to candidate `i`, updating the caches incrementally.
    pub fn reassign(&mut self, instance: &Instance, j: usize, i: usize) {
        let old = self.assign[j];
        if old == i {
            return;
        }
        let d = instance.demand(j);
        self.overload -= over(self.loads[old], instance.capacity(old))
            + over(self.loads[i], instance.capacity(i));
        self.loads[old] -= d;
        self.loads[i] += d;
        self.overload += over(self.loads[old], instance.capacity(old))
            + over(self.loads[i], instance.capacity(i));
        self.objective += (instance.cost(i, j) - instance.cost(old, j)) as Amount;
        self.members[old] -= 1;
        if self.members[old] == 0 {
            self.objective -= instance.fixed_cost(old) as Amount;
        }
        if self.members[i] == 0 {
            self.objective += instance.fixed_cost(i) as Amount;
        }
        self.members[i] += 1;
        self.assign[j] = i;
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assign
    }

    pub fn facility_of(&self, j: usize) -> usize {
        self.assign[j]
    }

    pub fn loads(&self) -> &[i64] {
        &self.loads
    }

    pub fn load(&self, i: usize) -> i64 {
        self.loads[i]
    }

    /// Number of units served by candidate `i`.
    pub fn member_count(&self, i: usize) -> usize {
        self.members[i]
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.members[i] > 0
    }

    pub fn open_facilities(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&i| self.members[i] > 0).collect()
    }

    pub fn open_count(&self) -> usize {
        self.members.iter().filter(|&&c| c > 0).count()
    }

    /// Units served by candidate `i`, ascending.
    pub fn area(&self, i: usize) -> Vec<usize> {
        (0..self.assign.len()).filter(|&j| self.assign[j] == i).collect()
    }

    /// Cached Eq (1) value.
    pub fn objective(&self) -> Amount {
        self.objective
    }

    /// Σ_i max(0, load_i − s_i).
    pub fn total_overload(&self) -> i64 {
        self.overload
    }

    pub fn penalized(&self, penalty: Penalty) -> Amount {
        self.objective + penalty.charge(self.overload)
    }
}

fn over(load: i64, capacity: i64) -> i64 {
    (load - capacity).max(0)
}

/// Fixed costs of open candidates plus assignment costs, recomputed from
/// the assignment alone.
pub fn evaluate_objective(instance: &Instance, solution: &Solution) -> Result<Amount> {
    let m = instance.m();
    let mut open = vec![false; m];
    let mut total: Amount = 0;
    for (j, &i) in solution.assignment().iter().enumerate() {
        if i >= m {
            return Err(Error::InvalidCandidate(i));
        }
        total += instance.cost(i, j) as Amount;
        open[i] = true;
    }
    total += (0..m)
        .filter(|&i| open[i])
        .map(|i| instance.fixed_cost(i) as Amount)
        .sum::<Amount>();
    Ok(total)
}

/// `evaluate_objective` plus α times the total overload.
pub fn evaluate_penalized(instance: &Instance, solution: &Solution, penalty: Penalty) -> Result<Amount> {
    let base = evaluate_objective(instance, solution)?;
    let mut loads = vec![0i64; instance.m()];
    for (j, &i) in solution.assignment().iter().enumerate() {
        loads[i] += instance.demand(j);
    }
    let overload: i64 = loads
        .iter()
        .enumerate()
        .map(|(i, &l)| over(l, instance.capacity(i)))
        .sum();
    Ok(base + penalty.charge(overload))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaCheck {
    pub facility: usize,
    /// The facility's own unit is in its area.
    pub self_served: bool,
    /// The area induces a connected subgraph.
    pub connected: bool,
}

impl AreaCheck {
    pub fn contiguous(&self) -> bool {
        self.self_served && self.connected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    /// Every unit is assigned to a valid candidate.
    pub assignment_total: bool,
    /// Per candidate: load within capacity.
    pub capacity: Vec<bool>,
    /// `None` when the spec has no count constraint.
    pub cardinality: Option<bool>,
    pub open_count: usize,
    /// Per open facility, present for contiguity variants.
    pub contiguity: Option<Vec<AreaCheck>>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.assignment_total
            && self.capacity.iter().all(|&ok| ok)
            && self.cardinality.unwrap_or(true)
            && self
                .contiguity
                .as_ref()
                .is_none_or(|areas| areas.iter().all(AreaCheck::contiguous))
    }

    /// Human-readable list of violated constraints.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.assignment_total {
            out.push("assignment is not total".to_string());
        }
        for (i, ok) in self.capacity.iter().enumerate() {
            if !ok {
                out.push(format!("capacity exceeded at facility {i}"));
            }
        }
        if self.cardinality == Some(false) {
            out.push(format!("facility count {} violates the constraint", self.open_count));
        }
        for area in self.contiguity.iter().flatten() {
            if !area.self_served {
                out.push(format!("facility {} does not serve its own unit", area.facility));
            }
            if !area.connected {
                out.push(format!("service area of facility {} is not contiguous", area.facility));
            }
        }
        out
    }
}

/// Checks assignment totality, capacities, the facility count and, for
/// contiguity variants, connectivity of every service area.
pub fn check_feasibility(
    instance: &Instance,
    spec: &ProblemSpec,
    solution: &Solution,
    graph: Option<&AdjacencyGraph>,
) -> Result<FeasibilityReport> {
    if spec.requires_adjacency() && graph.is_none() {
        return Err(Error::Config(format!(
            "{} requires adjacency data",
            spec.variant.name()
        )));
    }
    let assign = solution.assignment();
    let m = instance.m();
    let assignment_total = assign.len() == instance.n() && assign.iter().all(|&i| i < m);
    let mut loads = vec![0i64; m];
    for (j, &i) in assign.iter().enumerate() {
        if i < m {
            loads[i] += instance.demand(j);
        }
    }
    let capacity = (0..m).map(|i| loads[i] <= instance.capacity(i)).collect();
    let open_count = solution.open_count();
    let cardinality = spec.cardinality.map(|c| c.admits(open_count));
    let contiguity = match (spec.requires_adjacency(), graph) {
        (true, Some(graph)) => Some(
            solution
                .open_facilities()
                .into_iter()
                .map(|i| {
                    let area = solution.area(i);
                    let self_served = instance
                        .candidate(i)
                        .site
                        .is_some_and(|home| assign[home] == i);
                    AreaCheck {
                        facility: i,
                        self_served,
                        connected: contiguity::components(&area, graph).len() <= 1,
                    }
                })
                .collect(),
        ),
        _ => None,
    };
    Ok(FeasibilityReport {
        assignment_total,
        capacity,
        cardinality,
        open_count,
        contiguity,
    })
}
