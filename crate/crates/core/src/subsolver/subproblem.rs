use std::time::Duration;

use crate::error::{Error, Result};
use crate::model::{AdjacencyGraph, Instance, Penalty, ProblemSpec, Solution};

pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(5);

/// A candidate facility as seen by a restricted subproblem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterFacility {
    pub candidate: usize,
    /// Capacity left after the demand it keeps serving outside the
    /// subproblem, never negative.
    pub capacity: i64,
    /// Zero for facilities already paid for in the current solution.
    pub fixed_cost: i64,
    /// Open in the current solution and serving units outside the
    /// subproblem; such a facility stays open whatever the subproblem does.
    pub was_open: bool,
    /// Local customer index of the facility's own unit when that unit must
    /// be served by the facility once it opens.
    pub home: Option<usize>,
}

/// Contiguity data for a subproblem that spans every unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubContiguity {
    /// Neighbor lists in local customer indices.
    pub neighbors: Vec<Vec<usize>>,
}

/// The facility location model restricted to a facility roster `I*` and a
/// customer set `J*`.
#[derive(Debug, Clone)]
pub struct RestrictedSubproblem {
    pub facilities: Vec<RosterFacility>,
    /// Unit ids of the customers, in local index order.
    pub customers: Vec<usize>,
    pub demands: Vec<i64>,
    /// Row-major, one row of `customers.len()` costs per roster facility.
    pub costs: Vec<i64>,
    /// Inclusive bounds on the number of open roster facilities, counting
    /// `was_open` ones.
    pub cardinality: Option<(usize, usize)>,
    pub penalty: Penalty,
    /// Capacities may be exceeded at `penalty.alpha` per unit of overload.
    pub soft_capacity: bool,
    pub contiguity: Option<SubContiguity>,
    pub time_limit: Duration,
    /// Search node budget; with a budget set the result does not depend on
    /// machine speed.
    pub node_limit: Option<u64>,
    /// Roster index per customer, tried as the first incumbent.
    pub warm_start: Option<Vec<usize>>,
}

impl RestrictedSubproblem {
    pub fn facility_count(&self) -> usize {
        self.facilities.len()
    }

    pub fn customer_count(&self) -> usize {
        self.customers.len()
    }

    #[inline]
    pub fn cost(&self, r: usize, k: usize) -> i64 {
        self.costs[r * self.customers.len() + k]
    }

    /// The whole problem as a subproblem: every candidate, every unit, the
    /// spec's facility count and, for contiguity variants, the adjacency
    /// constraints.
    pub fn full(
        instance: &Instance,
        spec: &ProblemSpec,
        graph: Option<&AdjacencyGraph>,
        penalty: Penalty,
    ) -> Result<Self> {
        spec.validate(instance, graph)?;
        let facilities = (0..instance.m())
            .map(|i| RosterFacility {
                candidate: i,
                capacity: instance.capacity(i),
                fixed_cost: instance.fixed_cost(i),
                was_open: false,
                home: if spec.requires_adjacency() { instance.candidate(i).site } else { None },
            })
            .collect();
        let contiguity = match (spec.requires_adjacency(), graph) {
            (true, Some(g)) => Some(SubContiguity {
                neighbors: (0..g.n()).map(|j| g.neighbors(j).to_vec()).collect(),
            }),
            _ => None,
        };
        Ok(RestrictedSubproblem {
            facilities,
            customers: (0..instance.n()).collect(),
            demands: instance.demands().to_vec(),
            costs: instance.costs().to_vec(),
            cardinality: spec.cardinality.map(|c| c.bounds()),
            penalty,
            soft_capacity: false,
            contiguity,
            time_limit: DEFAULT_TIME_LIMIT,
            node_limit: None,
            warm_start: None,
        })
    }

    /// Objective of an assignment (roster index per customer) under the
    /// subproblem's effective costs, or `None` if it breaks a constraint.
    pub fn evaluate(&self, assign: &[usize]) -> Option<i128> {
        let m = self.facilities.len();
        if assign.len() != self.customers.len() || assign.iter().any(|&r| r >= m) {
            return None;
        }
        let mut loads = vec![0i64; m];
        let mut members = vec![0usize; m];
        let mut total: i128 = 0;
        for (k, &r) in assign.iter().enumerate() {
            loads[r] += self.demands[k];
            members[r] += 1;
            total += self.cost(r, k) as i128;
        }
        let mut open = 0;
        for (r, fac) in self.facilities.iter().enumerate() {
            let is_open = fac.was_open || members[r] > 0;
            if !is_open {
                continue;
            }
            open += 1;
            if members[r] > 0 && !fac.was_open {
                total += fac.fixed_cost as i128;
            }
            let over = (loads[r] - fac.capacity).max(0);
            if over > 0 {
                if !self.soft_capacity {
                    return None;
                }
                total += self.penalty.charge(over);
            }
            if let Some(h) = fac.home {
                if assign[h] != r {
                    return None;
                }
            }
        }
        if let Some((lo, hi)) = self.cardinality {
            if open < lo || open > hi {
                return None;
            }
        }
        if let Some(cont) = &self.contiguity {
            if !areas_connected(assign, &self.facilities, cont) {
                return None;
            }
        }
        Some(total)
    }
}

/// Every area contains its facility's unit and is connected.
pub(crate) fn areas_connected(assign: &[usize], facilities: &[RosterFacility], cont: &SubContiguity) -> bool {
    let n = assign.len();
    let mut seen = vec![false; n];
    let mut stack = Vec::new();
    let mut reached = vec![0usize; facilities.len()];
    let mut members = vec![0usize; facilities.len()];
    for &r in assign {
        members[r] += 1;
    }
    for (r, fac) in facilities.iter().enumerate() {
        if members[r] == 0 {
            continue;
        }
        let Some(h) = fac.home else { return false };
        if assign[h] != r {
            return false;
        }
        stack.push(h);
        seen[h] = true;
        while let Some(u) = stack.pop() {
            reached[r] += 1;
            for &k in &cont.neighbors[u] {
                if !seen[k] && assign[k] == r {
                    seen[k] = true;
                    stack.push(k);
                }
            }
        }
        if reached[r] != members[r] {
            return false;
        }
    }
    true
}

/// Builds the subproblem on roster `i_star` and customers `j_star` around
/// the current solution.
///
/// Open facilities that keep customers outside `j_star` enter with their
/// residual capacity and no fixed cost. For contiguity variants a closed
/// candidate whose own unit lies outside `j_star` is left out, and an
/// opened candidate must serve its own unit. A facility count in the spec
/// is shifted by the open facilities outside the roster; an unsatisfiable
/// count yields [`Error::CardinalityInfeasible`].
pub fn build_subproblem(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    solution: &Solution,
    i_star: &[usize],
    j_star: &[usize],
    penalty: Penalty,
) -> Result<RestrictedSubproblem> {
    let n = instance.n();
    let mut local = vec![usize::MAX; n];
    for (k, &j) in j_star.iter().enumerate() {
        if j >= n {
            return Err(Error::Structure(format!("unit {j} is out of range")));
        }
        local[j] = k;
    }
    let mut inside_load = vec![0i64; instance.m()];
    let mut inside_members = vec![0usize; instance.m()];
    for &j in j_star {
        let i = solution.facility_of(j);
        inside_load[i] += instance.demand(j);
        inside_members[i] += 1;
    }

    let self_service = spec.requires_adjacency();
    let mut in_roster = vec![false; instance.m()];
    let mut facilities = Vec::with_capacity(i_star.len());
    for &i in i_star {
        if i >= instance.m() {
            return Err(Error::InvalidCandidate(i));
        }
        if in_roster[i] {
            continue;
        }
        let was_open = solution.member_count(i) > inside_members[i];
        let home = if self_service {
            instance.candidate(i).site.filter(|&h| local[h] != usize::MAX).map(|h| local[h])
        } else {
            None
        };
        if self_service && home.is_none() && !solution.is_open(i) {
            continue;
        }
        in_roster[i] = true;
        let outside_load = solution.load(i) - inside_load[i];
        facilities.push(RosterFacility {
            candidate: i,
            capacity: (instance.capacity(i) - outside_load).max(0),
            fixed_cost: if was_open { 0 } else { instance.fixed_cost(i) },
            was_open,
            home,
        });
    }

    let cardinality = match spec.cardinality {
        None => None,
        Some(card) => {
            let (lo, hi) = card.bounds();
            let outside = (0..instance.m())
                .filter(|&i| solution.is_open(i) && !in_roster[i])
                .count() as i64;
            let (raw_lo, raw_hi) = (lo as i64 - outside, hi as i64 - outside);
            let forced = facilities.iter().filter(|f| f.was_open).count() as i64;
            let sub_lo = raw_lo.max(forced).max(0);
            let sub_hi = raw_hi.min(facilities.len() as i64);
            if raw_hi < 1 || sub_lo > sub_hi {
                return Err(Error::CardinalityInfeasible {
                    min: raw_lo,
                    max: raw_hi,
                    roster: facilities.len(),
                });
            }
            Some((sub_lo as usize, sub_hi as usize))
        }
    };

    let mut costs = Vec::with_capacity(facilities.len() * j_star.len());
    for fac in &facilities {
        costs.extend(j_star.iter().map(|&j| instance.cost(fac.candidate, j)));
    }
    let roster_index: Vec<Option<usize>> = {
        let mut v = vec![None; instance.m()];
        for (r, f) in facilities.iter().enumerate() {
            v[f.candidate] = Some(r);
        }
        v
    };
    let warm_start: Option<Vec<usize>> = j_star
        .iter()
        .map(|&j| roster_index[solution.facility_of(j)])
        .collect();

    let spans_all = j_star.len() == n && facilities.len() == instance.m();
    let contiguity = match (self_service && spans_all, graph) {
        (true, Some(g)) => Some(SubContiguity {
            neighbors: j_star
                .iter()
                .map(|&j| g.neighbors(j).iter().map(|&k| local[k]).collect())
                .collect(),
        }),
        _ => None,
    };

    Ok(RestrictedSubproblem {
        facilities,
        customers: j_star.to_vec(),
        demands: j_star.iter().map(|&j| instance.demand(j)).collect(),
        costs,
        cardinality,
        penalty,
        soft_capacity: false,
        contiguity,
        time_limit: DEFAULT_TIME_LIMIT,
        node_limit: None,
        warm_start,
    })
}
