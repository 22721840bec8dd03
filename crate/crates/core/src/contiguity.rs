//! Service-area connectivity: component scans, the flow certificate,
//! fragment repair and boundary local search.

use std::collections::VecDeque;

use crate::amount::Amount;
use crate::error::{Error, Result};
use crate::model::{AdjacencyGraph, Instance, Penalty, Solution};

/// Maximal connected subsets of `units` in the induced subgraph. Each
/// component is sorted; components are ordered by their smallest unit.
pub fn components(units: &[usize], graph: &AdjacencyGraph) -> Vec<Vec<usize>> {
    let mut inside = vec![false; graph.n()];
    for &u in units {
        inside[u] = true;
    }
    let mut sorted = units.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for &start in &sorted {
        if !inside[start] {
            continue;
        }
        inside[start] = false;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(u) = queue.pop_front() {
            comp.push(u);
            for &k in graph.neighbors(u) {
                if inside[k] {
                    inside[k] = false;
                    queue.push_back(k);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

fn home_of(instance: &Instance, i: usize) -> Result<usize> {
    instance
        .candidate(i)
        .site
        .ok_or_else(|| Error::Config(format!("candidate {i} has no unit")))
}

/// Whether the area of open facility `i` contains its own unit and is
/// connected.
pub fn is_area_contiguous(
    instance: &Instance,
    solution: &Solution,
    graph: &AdjacencyGraph,
    i: usize,
) -> Result<bool> {
    if i >= instance.m() {
        return Err(Error::InvalidCandidate(i));
    }
    if !solution.is_open(i) {
        return Err(Error::NotOpen(i));
    }
    let home = home_of(instance, i)?;
    Ok(reached_from_home(solution, graph, i, home) == solution.member_count(i))
}

/// Units of area `i` reachable from `home` inside the area; 0 if `home` is
/// not in the area.
fn reached_from_home(solution: &Solution, graph: &AdjacencyGraph, i: usize, home: usize) -> usize {
    if solution.facility_of(home) != i {
        return 0;
    }
    let mut seen = vec![false; graph.n()];
    let mut stack = vec![home];
    seen[home] = true;
    let mut count = 0;
    while let Some(u) = stack.pop() {
        count += 1;
        for &k in graph.neighbors(u) {
            if !seen[k] && solution.facility_of(k) == i {
                seen[k] = true;
                stack.push(k);
            }
        }
    }
    count
}

/// A positive flow on the directed arc `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub amount: u64,
}

/// Flow values for one service area; arcs not listed carry zero flow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowWitness {
    pub facility: usize,
    pub sink: usize,
    /// Flow cap `n = |J| - 1`.
    pub cap: u64,
    pub arcs: Vec<FlowArc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FlowCheck {
    Witness(FlowWitness),
    /// `unit` belongs to the area but cannot reach the sink inside it.
    Refused { unit: usize },
}

/// Builds a flow certificate for the area of open facility `i`: each unit
/// sends its subtree size along a breadth-first tree rooted at the
/// facility's unit.
pub fn flow_feasible(
    instance: &Instance,
    solution: &Solution,
    graph: &AdjacencyGraph,
    i: usize,
) -> Result<FlowCheck> {
    if i >= instance.m() {
        return Err(Error::InvalidCandidate(i));
    }
    if !solution.is_open(i) {
        return Err(Error::NotOpen(i));
    }
    let sink = home_of(instance, i)?;
    let n = graph.n();
    if solution.facility_of(sink) != i {
        let unit = (0..n).find(|&j| solution.facility_of(j) == i).expect("open area");
        return Ok(FlowCheck::Refused { unit });
    }
    let mut parent = vec![usize::MAX; n];
    let mut order = Vec::with_capacity(solution.member_count(i));
    let mut queue = VecDeque::from([sink]);
    parent[sink] = sink;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &k in graph.neighbors(u) {
            if parent[k] == usize::MAX && solution.facility_of(k) == i {
                parent[k] = u;
                queue.push_back(k);
            }
        }
    }
    if order.len() != solution.member_count(i) {
        let unit = (0..n)
            .find(|&j| solution.facility_of(j) == i && parent[j] == usize::MAX)
            .expect("unreached unit");
        return Ok(FlowCheck::Refused { unit });
    }
    let mut subtree = vec![0u64; n];
    let mut arcs = Vec::with_capacity(order.len().saturating_sub(1));
    for &u in order.iter().rev() {
        subtree[u] += 1;
        if u != sink {
            subtree[parent[u]] += subtree[u];
            arcs.push(FlowArc {
                from: u,
                to: parent[u],
                amount: subtree[u],
            });
        }
    }
    arcs.sort_unstable_by_key(|a| a.from);
    Ok(FlowCheck::Witness(FlowWitness {
        facility: i,
        sink,
        cap: n.saturating_sub(1) as u64,
        arcs,
    }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fragment {
    pub facility: usize,
    pub units: Vec<usize>,
}

/// Components of each open area that do not contain the facility's unit,
/// by ascending facility and then smallest unit.
pub fn find_fragments(instance: &Instance, solution: &Solution, graph: &AdjacencyGraph) -> Vec<Fragment> {
    let mut areas = vec![Vec::new(); instance.m()];
    for (j, &i) in solution.assignment().iter().enumerate() {
        areas[i].push(j);
    }
    let mut out = Vec::new();
    for (i, area) in areas.iter().enumerate() {
        if area.is_empty() {
            continue;
        }
        let home = instance.candidate(i).site;
        for comp in components(area, graph) {
            if home.is_none_or(|h| comp.binary_search(&h).is_err()) {
                out.push(Fragment {
                    facility: i,
                    units: comp,
                });
            }
        }
    }
    out
}

/// Removes every fragment and greedily reinserts its units, one at a time,
/// into the adjacent area with the smallest penalized cost increase.
pub fn repair(
    instance: &Instance,
    solution: &Solution,
    graph: &AdjacencyGraph,
    penalty: Penalty,
) -> Result<Solution> {
    let fragments = find_fragments(instance, solution, graph);
    if fragments.is_empty() {
        return Ok(solution.clone());
    }
    let mut assign: Vec<Option<usize>> = solution.assignment().iter().map(|&i| Some(i)).collect();
    let mut loads = solution.loads().to_vec();
    let mut pending = Vec::new();
    for frag in &fragments {
        for &u in &frag.units {
            loads[frag.facility] -= instance.demand(u);
            assign[u] = None;
            pending.push(u);
        }
    }
    while !pending.is_empty() {
        let mut deferred = Vec::new();
        for &u in &pending {
            let d = instance.demand(u);
            let mut best: Option<(Amount, usize)> = None;
            for &k in graph.neighbors(u) {
                let Some(a) = assign[k] else { continue };
                let cap = instance.capacity(a);
                let extra = (loads[a] + d - cap).max(0) - (loads[a] - cap).max(0);
                let delta = instance.cost(a, u) as Amount + penalty.charge(extra);
                if best.is_none_or(|(bd, ba)| delta < bd || (delta == bd && a < ba)) {
                    best = Some((delta, a));
                }
            }
            match best {
                Some((_, a)) => {
                    assign[u] = Some(a);
                    loads[a] += d;
                }
                None => deferred.push(u),
            }
        }
        if deferred.len() == pending.len() {
            return Err(Error::Repair(deferred[0]));
        }
        pending = deferred;
    }
    let assign = assign.into_iter().map(|a| a.expect("all inserted")).collect();
    Solution::from_assignment(instance, assign)
}

/// First-improvement descent over one-unit and two-unit boundary shifts.
/// Facility units never move, and every move keeps all affected areas
/// connected.
pub fn local_search_shift(
    instance: &Instance,
    solution: &Solution,
    graph: &AdjacencyGraph,
    penalty: Penalty,
) -> Solution {
    let mut sol = solution.clone();
    let n = instance.n();
    let pinned: Vec<bool> = (0..n)
        .map(|j| instance.candidate_at_unit(j) == Some(sol.facility_of(j)))
        .collect();
    let mut checker = AreaChecker::new(n);
    loop {
        let mut moved = false;
        for u in 0..n {
            if pinned[u] || !is_boundary(&sol, graph, u) {
                continue;
            }
            if try_single(instance, &mut sol, graph, penalty, &mut checker, u)
                || try_pair(instance, &mut sol, graph, penalty, &mut checker, &pinned, u)
            {
                moved = true;
            }
        }
        if !moved {
            return sol;
        }
    }
}

fn is_boundary(sol: &Solution, graph: &AdjacencyGraph, u: usize) -> bool {
    let a = sol.facility_of(u);
    graph.neighbors(u).iter().any(|&k| sol.facility_of(k) != a)
}

fn adjacent_areas(sol: &Solution, graph: &AdjacencyGraph, units: &[usize], exclude: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = units
        .iter()
        .flat_map(|&u| graph.neighbors(u).iter().map(|&k| sol.facility_of(k)))
        .filter(|a| !exclude.contains(a))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn try_single(
    instance: &Instance,
    sol: &mut Solution,
    graph: &AdjacencyGraph,
    penalty: Penalty,
    checker: &mut AreaChecker,
    u: usize,
) -> bool {
    let a = sol.facility_of(u);
    for b in adjacent_areas(sol, graph, &[u], &[a]) {
        if attempt(instance, sol, graph, penalty, checker, &[(u, b)]) {
            return true;
        }
    }
    false
}

fn try_pair(
    instance: &Instance,
    sol: &mut Solution,
    graph: &AdjacencyGraph,
    penalty: Penalty,
    checker: &mut AreaChecker,
    pinned: &[bool],
    u: usize,
) -> bool {
    for &v in graph.neighbors(u) {
        if pinned[v] || !is_boundary(sol, graph, v) {
            continue;
        }
        let a = sol.facility_of(u);
        let c = sol.facility_of(v);
        for b in adjacent_areas(sol, graph, &[u, v], &[a, c]) {
            if attempt(instance, sol, graph, penalty, checker, &[(u, b), (v, b)]) {
                return true;
            }
        }
        if a != c {
            let mut dests = adjacent_areas(sol, graph, &[v], &[c]);
            if !dests.contains(&a) {
                dests.push(a);
                dests.sort_unstable();
            }
            for d in dests {
                if attempt(instance, sol, graph, penalty, checker, &[(u, c), (v, d)]) {
                    return true;
                }
            }
        }
    }
    false
}

/// Applies `moves` if they strictly lower the penalized objective and leave
/// every affected area connected; otherwise restores the solution.
fn attempt(
    instance: &Instance,
    sol: &mut Solution,
    graph: &AdjacencyGraph,
    penalty: Penalty,
    checker: &mut AreaChecker,
    moves: &[(usize, usize)],
) -> bool {
    let before = sol.penalized(penalty);
    let origins: Vec<(usize, usize)> = moves.iter().map(|&(u, _)| (u, sol.facility_of(u))).collect();
    for &(u, b) in moves {
        sol.reassign(instance, u, b);
    }
    let improving = sol.penalized(penalty) < before;
    let admissible = improving && {
        let mut affected: Vec<usize> = origins
            .iter()
            .map(|&(_, a)| a)
            .chain(moves.iter().map(|&(_, b)| b))
            .collect();
        affected.sort_unstable();
        affected.dedup();
        affected
            .into_iter()
            .all(|area| checker.connected(instance, sol, graph, area))
    };
    if !admissible {
        for &(u, a) in origins.iter().rev() {
            sol.reassign(instance, u, a);
        }
    }
    admissible
}

/// Connectivity test from the facility's unit, reusing its scratch buffers.
struct AreaChecker {
    mark: Vec<u32>,
    epoch: u32,
    stack: Vec<usize>,
}

impl AreaChecker {
    fn new(n: usize) -> Self {
        AreaChecker {
            mark: vec![0; n],
            epoch: 0,
            stack: Vec::new(),
        }
    }

    fn connected(&mut self, instance: &Instance, sol: &Solution, graph: &AdjacencyGraph, i: usize) -> bool {
        if !sol.is_open(i) {
            return true;
        }
        let Some(home) = instance.candidate(i).site else {
            return false;
        };
        if sol.facility_of(home) != i {
            return false;
        }
        self.epoch += 1;
        let epoch = self.epoch;
        self.stack.clear();
        self.stack.push(home);
        self.mark[home] = epoch;
        let mut count = 0;
        while let Some(u) = self.stack.pop() {
            count += 1;
            for &k in graph.neighbors(u) {
                if self.mark[k] != epoch && sol.facility_of(k) == i {
                    self.mark[k] = epoch;
                    self.stack.push(k);
                }
            }
        }
        count == sol.member_count(i)
    }
}
