//! Depth-first branch-and-bound for restricted subproblems.
//!
//! The search first fixes every roster facility open or closed, then
//! assigns customers one at a time. Each node is bounded by the Lagrangian
//! dual of the capacity constraints.

use std::time::Instant;

use super::lagrangian::{
    evaluate_dual, root_view, FacState, LagrangianState, NodeView, REFRESH_ITERATIONS, ROOT_ITERATIONS,
    UNASSIGNED,
};
use super::subproblem::{areas_connected, RestrictedSubproblem};
use super::{SubSolution, SubStatus};

/// Multipliers are re-optimized at nodes whose depth is a multiple of this.
const REFRESH_DEPTH: usize = 5;

/// Solves the subproblem exactly unless the node or time budget runs out.
/// When `node_limit` is set the time limit is not consulted, so the result
/// is reproducible.
pub fn solve_builtin(sub: &RestrictedSubproblem) -> SubSolution {
    let mut search = Search::new(sub);
    search.run();
    search.finish()
}

struct Search<'a> {
    sub: &'a RestrictedSubproblem,
    status: Vec<FacState>,
    assigned: Vec<usize>,
    loads: Vec<i64>,
    members: Vec<usize>,
    lambda: Vec<f64>,
    lag: LagrangianState,
    best: Option<(i128, Vec<usize>)>,
    trace: Vec<i128>,
    nodes: u64,
    aborted: bool,
    start: Instant,
    fac_order: Vec<usize>,
    open_first: Vec<bool>,
    cust_order: Vec<usize>,
    root_bound: f64,
}

impl<'a> Search<'a> {
    fn new(sub: &'a RestrictedSubproblem) -> Self {
        let (status, assigned, loads) = root_view(sub);
        let m = sub.facilities.len();
        let mut cust_order: Vec<usize> = (0..sub.customers.len()).collect();
        cust_order.sort_by(|&a, &b| sub.demands[b].cmp(&sub.demands[a]).then(a.cmp(&b)));
        Search {
            sub,
            status,
            assigned,
            loads,
            members: vec![0; m],
            lambda: vec![0.0; m],
            lag: LagrangianState::new(sub),
            best: None,
            trace: Vec::new(),
            nodes: 0,
            aborted: false,
            start: Instant::now(),
            fac_order: Vec::new(),
            open_first: vec![false; m],
            cust_order,
            root_bound: f64::NEG_INFINITY,
        }
    }

    fn offer(&mut self, assign: &[usize]) {
        if let Some(obj) = self.sub.evaluate(assign) {
            if self.best.as_ref().is_none_or(|(b, _)| obj < *b) {
                self.best = Some((obj, assign.to_vec()));
                self.trace.push(obj);
            }
        }
    }

    fn upper(&self) -> Option<f64> {
        self.best.as_ref().map(|(b, _)| *b as f64)
    }

    fn run(&mut self) {
        let sub = self.sub;
        if let Some(warm) = &sub.warm_start {
            self.offer(warm);
        }
        let all: Vec<FacState> = self.status.clone();
        if let Some(g) = greedy(sub, &all) {
            self.offer(&g);
        }

        if let Some((_, inc)) = &self.best {
            for &r in inc {
                self.open_first[r] = true;
            }
        }
        let m = sub.facilities.len();
        let mut order: Vec<usize> = (0..m).filter(|&r| !sub.facilities[r].was_open).collect();
        order.sort_by_key(|&r| (!self.open_first[r], r));
        self.fac_order = order;

        self.lag.best_upper = self.upper();
        let (status, assigned, loads) = root_view(sub);
        let view = NodeView { status: &status, assigned: &assigned, loads: &loads };
        for _ in 0..ROOT_ITERATIONS {
            let Some(dual) = evaluate_dual(sub, &self.lag.multipliers, &view) else {
                self.root_bound = f64::INFINITY;
                return;
            };
            self.lag.step(sub, &dual);
        }
        self.lambda.clone_from(&self.lag.best_multipliers);
        self.root_bound = self.lag.best_lower;
        self.phase_facilities(0, 0);
    }

    fn finish(self) -> SubSolution {
        let m = self.sub.facilities.len();
        let status = match (self.aborted, self.best.is_some()) {
            (false, true) => SubStatus::ProvenOptimal,
            (false, false) => SubStatus::Infeasible,
            (true, true) => SubStatus::FeasibleTimeLimit,
            (true, false) => SubStatus::Unknown,
        };
        let (objective, assignment) = self.best.unwrap_or((0, Vec::new()));
        let mut open = vec![false; m];
        for (r, fac) in self.sub.facilities.iter().enumerate() {
            open[r] = fac.was_open;
        }
        for &r in &assignment {
            open[r] = true;
        }
        SubSolution {
            assignment,
            open,
            objective,
            status,
            nodes: self.nodes,
            root_bound: self.root_bound,
            trace: self.trace,
        }
    }

    /// Counts a node and reports whether the budget is exhausted.
    fn tick(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        self.nodes += 1;
        match self.sub.node_limit {
            Some(limit) => {
                if self.nodes > limit {
                    self.aborted = true;
                }
            }
            None => {
                if self.nodes.is_multiple_of(256) && self.start.elapsed() >= self.sub.time_limit {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    /// Dual bound at the current node, refreshing the multipliers at
    /// regular depths. `None` if the node has no feasible completion.
    fn bound(&mut self, depth: usize) -> Option<f64> {
        let sub = self.sub;
        let view = NodeView {
            status: &self.status,
            assigned: &self.assigned,
            loads: &self.loads,
        };
        let first = evaluate_dual(sub, &self.lambda, &view)?;
        if depth == 0 || !depth.is_multiple_of(REFRESH_DEPTH) {
            return Some(first.value);
        }
        let mut state = LagrangianState::with_multipliers(sub, self.lambda.clone());
        state.best_upper = self.upper();
        state.step(sub, &first);
        for _ in 1..REFRESH_ITERATIONS {
            let dual = evaluate_dual(sub, &state.multipliers, &view)?;
            state.step(sub, &dual);
        }
        self.lambda = state.best_multipliers;
        Some(state.best_lower)
    }

    fn pruned(&self, bound: f64) -> bool {
        match &self.best {
            None => false,
            Some((b, _)) => {
                let ub = *b as f64;
                bound > ub - 1.0 + 1e-7 * ub.abs().max(1.0)
            }
        }
    }

    fn phase_facilities(&mut self, idx: usize, depth: usize) {
        if self.tick() {
            return;
        }
        let Some(bound) = self.bound(depth) else { return };
        if self.pruned(bound) {
            return;
        }
        if idx == self.fac_order.len() {
            self.enter_assignment(depth);
            return;
        }
        let r = self.fac_order[idx];
        let branches = if self.open_first[r] {
            [FacState::Open, FacState::Closed]
        } else {
            [FacState::Closed, FacState::Open]
        };
        for state in branches {
            self.status[r] = state;
            self.phase_facilities(idx + 1, depth + 1);
            self.status[r] = FacState::Free;
            if self.aborted {
                return;
            }
        }
    }

    fn enter_assignment(&mut self, depth: usize) {
        let sub = self.sub;
        if let Some(g) = greedy(sub, &self.status) {
            self.offer(&g);
        }
        let mut placed = Vec::new();
        for (r, fac) in sub.facilities.iter().enumerate() {
            if let (FacState::Open, Some(h)) = (self.status[r], fac.home) {
                self.place(h, r);
                placed.push(h);
            }
        }
        self.phase_customers(0, depth);
        for h in placed {
            self.unplace(h);
        }
    }

    fn place(&mut self, k: usize, r: usize) {
        self.assigned[k] = r;
        self.loads[r] += self.sub.demands[k];
        self.members[r] += 1;
    }

    fn unplace(&mut self, k: usize) {
        let r = self.assigned[k];
        self.assigned[k] = UNASSIGNED;
        self.loads[r] -= self.sub.demands[k];
        self.members[r] -= 1;
    }

    fn phase_customers(&mut self, mut pos: usize, depth: usize) {
        let sub = self.sub;
        let n = sub.customers.len();
        while pos < n && self.assigned[self.cust_order[pos]] != UNASSIGNED {
            pos += 1;
        }
        if pos == n {
            let assign = self.assigned.clone();
            self.offer(&assign);
            return;
        }
        if self.tick() {
            return;
        }
        let unassigned = n - (0..n).filter(|&k| self.assigned[k] != UNASSIGNED).count();
        let empty_open = (0..sub.facilities.len())
            .filter(|&r| self.status[r] == FacState::Open && !sub.facilities[r].was_open && self.members[r] == 0)
            .count();
        if empty_open > unassigned {
            return;
        }
        if sub.contiguity.is_some() && !self.reachable() {
            return;
        }
        let Some(bound) = self.bound(depth) else { return };
        if self.pruned(bound) {
            return;
        }
        let k = self.cust_order[pos];
        let d = sub.demands[k];
        let mut options: Vec<(f64, usize)> = (0..sub.facilities.len())
            .filter(|&r| {
                self.status[r] == FacState::Open
                    && (sub.soft_capacity || self.loads[r] + d <= sub.facilities[r].capacity)
            })
            .map(|r| (sub.cost(r, k) as f64 + self.lambda[r] * d as f64, r))
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, r) in options {
            self.place(k, r);
            self.phase_customers(pos + 1, depth + 1);
            self.unplace(k);
            if self.aborted {
                return;
            }
        }
    }

    /// Every open area can still become connected: its assigned units reach
    /// the facility's unit through units that are its own or unassigned,
    /// and every unassigned unit is reachable by some open area.
    fn reachable(&self) -> bool {
        let sub = self.sub;
        let cont = sub.contiguity.as_ref().expect("contiguity data");
        let n = sub.customers.len();
        let mut covered = vec![false; n];
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        for (r, fac) in sub.facilities.iter().enumerate() {
            if self.status[r] != FacState::Open {
                continue;
            }
            let Some(h) = fac.home else { return false };
            seen.iter_mut().for_each(|s| *s = false);
            seen[h] = true;
            stack.push(h);
            let mut own = 0;
            while let Some(u) = stack.pop() {
                if self.assigned[u] == r {
                    own += 1;
                } else {
                    covered[u] = true;
                }
                for &k in &cont.neighbors[u] {
                    if !seen[k] && (self.assigned[k] == r || self.assigned[k] == UNASSIGNED) {
                        seen[k] = true;
                        stack.push(k);
                    }
                }
            }
            if own != self.members[r] {
                return false;
            }
        }
        (0..n).all(|k| self.assigned[k] != UNASSIGNED || covered[k])
    }
}

/// Greedy completion over the open and free facilities in `status`:
/// customers by descending demand, each to the cheapest facility that still
/// fits, counting a fixed cost the first time a facility is used. Returns
/// an assignment only if it satisfies every constraint of the subproblem.
fn greedy(sub: &RestrictedSubproblem, status: &[FacState]) -> Option<Vec<usize>> {
    let m = sub.facilities.len();
    let n = sub.customers.len();
    let mut assign = vec![UNASSIGNED; n];
    let mut loads = vec![0i64; m];
    let mut used = vec![false; m];
    let mut used_count = sub.facilities.iter().filter(|f| f.was_open).count();
    let hi = sub.cardinality.map_or(usize::MAX, |c| c.1);
    for (r, fac) in sub.facilities.iter().enumerate() {
        used[r] = fac.was_open;
        if status[r] == FacState::Open {
            if let Some(h) = fac.home {
                assign[h] = r;
                loads[r] += sub.demands[h];
                if !used[r] {
                    used[r] = true;
                    used_count += 1;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| sub.demands[b].cmp(&sub.demands[a]).then(a.cmp(&b)));
    for k in order {
        if assign[k] != UNASSIGNED {
            continue;
        }
        let d = sub.demands[k];
        let mut best: Option<(i128, usize)> = None;
        for r in 0..m {
            if status[r] == FacState::Closed || (!used[r] && used_count >= hi) {
                continue;
            }
            let fac = &sub.facilities[r];
            let over = (loads[r] + d - fac.capacity).max(0) - (loads[r] - fac.capacity).max(0);
            if over > 0 && !sub.soft_capacity {
                continue;
            }
            let mut delta = sub.cost(r, k) as i128 + sub.penalty.charge(over);
            if !used[r] {
                delta += fac.fixed_cost as i128;
            }
            if best.is_none_or(|(b, _)| delta < b) {
                best = Some((delta, r));
            }
        }
        let (_, r) = best?;
        assign[k] = r;
        loads[r] += d;
        if !used[r] {
            used[r] = true;
            used_count += 1;
        }
    }
    if let Some(cont) = &sub.contiguity {
        if !areas_connected(&assign, &sub.facilities, cont) {
            return None;
        }
    }
    sub.evaluate(&assign).map(|_| assign)
}
