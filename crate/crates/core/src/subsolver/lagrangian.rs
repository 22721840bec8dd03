//! Lagrangian relaxation of the capacity constraints and subgradient
//! updates of the multipliers.

use super::subproblem::RestrictedSubproblem;

/// Branching state of a roster facility.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FacState {
    Free,
    Open,
    Closed,
}

pub(crate) const UNASSIGNED: usize = usize::MAX;

/// A (partial) branching node: facility states, fixed assignments and the
/// loads they induce.
pub(crate) struct NodeView<'a> {
    pub status: &'a [FacState],
    pub assigned: &'a [usize],
    pub loads: &'a [i64],
}

pub(crate) struct DualValue {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

/// Evaluates the Lagrangian dual at `lambda` for the node, or `None` when
/// the node has no feasible completion (an unassigned customer fits
/// nowhere, or the facility count cannot be met).
///
/// ```text
/// L = Σ_open (f - λs) + min over admissible free sets Σ (f - λs)
///   + Σ_assigned (c + λd) + Σ_unassigned min_allowed (c + λd)
///   [+ Σ_open (α - λ)·overload under soft capacities]
/// ```
pub(crate) fn evaluate_dual(sub: &RestrictedSubproblem, lambda: &[f64], view: &NodeView<'_>) -> Option<DualValue> {
    let m = sub.facilities.len();
    let n = sub.customers.len();
    let soft = sub.soft_capacity;
    let mut value = 0.0;
    let mut chosen = vec![false; m];
    let mut open_count = 0usize;
    let mut free_terms: Vec<(f64, usize)> = Vec::new();
    for (r, fac) in sub.facilities.iter().enumerate() {
        let term = fac.fixed_cost as f64 - lambda[r] * fac.capacity as f64;
        match view.status[r] {
            FacState::Open => {
                open_count += 1;
                chosen[r] = true;
                value += term;
                if soft {
                    let over = (view.loads[r] - fac.capacity).max(0) as f64;
                    value += (sub.penalty.alpha as f64 - lambda[r]) * over;
                }
            }
            FacState::Free => free_terms.push((term, r)),
            FacState::Closed => {}
        }
    }
    let (lo, hi) = sub.cardinality.unwrap_or((0, usize::MAX));
    if open_count > hi {
        return None;
    }
    let need = lo.saturating_sub(open_count);
    let room = hi - open_count;
    if need > free_terms.len() {
        return None;
    }
    free_terms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (taken, &(term, r)) in free_terms.iter().enumerate() {
        if taken < need || (term < 0.0 && taken < room) {
            value += term;
            chosen[r] = true;
        } else {
            break;
        }
    }

    let mut flow = vec![0.0f64; m];
    for k in 0..n {
        let d = sub.demands[k];
        let r = view.assigned[k];
        if r != UNASSIGNED {
            value += sub.cost(r, k) as f64 + lambda[r] * d as f64;
            flow[r] += d as f64;
            continue;
        }
        let mut best = f64::INFINITY;
        let mut arg = UNASSIGNED;
        for (r, fac) in sub.facilities.iter().enumerate() {
            if view.status[r] == FacState::Closed {
                continue;
            }
            if !soft && view.loads[r] + d > fac.capacity {
                continue;
            }
            let v = sub.cost(r, k) as f64 + lambda[r] * d as f64;
            if v < best {
                best = v;
                arg = r;
            }
        }
        if arg == UNASSIGNED {
            return None;
        }
        value += best;
        flow[arg] += d as f64;
    }
    let subgradient = (0..m)
        .map(|r| flow[r] - if chosen[r] { sub.facilities[r].capacity as f64 } else { 0.0 })
        .collect();
    Some(DualValue { value, subgradient })
}

/// Multipliers and step control for subgradient optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianState {
    /// One nonnegative multiplier per roster facility.
    pub multipliers: Vec<f64>,
    pub best_lower: f64,
    /// Multipliers that produced `best_lower`.
    pub best_multipliers: Vec<f64>,
    pub best_upper: Option<f64>,
    /// Step scale; halved after `STALL_LIMIT` iterations without progress.
    pub theta: f64,
    pub stall: u32,
}

pub const INITIAL_THETA: f64 = 2.0;
pub const STALL_LIMIT: u32 = 5;
pub const ROOT_ITERATIONS: usize = 50;
pub const REFRESH_ITERATIONS: usize = 10;

impl LagrangianState {
    /// Zero multipliers, no bounds yet.
    pub fn new(sub: &RestrictedSubproblem) -> Self {
        let m = sub.facilities.len();
        LagrangianState {
            multipliers: vec![0.0; m],
            best_lower: f64::NEG_INFINITY,
            best_multipliers: vec![0.0; m],
            best_upper: None,
            theta: INITIAL_THETA,
            stall: 0,
        }
    }

    pub fn with_multipliers(sub: &RestrictedSubproblem, multipliers: Vec<f64>) -> Self {
        assert_eq!(multipliers.len(), sub.facilities.len());
        LagrangianState {
            best_multipliers: multipliers.clone(),
            multipliers,
            ..Self::new(sub)
        }
    }

    /// Records a dual value and moves the multipliers one subgradient step.
    pub(crate) fn step(&mut self, sub: &RestrictedSubproblem, dual: &DualValue) {
        if dual.value > self.best_lower + 1e-9 {
            self.best_lower = dual.value;
            self.best_multipliers.clone_from(&self.multipliers);
            self.stall = 0;
        } else {
            self.stall += 1;
            if self.stall >= STALL_LIMIT {
                self.theta /= 2.0;
                self.stall = 0;
            }
        }
        let norm: f64 = dual.subgradient.iter().map(|g| g * g).sum();
        if norm <= 0.0 {
            return;
        }
        let target = self
            .best_upper
            .unwrap_or_else(|| dual.value + dual.value.abs().max(1.0) * 0.05);
        let gap = target - dual.value;
        if gap <= 0.0 {
            return;
        }
        let step = self.theta * gap / norm;
        let cap = if sub.soft_capacity { sub.penalty.alpha as f64 } else { f64::INFINITY };
        for (lam, g) in self.multipliers.iter_mut().zip(&dual.subgradient) {
            *lam = (*lam + step * g).clamp(0.0, cap);
        }
    }
}

/// The dual value of the whole subproblem at the state's multipliers (a
/// lower bound on its optimum), and the state after one subgradient step.
/// Infeasible subproblems yield `+inf`.
pub fn lagrangian_bound(sub: &RestrictedSubproblem, state: &LagrangianState) -> (f64, LagrangianState) {
    let (status, assigned, loads) = root_view(sub);
    let view = NodeView { status: &status, assigned: &assigned, loads: &loads };
    let mut next = state.clone();
    match evaluate_dual(sub, &state.multipliers, &view) {
        Some(dual) => {
            next.step(sub, &dual);
            (dual.value, next)
        }
        None => (f64::INFINITY, next),
    }
}

pub(crate) fn root_view(sub: &RestrictedSubproblem) -> (Vec<FacState>, Vec<usize>, Vec<i64>) {
    let status = sub
        .facilities
        .iter()
        .map(|f| if f.was_open { FacState::Open } else { FacState::Free })
        .collect();
    (status, vec![UNASSIGNED; sub.customers.len()], vec![0; sub.facilities.len()])
}
