//! The large-neighborhood matheuristic: a random greedy start, then
//! repeated destroy-and-resolve steps on small restricted subproblems until
//! `mloops` consecutive steps fail to improve.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amount::Amount;
use crate::contiguity::{local_search_shift, repair};
use crate::error::{Error, Result};
use crate::model::{check_feasibility, AdjacencyGraph, Instance, Penalty, ProblemSpec, Solution};
use crate::subsolver::{build_subproblem, RestrictedSubproblem, SolverChoice, SubSolution};

/// Instances with at most this many candidate-unit pairs are handed to the
/// subsolver whole at every iteration.
pub const FULL_NEIGHBORHOOD_LIMIT: usize = 64;

/// Default node budget per subproblem solve.
pub const DEFAULT_NODE_LIMIT: u64 = 20_000;

#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Consecutive non-improving iterations before the run stops.
    pub mloops: usize,
    pub seed: u64,
    pub sub_time_limit: Duration,
    /// Node budget for the built-in subsolver. When set, the time limit is
    /// ignored and runs are reproducible.
    pub sub_node_limit: Option<u64>,
    pub solver: SolverChoice,
    /// Overrides the instance-derived α.
    pub penalty: Option<Penalty>,
    /// Hard stop on the number of iterations.
    pub max_iterations: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mloops: 10,
            seed: 0,
            sub_time_limit: crate::subsolver::DEFAULT_TIME_LIMIT,
            sub_node_limit: Some(DEFAULT_NODE_LIMIT),
            solver: SolverChoice::Builtin,
            penalty: None,
            max_iterations: None,
        }
    }
}

/// Neighborhood size rules for `L` open facilities on an `m`×`n` instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborhoodParams {
    pub q_min: usize,
    pub q_max: usize,
    pub u_max: usize,
}

impl NeighborhoodParams {
    pub fn new(open: usize, m: usize, n: usize) -> Self {
        NeighborhoodParams {
            q_min: (open / 2).clamp(1, 7),
            q_max: open.clamp(1, 10),
            u_max: (m * n / 10).min(3000),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub q: usize,
    /// The destroyed open facilities, nearest first.
    pub i_prime: Vec<usize>,
    /// `i_prime` followed by the surviving nearby candidates.
    pub i_star: Vec<usize>,
    /// Units served by `i_prime`, ascending.
    pub j_star: Vec<usize>,
}

fn ordered_by_cost(instance: &Instance, j: usize, mut facilities: Vec<usize>) -> Vec<usize> {
    facilities.sort_by_key(|&i| (instance.cost(i, j), i));
    facilities
}

fn nearest_candidate(instance: &Instance, j: usize) -> usize {
    (0..instance.m()).min_by_key(|&i| (instance.cost(i, j), i)).unwrap_or(0)
}

/// Draws the facilities to destroy around a random unit and the units they
/// serve, then adds each such unit's nearest candidate and trims the
/// additions at random until the subproblem fits under `U_max`.
///
/// Instances with at most [`FULL_NEIGHBORHOOD_LIMIT`] pairs always get the
/// whole instance.
pub fn select_neighborhood<R: Rng + ?Sized>(instance: &Instance, solution: &Solution, rng: &mut R) -> Neighborhood {
    let (m, n) = (instance.m(), instance.n());
    let open = solution.open_facilities();
    if m * n <= FULL_NEIGHBORHOOD_LIMIT {
        return Neighborhood {
            q: open.len(),
            i_prime: open,
            i_star: (0..m).collect(),
            j_star: (0..n).collect(),
        };
    }
    let params = NeighborhoodParams::new(open.len(), m, n);
    let q = rng.gen_range(params.q_min..=params.q_max);
    let pivot = rng.gen_range(0..n);
    let mut i_prime = ordered_by_cost(instance, pivot, open);
    i_prime.truncate(q);

    let mut in_prime = vec![false; m];
    for &i in &i_prime {
        in_prime[i] = true;
    }
    let j_star: Vec<usize> = (0..n).filter(|&j| in_prime[solution.facility_of(j)]).collect();

    let mut seen = in_prime.clone();
    let mut extra = Vec::new();
    for &j in &j_star {
        let i = nearest_candidate(instance, j);
        if !seen[i] {
            seen[i] = true;
            extra.push(i);
        }
    }
    while !extra.is_empty() && (i_prime.len() + extra.len()) * j_star.len() >= params.u_max {
        let k = rng.gen_range(0..extra.len());
        extra.remove(k);
    }
    let mut i_star = i_prime.clone();
    i_star.extend(extra);
    Neighborhood { q, i_prime, i_star, j_star }
}

/// Random greedy start under the penalized objective. Opens a random seed
/// set (`K` facilities, or enough average capacity for the total demand),
/// gives each seed its own unit (contiguity variants) or its cheapest
/// unit, then assigns the rest in random order to the cheapest open seed
/// counting overload. Contiguity variants are then repaired and improved
/// by boundary shifts.
pub fn generate_initial<R: Rng + ?Sized>(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    penalty: Penalty,
    rng: &mut R,
) -> Result<Solution> {
    spec.validate(instance, graph)?;
    let (m, n) = (instance.m(), instance.n());
    let cap = m.min(n);
    let size = match spec.cardinality {
        Some(card) => {
            let (lo, hi) = card.bounds();
            let want = seed_count(instance);
            want.max(lo).min(hi).min(cap)
        }
        None => seed_count(instance).min(cap),
    }
    .max(1);
    let seeds = index::sample(rng, m, size).into_vec();

    let mut assign = vec![usize::MAX; n];
    let mut loads = vec![0i64; m];
    for &i in &seeds {
        let unit = match (spec.requires_adjacency(), instance.candidate(i).site) {
            (true, Some(h)) => h,
            _ => (0..n)
                .filter(|&j| assign[j] == usize::MAX)
                .min_by_key(|&j| (instance.cost(i, j), j))
                .expect("fewer seeds than units"),
        };
        assign[unit] = i;
        loads[i] += instance.demand(unit);
    }
    let mut rest: Vec<usize> = (0..n).filter(|&j| assign[j] == usize::MAX).collect();
    rest.shuffle(rng);
    let mut open = seeds.clone();
    open.sort_unstable();
    for j in rest {
        let d = instance.demand(j);
        let best = open
            .iter()
            .map(|&i| {
                let cap = instance.capacity(i);
                let extra = (loads[i] + d - cap).max(0) - (loads[i] - cap).max(0);
                (instance.cost(i, j) as Amount + penalty.charge(extra), i)
            })
            .min()
            .expect("at least one seed");
        assign[j] = best.1;
        loads[best.1] += d;
    }
    let sol = Solution::from_assignment(instance, assign)?;
    match (spec.requires_adjacency(), graph) {
        (true, Some(g)) => {
            let repaired = repair(instance, &sol, g, penalty)?;
            Ok(local_search_shift(instance, &repaired, g, penalty))
        }
        _ => Ok(sol),
    }
}

/// ⌈Σd / mean capacity⌉, at least one.
fn seed_count(instance: &Instance) -> usize {
    let total_cap = instance.total_capacity().max(1) as i128;
    let need = instance.total_demand() as i128 * instance.m() as i128;
    (((need + total_cap - 1) / total_cap) as usize).max(1)
}

/// Replaces the part of `solution` covered by `sub` with `sub_solution`.
/// Units outside the subproblem keep their facility; facilities left
/// without units close.
pub fn create_new_solution(
    instance: &Instance,
    solution: &Solution,
    sub: &RestrictedSubproblem,
    sub_solution: &SubSolution,
) -> Result<Solution> {
    if sub_solution.assignment.len() != sub.customers.len() {
        return Err(Error::Structure(format!(
            "sub-solution covers {} of {} units",
            sub_solution.assignment.len(),
            sub.customers.len()
        )));
    }
    let mut assign = solution.assignment().to_vec();
    for (k, &r) in sub_solution.assignment.iter().enumerate() {
        let fac = sub.facilities.get(r).ok_or(Error::InvalidCandidate(r))?;
        assign[sub.customers[k]] = fac.candidate;
    }
    Solution::from_assignment(instance, assign)
}

/// One line of the iteration log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub iter: usize,
    pub q: usize,
    pub roster: usize,
    pub customers: usize,
    /// Subsolver status, prefixed `soft:` when the penalized fallback ran;
    /// `cardinality` when no subproblem could be built and `repair_failed`
    /// when the combined solution could not be made contiguous.
    pub status: String,
    pub accepted: bool,
    /// Incumbent penalized objective after the iteration, in scaled units.
    pub objective: Amount,
    pub not_improved: usize,
}

impl IterationRecord {
    pub fn line(&self, scale: u32) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.iter,
            self.q,
            self.roster,
            self.customers,
            self.status,
            if self.accepted { 1 } else { 0 },
            crate::amount::format_scaled(self.objective, scale)
        )
    }
}

pub const LOG_HEADER: &str = "iter,Q,|I*|,|J*|,status,accepted,objective";

#[derive(Debug, Clone)]
pub struct RunStats {
    pub seed: u64,
    pub iterations: usize,
    pub accepted: usize,
    pub wall_time: Duration,
    pub initial_penalized: Amount,
    pub final_penalized: Amount,
    pub penalty: Penalty,
    /// Best solution has no overload and meets every constraint of the spec.
    pub feasible: bool,
    pub log: Vec<IterationRecord>,
}

impl RunStats {
    /// The iteration log as text, header first.
    pub fn log_text(&self, scale: u32) -> String {
        let mut s = String::from(LOG_HEADER);
        s.push('\n');
        for rec in &self.log {
            s.push_str(&rec.line(scale));
            s.push('\n');
        }
        s
    }

    pub fn status_counts(&self) -> Vec<(String, usize)> {
        let mut counts: Vec<(String, usize)> = Vec::new();
        for rec in &self.log {
            match counts.iter_mut().find(|(s, _)| *s == rec.status) {
                Some(entry) => entry.1 += 1,
                None => counts.push((rec.status.clone(), 1)),
            }
        }
        counts.sort();
        counts
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best: Solution,
    pub stats: RunStats,
}

impl fmt::Display for RunStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "seed {} iterations {} accepted {} time {:.3}s feasible {}",
            self.seed,
            self.iterations,
            self.accepted,
            self.wall_time.as_secs_f64(),
            self.feasible
        )
    }
}

pub fn run(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    config: &RunConfig,
) -> Result<RunOutcome> {
    run_observed(instance, spec, graph, config, |_, _| {})
}

/// Like [`run`], calling `observe` after every iteration with its record and
/// the incumbent.
pub fn run_observed(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    config: &RunConfig,
    mut observe: impl FnMut(&IterationRecord, &Solution),
) -> Result<RunOutcome> {
    let start = Instant::now();
    spec.validate(instance, graph)?;
    let penalty = config.penalty.unwrap_or_else(|| Penalty::for_instance(instance));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current = generate_initial(instance, spec, graph, penalty, &mut rng)?;
    let mut value = current.penalized(penalty);
    let initial_penalized = value;
    let contiguity = graph.filter(|_| spec.requires_adjacency());

    let mut log = Vec::new();
    let mut not_improved = 0;
    let mut accepted = 0;
    let mut iter = 0;
    while not_improved < config.mloops && config.max_iterations.is_none_or(|cap| iter < cap) {
        iter += 1;
        let hood = select_neighborhood(instance, &current, &mut rng);
        let mut record = IterationRecord {
            iter,
            q: hood.q,
            roster: hood.i_star.len(),
            customers: hood.j_star.len(),
            status: String::new(),
            accepted: false,
            objective: value,
            not_improved,
        };
        let candidate = match build_subproblem(instance, spec, graph, &current, &hood.i_star, &hood.j_star, penalty) {
            Err(Error::CardinalityInfeasible { .. }) => {
                record.status = "cardinality".into();
                None
            }
            Err(e) => return Err(e),
            Ok(mut sub) => {
                sub.time_limit = config.sub_time_limit;
                sub.node_limit = config.sub_node_limit;
                record.roster = sub.facility_count();
                let mut result = config.solver.solve(&sub)?;
                let mut prefix = "";
                if !result.status.has_solution() {
                    sub.soft_capacity = true;
                    result = config.solver.solve(&sub)?;
                    prefix = "soft:";
                }
                record.status = format!("{prefix}{}", result.status.name());
                if result.status.has_solution() {
                    let mut next = create_new_solution(instance, &current, &sub, &result)?;
                    match contiguity {
                        Some(g) => match repair(instance, &next, g, penalty) {
                            Ok(repaired) => {
                                next = local_search_shift(instance, &repaired, g, penalty);
                                Some(next)
                            }
                            Err(Error::Repair(_)) => {
                                record.status = "repair_failed".into();
                                None
                            }
                            Err(e) => return Err(e),
                        },
                        None => Some(next),
                    }
                } else {
                    None
                }
            }
        };
        match candidate {
            Some(next) if next.penalized(penalty) < value => {
                value = next.penalized(penalty);
                current = next;
                not_improved = 0;
                accepted += 1;
                record.accepted = true;
            }
            _ => not_improved += 1,
        }
        record.objective = value;
        record.not_improved = not_improved;
        observe(&record, &current);
        log.push(record);
    }

    let feasible = current.total_overload() == 0 && check_feasibility(instance, spec, &current, graph)?.is_feasible();
    Ok(RunOutcome {
        stats: RunStats {
            seed: config.seed,
            iterations: iter,
            accepted,
            wall_time: start.elapsed(),
            initial_penalized,
            final_penalized: value,
            penalty,
            feasible,
            log,
        },
        best: current,
    })
}

/// The seed of repeat `r` under master seed `seed`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add(r as u64)
}

/// Independent runs with seeds `repeat_seed(config.seed, r)`, run on
/// separate threads. Results are in repeat order.
pub fn run_repeats(
    instance: &Instance,
    spec: &ProblemSpec,
    graph: Option<&AdjacencyGraph>,
    config: &RunConfig,
    repeats: usize,
) -> Result<Vec<RunOutcome>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..repeats)
            .map(|r| {
                let cfg = RunConfig { seed: repeat_seed(config.seed, r), ..config.clone() };
                scope.spawn(move || run(instance, spec, graph, &cfg))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    })
}
