//! Independent oracles and instance families for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sscflp_core::{AdjacencyGraph, Candidate, Instance};

/// Exhaustive search over assignments.
pub struct Oracle<'a> {
    pub instance: &'a Instance,
    /// Exact number of used facilities.
    pub count: Option<usize>,
    /// Adjacency for per-area connectivity with self-service.
    pub graph: Option<&'a AdjacencyGraph>,
    /// Skip the cost cut so that every capacity-respecting assignment is
    /// visited.
    pub visit_all: bool,
}

impl Oracle<'_> {
    /// Minimum objective over feasible assignments, calling `visit` on every
    /// capacity-respecting complete assignment with its feasibility.
    pub fn solve(&self, mut visit: impl FnMut(&[usize], bool)) -> Option<i128> {
        let inst = self.instance;
        let n = inst.n();
        let mut assign = vec![0usize; n];
        let mut loads = vec![0i64; inst.m()];
        let mut best = None;
        let mut home_of = vec![None; n];
        if self.graph.is_some() && !self.visit_all {
            for i in 0..inst.m() {
                if let Some(h) = inst.candidate(i).site {
                    home_of[h] = Some(i);
                }
            }
        }
        let mut search = Search { home_of, used: vec![0; inst.m()], banned: vec![false; inst.m()] };
        self.descend(&mut search, 0, &mut assign, &mut loads, 0, &mut best, &mut visit);
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        search: &mut Search,
        j: usize,
        assign: &mut Vec<usize>,
        loads: &mut Vec<i64>,
        partial: i128,
        best: &mut Option<i128>,
        visit: &mut impl FnMut(&[usize], bool),
    ) {
        let inst = self.instance;
        if !self.visit_all {
            if let Some(b) = *best {
                if partial >= b {
                    return;
                }
            }
        }
        if j == inst.n() {
            let ok = self.feasible(assign);
            visit(assign, ok);
            if ok {
                let value = objective(inst, assign);
                if best.is_none_or(|b| value < b) {
                    *best = Some(value);
                }
            }
            return;
        }
        for i in 0..inst.m() {
            let d = inst.demand(j);
            if loads[i] + d > inst.capacity(i) || search.banned[i] {
                continue;
            }
            // A unit served elsewhere rules out its own candidate
            // (self-service); only used when the cost cut is on.
            let evicted = search.home_of[j].filter(|&c| c != i);
            if let Some(c) = evicted {
                if search.used[c] > 0 {
                    continue;
                }
                search.banned[c] = true;
            }
            loads[i] += d;
            search.used[i] += 1;
            assign[j] = i;
            self.descend(search, j + 1, assign, loads, partial + inst.cost(i, j) as i128, best, visit);
            search.used[i] -= 1;
            loads[i] -= d;
            if let Some(c) = evicted {
                search.banned[c] = false;
            }
        }
    }

    fn feasible(&self, assign: &[usize]) -> bool {
        let inst = self.instance;
        let used = used_facilities(inst, assign);
        if let Some(k) = self.count {
            if used.len() != k {
                return false;
            }
        }
        match self.graph {
            Some(g) => used.iter().all(|&i| area_connected(inst, g, assign, i)),
            None => true,
        }
    }
}

struct Search {
    home_of: Vec<Option<usize>>,
    used: Vec<usize>,
    banned: Vec<bool>,
}

pub fn used_facilities(inst: &Instance, assign: &[usize]) -> Vec<usize> {
    let mut used = vec![false; inst.m()];
    for &i in assign {
        used[i] = true;
    }
    (0..inst.m()).filter(|&i| used[i]).collect()
}

pub fn objective(inst: &Instance, assign: &[usize]) -> i128 {
    let fixed: i128 = used_facilities(inst, assign)
        .iter()
        .map(|&i| inst.fixed_cost(i) as i128)
        .sum();
    fixed + assign.iter().enumerate().map(|(j, &i)| inst.cost(i, j) as i128).sum::<i128>()
}

/// The area of `i` holds the facility's own unit and is connected, by
/// union-find over edges inside the area.
pub fn area_connected(inst: &Instance, g: &AdjacencyGraph, assign: &[usize], i: usize) -> bool {
    let Some(home) = inst.candidate(i).site else { return false };
    if assign[home] != i {
        return false;
    }
    let n = assign.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in g.edges() {
        if assign[a] == i && assign[b] == i {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    let root = find(&mut parent, home);
    (0..n).filter(|&j| assign[j] == i).all(|j| find(&mut parent, j) == root)
}

pub fn min_cost_sum(inst: &Instance) -> i128 {
    (0..inst.n())
        .map(|j| (0..inst.m()).map(|i| inst.cost(i, j)).min().unwrap() as i128)
        .sum()
}

/// Random instance with `m` in 2..=4, `n` in 4..=8, demands 1..=9, that has
/// at least one capacity-respecting solution (with exactly `count` used
/// facilities when given).
pub fn small_instance(seed: u64, count: Option<usize>) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let m = rng.gen_range(2..=4);
        let n = rng.gen_range(4..=8);
        if count.is_some_and(|k| k > m) {
            continue;
        }
        let demands: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = demands.iter().sum();
        let dmax = *demands.iter().max().unwrap();
        let cands = (0..m)
            .map(|_| Candidate {
                site: None,
                capacity: rng.gen_range(dmax..=total.max(dmax + 1)),
                fixed_cost: rng.gen_range(5..=60),
            })
            .collect();
        let costs = (0..m * n).map(|_| rng.gen_range(1..=40)).collect();
        let inst = Instance::new(0, demands, cands, costs, None).unwrap();
        let oracle = Oracle { instance: &inst, count, graph: None, visit_all: false };
        if oracle.solve(|_, _| {}).is_some() {
            return inst;
        }
    }
}

/// Random instance on a rook grid with `m` candidates at distinct random
/// units. Costs are Manhattan distance times demand; capacities are drawn
/// until some contiguous assignment (with `count` areas when given) fits.
pub fn grid_instance(seed: u64, rows: usize, cols: usize, m: usize, count: Option<usize>) -> (Instance, AdjacencyGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    let g = AdjacencyGraph::grid(rows, cols);
    loop {
        let mut sites: Vec<usize> = (0..n).collect();
        for k in 0..m {
            let pick = rng.gen_range(k..n);
            sites.swap(k, pick);
        }
        sites.truncate(m);
        let demands: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
        let total: i64 = demands.iter().sum();
        let cands = sites
            .iter()
            .map(|&s| Candidate {
                site: Some(s),
                capacity: rng.gen_range(total * 2 / (m as i64 + 1)..=total),
                fixed_cost: rng.gen_range(10..=80),
            })
            .collect();
        let mut costs = Vec::with_capacity(m * n);
        for &s in &sites {
            let (sr, sc) = ((s / cols) as i64, (s % cols) as i64);
            for (j, &d) in demands.iter().enumerate() {
                let (r, c) = ((j / cols) as i64, (j % cols) as i64);
                costs.push(((sr - r).abs() + (sc - c).abs()) * d);
            }
        }
        let inst = Instance::new(0, demands, cands, costs, None).unwrap();
        let oracle = Oracle { instance: &inst, count, graph: Some(&g), visit_all: false };
        if oracle.solve(|_, _| {}).is_some() {
            return (inst, g);
        }
    }
}
