//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sscflp_core::{AdjacencyGraph, Candidate, Instance, Point};

/// Rook grid of `rows`×`cols` units with `m` candidates at distinct units.
/// Costs are rounded Euclidean distance times demand; capacities total
/// roughly three times the demand.
pub fn grid_instance(seed: u64, rows: usize, cols: usize, m: usize) -> (Instance, AdjacencyGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    assert!(m <= n);
    let coords: Vec<Point> = (0..n)
        .map(|j| Point { x: (j % cols) as f64, y: (j / cols) as f64 })
        .collect();
    let demands: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = demands.iter().sum();
    let mut units: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let pick = rng.gen_range(k..n);
        units.swap(k, pick);
    }
    let sites = &units[..m];
    let lo = (2 * total / m as i64).max(20);
    let cands = sites
        .iter()
        .map(|&s| Candidate {
            site: Some(s),
            capacity: rng.gen_range(lo..=2 * lo),
            fixed_cost: rng.gen_range(100..=400),
        })
        .collect();
    let mut costs = Vec::with_capacity(m * n);
    for &s in sites {
        for j in 0..n {
            costs.push((coords[s].distance(coords[j]) * demands[j] as f64).round() as i64);
        }
    }
    let inst = Instance::new(0, demands, cands, costs, Some(coords)).expect("valid fixture");
    (inst, AdjacencyGraph::grid(rows, cols))
}
