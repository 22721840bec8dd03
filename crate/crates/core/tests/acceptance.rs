//! Acceptance criteria, one test per criterion. Each prints a single
//! `C<n> PASS|FAIL ...` line; run with `--nocapture` to see them.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::time::{Duration, Instant};

use common::{area_connected, grid_instance, min_cost_sum, small_instance, Oracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sscflp_core::amount::Decimal;
use sscflp_core::contiguity::{find_fragments, flow_feasible, FlowCheck, FlowWitness};
use sscflp_core::io::{compute_sdr_ccr, load_benchmark, sweep, Family, GeneratorParams};
use sscflp_core::matheuristic::{run_observed, run_repeats};
use sscflp_core::report::{compute_gap, compute_improvement, stats, BoundRecord};
use sscflp_core::subsolver::{lagrangian_bound, write_mps, LagrangianState, RestrictedSubproblem};
use sscflp_core::{
    run, AdjacencyGraph, Candidate, Cardinality, Instance, Penalty, Point, ProblemSpec, RunConfig, Solution,
    SolverChoice, Variant,
};

fn verdict(id: &str, pass: bool, detail: String) {
    println!("{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{id} failed: {detail}");
}

fn oracle_runs(id: &str, count_for: impl Fn(u64) -> Option<usize>) {
    let mut matches = 0;
    let mut slowest = Duration::ZERO;
    let mut misses = Vec::new();
    for seed in 0..100u64 {
        let k = count_for(seed);
        let inst = small_instance(1000 + seed, k);
        let spec = match k {
            Some(k) => ProblemSpec::new(Variant::Ssckflp, Some(Cardinality::Exact(k))),
            None => ProblemSpec::sscflp(),
        };
        let best = Oracle { instance: &inst, count: k, graph: None, visit_all: false }
            .solve(|_, _| {})
            .expect("family is feasible");
        let start = Instant::now();
        let out = run(&inst, &spec, None, &RunConfig { mloops: 10, seed, ..RunConfig::default() }).unwrap();
        slowest = slowest.max(start.elapsed());
        if out.stats.feasible && out.best.objective() == best {
            matches += 1;
        } else {
            misses.push(seed);
        }
    }
    let pass = matches == 100 && slowest < Duration::from_secs(2);
    verdict(id, pass, format!("{matches}/100 exact, slowest {:.3}s, misses {misses:?}", slowest.as_secs_f64()));
}

#[test]
fn c1_oracle_sscflp() {
    oracle_runs("C1", |_| None);
}

#[test]
fn c2_oracle_ssckflp() {
    oracle_runs("C2", |seed| Some(1 + (seed % 3) as usize));
}

/// The grid family of the contiguity criteria: 3x3 and 4x4 rook grids, 2
/// and 3 candidates, five demand draws each.
fn grid_family() -> Vec<(String, Instance, AdjacencyGraph, usize)> {
    let mut out = Vec::new();
    for (rows, cols) in [(3, 3), (4, 4)] {
        for m in [2, 3] {
            for s in 0..5u64 {
                let seed = 7000 + (rows * 100 + m * 10) as u64 + s;
                let k = 1 + (s as usize) % m;
                let (inst, g) = grid_instance(seed, rows, cols, m, None);
                out.push((format!("{rows}x{cols}/m{m}/s{s}"), inst, g, k));
            }
        }
    }
    out
}

#[test]
fn c3_oracle_contiguity() {
    let mut total = 0;
    let mut matches = 0;
    let mut slowest = Duration::ZERO;
    let mut misses = Vec::new();
    for (name, inst, g, k) in grid_family() {
        for (spec, count) in [
            (ProblemSpec::new(Variant::Cflsap, None), None),
            (ProblemSpec::new(Variant::Ckflsap, Some(Cardinality::Exact(k))), Some(k)),
        ] {
            let best = Oracle { instance: &inst, count, graph: Some(&g), visit_all: false }.solve(|_, _| {});
            let Some(best) = best else { continue };
            total += 1;
            let start = Instant::now();
            let out = run(&inst, &spec, Some(&g), &RunConfig { mloops: 10, seed: 1, ..RunConfig::default() }).unwrap();
            slowest = slowest.max(start.elapsed());
            if out.stats.feasible && out.best.objective() == best {
                matches += 1;
            } else {
                misses.push(format!("{name}/{} got {} want {best}", spec.variant.name(), out.best.objective()));
            }
        }
    }
    let pass = matches == total && total > 0 && slowest < Duration::from_secs(10);
    verdict(
        "C3",
        pass,
        format!("{matches}/{total} exact, slowest {:.3}s, misses {misses:?}", slowest.as_secs_f64()),
    );
}

/// Checks a witness against the flow rows of facility `i` literally.
fn witness_satisfies_rows(inst: &Instance, g: &AdjacencyGraph, assign: &[usize], i: usize, w: &FlowWitness) -> bool {
    let n_cap = (inst.n() - 1) as u64;
    let home = inst.candidate(i).site.unwrap();
    if w.cap != n_cap || w.sink != home || w.facility != i {
        return false;
    }
    let mut f: HashMap<(usize, usize), u64> = HashMap::new();
    for a in &w.arcs {
        if !g.adjacent(a.from, a.to) {
            return false;
        }
        *f.entry((a.from, a.to)).or_default() += a.amount;
    }
    let x = |j: usize| u64::from(assign[j] == i);
    for j in 0..inst.n() {
        for &k in g.neighbors(j) {
            let v = f.get(&(j, k)).copied().unwrap_or(0);
            // (6), (7); (9) holds by type.
            if v > n_cap * x(j) || v > n_cap * x(k) {
                return false;
            }
        }
        if j != home {
            let out: u64 = g.neighbors(j).iter().map(|&k| f.get(&(j, k)).copied().unwrap_or(0)).sum();
            let inflow: u64 = g.neighbors(j).iter().map(|&k| f.get(&(k, j)).copied().unwrap_or(0)).sum();
            // (8)
            if (out as i128) - (inflow as i128) < x(j) as i128 {
                return false;
            }
        }
    }
    true
}

#[test]
fn c4_flow_equivalence() {
    let mut checked = 0u64;
    let mut counterexamples = Vec::new();
    for (name, inst, g, _) in grid_family() {
        let oracle = Oracle { instance: &inst, count: None, graph: Some(&g), visit_all: true };
        oracle.solve(|assign, _| {
            let sol = Solution::from_assignment(&inst, assign.to_vec()).unwrap();
            for i in sol.open_facilities() {
                checked += 1;
                let connected = area_connected(&inst, &g, assign, i);
                let ok = match flow_feasible(&inst, &sol, &g, i).unwrap() {
                    FlowCheck::Witness(w) => connected && witness_satisfies_rows(&inst, &g, assign, i, &w),
                    FlowCheck::Refused { .. } => !connected,
                };
                if !ok && counterexamples.len() < 5 {
                    counterexamples.push(format!("{name} {assign:?} facility {i}"));
                }
            }
        });
    }
    verdict(
        "C4",
        counterexamples.is_empty(),
        format!("{checked} area checks, counterexamples {counterexamples:?}"),
    );
}

#[test]
fn c5_gap_regression() {
    let dec = |s: &str| Decimal::parse(s).unwrap();
    let bound = BoundRecord { instance: "i3002".into(), lb: dec("16059.34"), optimal: false, ub: None };
    let gap = compute_gap(dec("16156.56"), &bound).unwrap().rounded(2);
    let imp = compute_improvement(dec("37343.34"), dec("37751.08")).unwrap().rounded(2);
    verdict("C5", gap == "0.61" && imp == "1.08", format!("gapavg {gap}% improvement {imp}%"));
}

#[test]
fn c6_lagrangian_validity() {
    let mut violations = 0;
    let mut zero_mismatch = 0;
    let mut cases = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    for seed in 0..100u64 {
        let inst = small_instance(1000 + seed, None);
        let opt = Oracle { instance: &inst, count: None, graph: None, visit_all: false }
            .solve(|_, _| {})
            .unwrap() as f64;
        let sub = RestrictedSubproblem::full(&inst, &ProblemSpec::sscflp(), None, Penalty::for_instance(&inst)).unwrap();
        let (zero, _) = lagrangian_bound(&sub, &LagrangianState::new(&sub));
        if zero != min_cost_sum(&inst) as f64 {
            zero_mismatch += 1;
        }
        for _ in 0..50 {
            let top: f64 = if rng.gen_bool(0.5) { 5.0 } else { 200.0 };
            let lambda: Vec<f64> = (0..inst.m()).map(|_| rng.gen_range(0.0..top)).collect();
            let (bound, _) = lagrangian_bound(&sub, &LagrangianState::with_multipliers(&sub, lambda));
            cases += 1;
            if bound > opt + 1e-9 * opt.abs().max(1.0) {
                violations += 1;
            }
        }
    }
    verdict(
        "C6",
        violations == 0 && zero_mismatch == 0,
        format!("{cases} multiplier vectors, {violations} above optimum, {zero_mismatch} zero-multiplier mismatches"),
    );
}

/// 30 candidates and 150 units on a 10x15 grid, costs distance times
/// demand.
fn medium_instance(seed: u64) -> (Instance, AdjacencyGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (rows, cols) = (10, 15);
    let n = rows * cols;
    let coords: Vec<Point> = (0..n).map(|j| Point { x: (j % cols) as f64, y: (j / cols) as f64 }).collect();
    let demands: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=20)).collect();
    let total: i64 = demands.iter().sum();
    let mut units: Vec<usize> = (0..n).collect();
    for k in 0..30 {
        let pick = rng.gen_range(k..n);
        units.swap(k, pick);
    }
    let sites = &units[..30];
    let cands: Vec<Candidate> = sites
        .iter()
        .map(|&s| Candidate {
            site: Some(s),
            capacity: rng.gen_range(total / 12..=total / 6),
            fixed_cost: rng.gen_range(100..=400),
        })
        .collect();
    let mut costs = Vec::new();
    for &s in sites {
        for j in 0..n {
            costs.push((coords[s].distance(coords[j]) * demands[j] as f64).round() as i64);
        }
    }
    let inst = Instance::new(0, demands, cands, costs, Some(coords)).unwrap();
    (inst, AdjacencyGraph::grid(rows, cols))
}

#[test]
fn c7_invariant_suite() {
    let (inst, g) = medium_instance(77);
    let mut problems = Vec::new();
    let mut iterations = 0;
    let mut accepted_checked = 0;
    let runs: [(ProblemSpec, u64); 4] = [
        (ProblemSpec::sscflp(), 1),
        (ProblemSpec::sscflp(), 2),
        (ProblemSpec::new(Variant::Cflsap, None), 3),
        (ProblemSpec::new(Variant::Cflsap, None), 4),
    ];
    for (spec, seed) in runs {
        let cfg = RunConfig { mloops: 100, seed, max_iterations: Some(300), ..RunConfig::default() };
        let graph = spec.requires_adjacency().then_some(&g);
        let mut fragmented = Vec::new();
        let out = run_observed(&inst, &spec, graph, &cfg, |rec, sol| {
            if rec.accepted && spec.requires_adjacency() {
                accepted_checked += 1;
                if !find_fragments(&inst, sol, &g).is_empty() {
                    fragmented.push(rec.iter);
                }
            }
        })
        .unwrap();
        if !fragmented.is_empty() {
            problems.push(format!("seed {seed}: fragments after acceptance at {fragmented:?}"));
        }
        let mut prev_obj = out.stats.initial_penalized;
        let mut prev_stall = 0;
        for rec in &out.stats.log {
            if rec.objective > prev_obj || rec.accepted != (rec.objective < prev_obj) {
                problems.push(format!("seed {seed} iter {}: objective/acceptance mismatch", rec.iter));
            }
            let expect_stall = if rec.accepted { 0 } else { prev_stall + 1 };
            if rec.not_improved != expect_stall || rec.not_improved > cfg.mloops {
                problems.push(format!("seed {seed} iter {}: notImpr {}", rec.iter, rec.not_improved));
            }
            prev_obj = rec.objective;
            prev_stall = rec.not_improved;
        }
        iterations += out.stats.iterations;
        let again = run(&inst, &spec, graph, &cfg).unwrap();
        if again.stats.log_text(inst.scale()) != out.stats.log_text(inst.scale()) || again.best != out.best {
            problems.push(format!("seed {seed}: replay differs"));
        }
        let stalled = out.stats.log.last().map_or(0, |r| r.not_improved);
        if stalled != cfg.mloops && out.stats.iterations != 300 {
            problems.push(format!("seed {seed}: stopped early"));
        }
    }
    let pass = problems.is_empty() && iterations >= 1000;
    verdict(
        "C7",
        pass,
        format!("{iterations} iterations, {accepted_checked} contiguous acceptances checked, problems {problems:?}"),
    );
}

/// Independent reading of an MPS file: rows by section, columns split by
/// integer markers.
struct MpsCounts {
    rows: usize,
    integer_columns: usize,
    continuous_columns: usize,
    binary_bounds: usize,
    dangling: usize,
}

fn read_mps_counts(text: &str) -> MpsCounts {
    let mut rows = std::collections::HashSet::new();
    let mut integer = std::collections::HashSet::new();
    let mut continuous = std::collections::HashSet::new();
    let mut binary_bounds = 0;
    let mut dangling = 0;
    let mut section = String::new();
    let mut in_int = false;
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("").to_string();
            continue;
        }
        let w: Vec<&str> = line.split_whitespace().collect();
        match section.as_str() {
            "ROWS" => {
                if w[0] != "N" {
                    rows.insert(w[1].to_string());
                }
            }
            "COLUMNS" => {
                if w.len() == 3 && w[1] == "'MARKER'" {
                    in_int = w[2] == "'INTORG'";
                    continue;
                }
                if w[1] != "COST" && !rows.contains(w[1]) {
                    dangling += 1;
                }
                if in_int {
                    integer.insert(w[0].to_string());
                } else {
                    continuous.insert(w[0].to_string());
                }
            }
            "BOUNDS" if w[0] == "BV" => binary_bounds += 1,
            _ => {}
        }
    }
    MpsCounts {
        rows: rows.len(),
        integer_columns: integer.len(),
        continuous_columns: continuous.len(),
        binary_bounds,
        dangling,
    }
}

#[test]
fn c8_model_emission_counts() {
    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut mismatches = Vec::new();
    for shape in 0..20 {
        let n = rng.gen_range(3..=12);
        let m = rng.gen_range(1..=n.min(5));
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if b == a + 1 || rng.gen_bool(0.2) {
                    edges.push((a, b));
                }
            }
        }
        let g = AdjacencyGraph::from_edges(n, &edges).unwrap();
        let cands = (0..m).map(|i| Candidate { site: Some(i * n / m), capacity: 50, fixed_cost: 7 }).collect();
        let costs = (0..m * n).map(|_| rng.gen_range(0..20)).collect();
        let inst = Instance::new(0, (0..n).map(|_| rng.gen_range(1..5)).collect(), cands, costs, None).unwrap();
        let variant = [Variant::Sscflp, Variant::Ssckflp, Variant::Cflsap, Variant::Ckflsap][shape % 4];
        let card = match shape % 8 {
            1 | 3 => Some(Cardinality::Exact(1)),
            5 | 7 => Some(Cardinality::Range { min: 1, max: m }),
            _ => None,
        };
        let spec = ProblemSpec::new(variant, card);
        let mut buf = Vec::new();
        write_mps(&inst, &spec, Some(&g), &mut buf).unwrap();
        let counts = read_mps_counts(&String::from_utf8(buf).unwrap());

        let nsum = g.degree_sum();
        let contig = variant.requires_adjacency();
        let card_rows = match card {
            Some(Cardinality::Exact(_)) => 1,
            Some(Cardinality::Range { .. }) => 2,
            None => 0,
        };
        let want_rows = n + m + card_rows + if contig { 2 * m * nsum + m * (n - 1) } else { 0 };
        let want_bin = m + m * n;
        let want_cont = if contig { m * nsum } else { 0 };
        let got = (counts.rows, counts.integer_columns, counts.continuous_columns, counts.binary_bounds, counts.dangling);
        let want = (want_rows, want_bin, want_cont, want_bin, 0);
        if got != want {
            mismatches.push(format!("shape {shape} ({m}x{n}, {}): got {got:?} want {want:?}", variant.name()));
        }
    }
    verdict("C8", mismatches.is_empty(), format!("20 shapes, mismatches {mismatches:?}"));
}

#[test]
fn c9_benchmark_desk_scale() {
    let Ok(path) = std::env::var("SSCFLP_YANG_30_200_3") else {
        println!("C9 NOT EVALUATED: set SSCFLP_YANG_30_200_3 to the Yang 30_200_3 instance file");
        return;
    };
    let inst = load_benchmark(Path::new(&path), Family::Yang).unwrap();
    let solver = match std::env::var("SSCFLP_EXTERNAL_SOLVER") {
        Ok(cmd) => SolverChoice::External(cmd),
        Err(_) => SolverChoice::Builtin,
    };
    let external = matches!(solver, SolverChoice::External(_));
    let cfg = RunConfig { mloops: 100, seed: 1, solver, ..RunConfig::default() };
    let start = Instant::now();
    let outs = run_repeats(&inst, &ProblemSpec::sscflp(), None, &cfg, 5).unwrap();
    let elapsed = start.elapsed();
    let objs: Vec<Decimal> = outs
        .iter()
        .map(|o| Decimal { mantissa: o.best.objective(), decimals: inst.scale() })
        .collect();
    let st = stats(&objs).unwrap();
    let bound = BoundRecord {
        instance: "30_200_3".into(),
        lb: Decimal { mantissa: 28131, decimals: 0 },
        optimal: true,
        ub: None,
    };
    let best_gap = compute_gap(st.min, &bound).unwrap();
    let avg_gap = st.mean_gap(&bound).unwrap();
    let feasible = outs.iter().all(|o| o.stats.feasible);
    let pass = feasible
        && if external {
            best_gap.num == 0 && avg_gap.to_f64() <= 0.05 && elapsed < Duration::from_secs(600)
        } else {
            best_gap.to_f64() <= 1.0
        };
    verdict(
        "C9",
        pass,
        format!(
            "{} solver: best gap {}%, Objavg gap {}%, {:.1}s",
            if external { "external" } else { "builtin (relaxed target)" },
            best_gap.rounded(2),
            avg_gap.rounded(2),
            elapsed.as_secs_f64()
        ),
    );
}

/// A base region with the GY totals: 1276 units holding 819812 demand and
/// 33 candidates holding 1324763 capacity.
fn gy_like_base() -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(1276);
    let n = 1276;
    let cols = 44;
    let coords: Vec<Point> = (0..n)
        .map(|j| Point { x: (j % cols) as f64 * 900.0, y: (j / cols) as f64 * 900.0 })
        .collect();
    let mut demands: Vec<i64> = (0..n).map(|_| rng.gen_range(100..1200)).collect();
    let sum: i64 = demands.iter().sum();
    for d in &mut demands {
        *d = *d * 819_812 / sum;
    }
    let short = 819_812 - demands.iter().sum::<i64>();
    for d in demands.iter_mut().take(short as usize) {
        *d += 1;
    }
    let mut caps: Vec<i64> = (0..33).map(|_| rng.gen_range(20_000..60_000)).collect();
    let csum: i64 = caps.iter().sum();
    for c in &mut caps {
        *c = *c * 1_324_763 / csum;
    }
    caps[0] += 1_324_763 - caps.iter().sum::<i64>();
    let cands = caps
        .iter()
        .enumerate()
        .map(|(i, &capacity)| Candidate { site: Some(i * 38 + 5), capacity, fixed_cost: 0 })
        .collect();
    Instance::new(0, demands, cands, vec![0; 33 * n], Some(coords)).unwrap()
}

#[test]
fn c10_generator_fidelity() {
    let base = gy_like_base();
    let template = GeneratorParams { mu: 1.8, epsilon: 0.2, seed: 10, ..GeneratorParams::default() };
    let members = sweep(&base, &template).unwrap();
    let mut sdr = Vec::new();
    let mut ccr = Vec::new();
    for m in &members {
        let (s, c) = compute_sdr_ccr(&m.instance).unwrap();
        sdr.push(s.truncated(2));
        ccr.push(c.to_f64());
    }
    let a_sdr = sdr[0].clone();
    let groups_ok = sdr[..5].iter().all(|s| *s == "1.61") && sdr[5..10].iter().all(|s| *s == "1.93")
        && sdr[10..].iter().all(|s| *s == "2.26");
    let monotone = ccr.chunks(5).all(|g| g.windows(2).all(|w| w[0] < w[1]));
    let across = (0..5).all(|u| ccr[u] > ccr[5 + u] && ccr[5 + u] > ccr[10 + u]);
    let ccr_text: Vec<String> = ccr.iter().map(|c| format!("{c:.2}")).collect();
    verdict(
        "C10",
        a_sdr == "1.61" && groups_ok && monotone && across,
        format!("SDR A/B/C {}/{}/{}, CCR {}", sdr[0], sdr[5], sdr[10], ccr_text.join(" ")),
    );
}
