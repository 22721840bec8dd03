use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const GRID: &str = "SSCFLP-GEO 1
UNITS 6
0 0 0 3
1 1 0 2
2 2 0 4
3 0 1 1
4 1 1 5
5 2 1 2
CANDIDATES 3
0 9 10
2 9 12
4 10 8
EDGES 7
0 1
1 2
3 4
4 5
0 3
1 4
2 5
COSTS euclidean_demand
";

fn sscflp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sscflp")).args(args).output().unwrap()
}

fn write_instance(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metadata(report: &str, key: &str) -> Vec<String> {
    let line = report.lines().find(|l| l.starts_with(key)).unwrap();
    line[key.len()..].split_whitespace().map(String::from).collect()
}

#[test]
fn solve_repeats_are_distinct_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let mut reports = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let res = sscflp(&[
            "solve", "--instance", s(&inst), "--problem", "sscflp", "--repeats", "5",
            "--mloops", "100", "--seed", "42", "--out", s(&out),
        ]);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        let report = fs::read_to_string(out.join("grid.sscflp.report.tsv")).unwrap();
        let seeds = metadata(&report, "# seeds:");
        let mut unique = seeds.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 5);
        assert_eq!(metadata(&report, "# objectives:").len(), 5);
        for seed in &seeds {
            assert!(out.join(format!("grid.sscflp.seed{seed}.log")).exists());
        }
        reports.push((metadata(&report, "# objectives:"), fs::read_to_string(out.join("grid.sscflp.sol")).unwrap()));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn contiguity_variant_solves_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let res = sscflp(&["solve", "--instance", s(&inst), "--problem", "ckflsap", "--K", "2", "--out", s(dir.path())]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let sol = dir.path().join("grid.ckflsap.sol");
    let res = sscflp(&["validate", "--instance", s(&inst), "--problem", "ckflsap", "--K", "2", "--solution", s(&sol)]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{stdout}");
    assert!(stdout.contains("open facilities: 2"));
    assert!(res.stderr.is_empty());
}

#[test]
fn cardinality_variant_without_count_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let res = sscflp(&["solve", "--instance", s(&inst), "--problem", "ssckflp"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("--K"));
    let res = sscflp(&["solve", "--instance", s(&inst), "--problem", "sscflp", "--K", "2", "--Kmin", "1", "--Kmax", "2"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn contiguity_without_edges_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = GRID
        .lines()
        .filter(|l| !(l.starts_with("EDGES") || l.len() == 3 && l.as_bytes()[1] == b' '))
        .map(|l| format!("{l}\n"))
        .collect();
    let inst = write_instance(dir.path(), "flat.txt", &text);
    let res = sscflp(&["solve", "--instance", s(&inst), "--problem", "cflsap", "--out", s(dir.path())]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("adjacency"));
    assert!(!dir.path().join("flat.cflsap.report.tsv").exists());
}

#[test]
fn emit_mps_skips_solving() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let mps = dir.path().join("model.mps");
    let res = sscflp(&["solve", "--instance", s(&inst), "--problem", "cflsap", "--emit-mps", s(&mps), "--out", s(dir.path())]);
    assert!(res.status.success());
    let text = fs::read_to_string(&mps).unwrap();
    assert!(text.contains("ROWS") && text.contains("ENDATA"));
    assert!(!dir.path().join("grid.cflsap.report.tsv").exists());

    let direct = dir.path().join("direct.mps");
    let res = sscflp(&["emit-mps", "--instance", s(&inst), "--problem", "cflsap", "--out", s(&direct)]);
    assert!(res.status.success());
    assert_eq!(fs::read_to_string(&direct).unwrap(), text);
}

#[test]
fn validate_reports_capacity_and_objective_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    // Units 0,1,3 to candidate 0; 2,5 to candidate 1; 4 to candidate 2.
    // Fixed 30; costs 0 + 2 + 1 + 0 + 2 + 0.
    let good = write_instance(dir.path(), "good.sol", "# objective 35\n0 0\n1 0\n2 1\n3 0\n4 2\n5 1\n");
    let res = sscflp(&["validate", "--instance", s(&inst), "--solution", s(&good)]);
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(res.status.success(), "{stdout}");
    assert!(stdout.contains("objective: 35"));
    assert!(res.stderr.is_empty());

    let wrong = write_instance(dir.path(), "wrong.sol", "# objective 34\n0 0\n1 0\n2 1\n3 0\n4 2\n5 1\n");
    let res = sscflp(&["validate", "--instance", s(&inst), "--solution", s(&wrong)]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("warning: stated objective 34 differs"));

    let over = write_instance(dir.path(), "over.sol", "0 0\n1 0\n2 0\n3 0\n4 0\n5 0\n");
    let res = sscflp(&["validate", "--instance", s(&inst), "--solution", s(&over)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("capacity exceeded at facility 0"));
}

#[test]
fn report_merges_runs_with_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let res = sscflp(&["solve", "--instance", s(&inst), "--repeats", "2", "--out", s(dir.path())]);
    assert!(res.status.success());
    let report = dir.path().join("grid.sscflp.report.tsv");
    let objs = metadata(&fs::read_to_string(&report).unwrap(), "# objectives:");
    let bounds = write_instance(dir.path(), "bounds.txt", &format!("grid {} opt\n", objs[0]));
    let res = sscflp(&["report", "--bounds", s(&bounds), s(&report)]);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    let row: Vec<&str> = stdout.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "grid");
    assert_eq!(row[3], "2");
    if objs.iter().all(|o| o == &objs[0]) {
        assert_eq!(row[7], "0.00");
        assert_eq!(row[8], "0.00");
    }
}

#[test]
fn generate_sweep_writes_fifteen_instances() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "grid.txt", GRID);
    let out = dir.path().join("gen");
    let res = sscflp(&["generate", "--instance", s(&inst), "--mu", "1.8", "--epsilon", "0.2", "--sweep", "--out", s(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 15);
    assert_eq!(String::from_utf8_lossy(&res.stdout).lines().count(), 16);
    let res = sscflp(&["solve", "--instance", s(&out.join("grid_C5.txt")), "--out", s(&out)]);
    assert!(res.status.success());
}
