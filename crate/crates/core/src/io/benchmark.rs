//! Readers for the published SSCFLP benchmark families.
//!
//! Every layout starts with `m n` (facilities, customers) and lists plain
//! decimal numbers separated by arbitrary whitespace:
//!
//! * `orlib`: m pairs `capacity fixed_cost`, then per customer its demand
//!   followed by the m costs of serving it from each facility.
//! * `holmberg`, `yang`, `tb4`: m pairs `capacity fixed_cost`, n demands,
//!   then the cost matrix one facility row at a time.
//! * `tbed1`: n demands, m pairs `capacity fixed_cost`, then the cost matrix
//!   one facility row at a time.
//!
//! Facilities and customers live in separate index spaces, so candidates
//! carry no unit.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use super::{Cursor, DecimalPool};
use crate::error::{Error, Result};
use crate::model::{Candidate, Instance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    OrLib,
    Holmberg,
    Yang,
    Tb4,
    Tbed1,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "orlib" => Ok(Family::OrLib),
            "holmberg" => Ok(Family::Holmberg),
            "yang" => Ok(Family::Yang),
            "tb4" => Ok(Family::Tb4),
            "tbed1" => Ok(Family::Tbed1),
            other => Err(Error::Config(format!("unknown benchmark family `{other}`"))),
        }
    }
}

pub fn load_benchmark(path: &Path, family: Family) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    let instance = parse_benchmark(&text, path, family)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
    if let Some((m, n)) = expected_dimensions(family, stem) {
        if (instance.m(), instance.n()) != (m, n) {
            return Err(Error::Structure(format!(
                "{}: {} x {} instance, but group {stem} has {m} x {n}",
                path.display(),
                instance.m(),
                instance.n()
            )));
        }
    }
    Ok(instance)
}

/// Parses benchmark text; `path` is used only in error messages.
pub fn parse_benchmark(text: &str, path: &Path, family: Family) -> Result<Instance> {
    let mut cur = Cursor::new(path, text);
    let m = cur.usize("facility count")?;
    let n = cur.usize("customer count")?;
    if m == 0 || n == 0 {
        return Err(Error::Structure(format!("{}: empty instance {m} x {n}", path.display())));
    }
    let mut pool = DecimalPool::default();
    let mut facilities = Vec::with_capacity(m);
    let mut demands = Vec::with_capacity(n);
    let mut costs = vec![None; m * n];

    let read_facilities = |cur: &mut Cursor<'_>, pool: &mut DecimalPool, out: &mut Vec<_>| -> Result<()> {
        for _ in 0..m {
            let s = pool.see(cur.decimal("capacity")?);
            let f = pool.see(cur.decimal("fixed cost")?);
            out.push((s, f));
        }
        Ok(())
    };
    let read_demands = |cur: &mut Cursor<'_>, pool: &mut DecimalPool, out: &mut Vec<_>| -> Result<()> {
        for _ in 0..n {
            out.push(pool.see(cur.decimal("demand")?));
        }
        Ok(())
    };

    match family {
        Family::OrLib => {
            read_facilities(&mut cur, &mut pool, &mut facilities)?;
            for j in 0..n {
                demands.push(pool.see(cur.decimal("demand")?));
                for i in 0..m {
                    costs[i * n + j] = Some(pool.see(cur.decimal("cost")?));
                }
            }
        }
        Family::Holmberg | Family::Yang | Family::Tb4 | Family::Tbed1 => {
            if family == Family::Tbed1 {
                read_demands(&mut cur, &mut pool, &mut demands)?;
                read_facilities(&mut cur, &mut pool, &mut facilities)?;
            } else {
                read_facilities(&mut cur, &mut pool, &mut facilities)?;
                read_demands(&mut cur, &mut pool, &mut demands)?;
            }
            for slot in costs.iter_mut() {
                *slot = Some(pool.see(cur.decimal("cost")?));
            }
        }
    }
    cur.finish()?;

    let candidates = facilities
        .iter()
        .map(|&(s, f)| {
            Ok(Candidate {
                site: None,
                capacity: pool.scaled(s, "capacity")?,
                fixed_cost: pool.scaled(f, "fixed cost")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let demands = pool.scaled_all(&demands, "demand")?;
    let costs: Vec<_> = costs.into_iter().map(|c| c.expect("all costs read")).collect();
    let costs = pool.scaled_all(&costs, "cost")?;
    Instance::new(pool.scale, demands, candidates, costs, None)
}

/// `(|I|, |J|)` of the named instance's group, when the group fixes it.
pub fn expected_dimensions(family: Family, stem: &str) -> Option<(usize, usize)> {
    let stem = stem.to_ascii_lowercase();
    match family {
        Family::OrLib => {
            let rest = stem.strip_prefix("cap")?;
            if rest.starts_with(['a', 'b', 'c']) {
                return Some((100, 1000));
            }
            match rest.parse::<u32>().ok()? {
                61..=74 => Some((16, 50)),
                91..=104 => Some((25, 50)),
                121..=134 => Some((50, 50)),
                _ => None,
            }
        }
        Family::Holmberg => match stem.strip_prefix('p')?.parse::<u32>().ok()? {
            1..=12 => Some((10, 50)),
            13..=24 => Some((20, 50)),
            25..=40 => Some((30, 150)),
            56..=71 => Some((30, 200)),
            _ => None,
        },
        Family::Yang | Family::Tb4 => {
            let mut parts = stem.split(['_', '-']);
            let m = parts.next()?.parse().ok()?;
            let n = parts.next()?.parse().ok()?;
            Some((m, n))
        }
        Family::Tbed1 => match stem.strip_prefix('i')?.split_once('_')?.0 {
            "300" => Some((300, 300)),
            "3001500" => Some((300, 1500)),
            "500" => Some((500, 500)),
            "700" => Some((700, 700)),
            "1000" => Some((1000, 1000)),
            _ => None,
        },
    }
}

/// Stall limit used for the instance's group: 10 for small groups, 20 for
/// mid-sized Holmberg groups, 50 for the largest OR-Library and the
/// 300 x 1500 group, 100 otherwise.
pub fn default_mloops(family: Family, stem: &str) -> usize {
    let stem = stem.to_ascii_lowercase();
    match family {
        Family::OrLib => match expected_dimensions(family, &stem) {
            Some((100, 1000)) => 50,
            _ => 10,
        },
        Family::Holmberg => match stem.strip_prefix('p').and_then(|s| s.parse::<u32>().ok()) {
            Some(1..=24) => 10,
            _ => 20,
        },
        Family::Tbed1 if stem.starts_with("i3001500") => 50,
        _ => 100,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Two facilities (capacities 10 and 8.5, fixed costs 100 and 90), three
    // customers with demands 4, 3, 5.
    const ORLIB: &str = "2 3\n10 100\n8.5 90\n4\n1 2\n3\n3 4\n5\n5 6\n";
    const HOLMBERG: &str = "2 3\n10 100\n8.5 90\n4 3 5\n1 3 5\n2 4 6\n";
    const TBED1: &str = "2 3\n4 3 5\n10 100\n8.5 90\n1 3 5\n2 4 6\n";

    fn check(inst: &Instance) {
        assert_eq!(inst.scale(), 1);
        assert_eq!((inst.m(), inst.n()), (2, 3));
        assert_eq!(inst.demands(), &[40, 30, 50]);
        assert_eq!(inst.capacity(1), 85);
        assert_eq!(inst.fixed_cost(0), 1000);
        assert_eq!(inst.cost_row(0), &[10, 30, 50]);
        assert_eq!(inst.cost_row(1), &[20, 40, 60]);
    }

    #[test]
    fn every_layout_reads_the_same_numbers() {
        let p = Path::new("x");
        check(&parse_benchmark(ORLIB, p, Family::OrLib).unwrap());
        for fam in [Family::Holmberg, Family::Yang, Family::Tb4] {
            check(&parse_benchmark(HOLMBERG, p, fam).unwrap());
        }
        check(&parse_benchmark(TBED1, p, Family::Tbed1).unwrap());
    }

    #[test]
    fn truncated_and_oversized_files_fail() {
        let p = Path::new("x");
        let err = parse_benchmark("2 3\n10 100\n8.5 90\n4 3 5\n1 3 5\n2 4\n", p, Family::Holmberg).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 6, .. }), "{err}");
        let err = parse_benchmark("2 3\n10 100\n8.5 90\n4 3 5\n1 3 5\n2 4 6 7\n", p, Family::Holmberg).unwrap_err();
        assert!(matches!(err, Error::Structure(_)), "{err}");
        let err = parse_benchmark("2 3\n10 abc\n", p, Family::Yang).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn group_dimensions() {
        assert_eq!(expected_dimensions(Family::Yang, "30_200_3"), Some((30, 200)));
        assert_eq!(expected_dimensions(Family::Tbed1, "i1000_7"), Some((1000, 1000)));
        assert_eq!(expected_dimensions(Family::Tbed1, "i3001500_2"), Some((300, 1500)));
        assert_eq!(expected_dimensions(Family::OrLib, "cap101"), Some((25, 50)));
        assert_eq!(expected_dimensions(Family::OrLib, "capb3"), Some((100, 1000)));
        assert_eq!(expected_dimensions(Family::Holmberg, "p30"), Some((30, 150)));
        assert_eq!(expected_dimensions(Family::Holmberg, "p45"), None);
        assert_eq!(expected_dimensions(Family::Tb4, "60_300_2_1"), Some((60, 300)));
    }

    #[test]
    fn stall_limits_by_group() {
        assert_eq!(default_mloops(Family::OrLib, "cap71"), 10);
        assert_eq!(default_mloops(Family::OrLib, "capa2"), 50);
        assert_eq!(default_mloops(Family::Holmberg, "p20"), 10);
        assert_eq!(default_mloops(Family::Holmberg, "p60"), 20);
        assert_eq!(default_mloops(Family::Tbed1, "i3001500_4"), 50);
        assert_eq!(default_mloops(Family::Tbed1, "i700_1"), 100);
        assert_eq!(default_mloops(Family::Yang, "30_200_3"), 100);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("30_200_1.txt");
        fs::write(&path, HOLMBERG).unwrap();
        assert!(matches!(load_benchmark(&path, Family::Yang), Err(Error::Structure(_))));
    }
}
