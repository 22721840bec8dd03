//! Reading `name value` solution files written by an external solver.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::subproblem::RestrictedSubproblem;
use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

/// Variable values by name; later lines override earlier ones.
fn read_values(path: &Path) -> Result<Vec<(String, f64, usize)>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let (Some(name), Some(value), None) = (words.next(), words.next(), words.next()) else {
            return Err(Error::parse(path, idx + 1, "expected `<name> <value>`"));
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::parse(path, idx + 1, format!("bad value `{value}`")))?;
        out.push((name.to_string(), value, idx + 1));
    }
    Ok(out)
}

enum Var {
    Assign(usize, usize),
    Other,
}

fn classify(name: &str) -> Option<Var> {
    let index = |s: &str| s.parse::<usize>().ok();
    if let Some(rest) = name.strip_prefix('x') {
        let (i, j) = rest.split_once('_')?;
        return Some(Var::Assign(index(i)?, index(j)?));
    }
    if let Some(rest) = name.strip_prefix('y').or_else(|| name.strip_prefix('H')) {
        return index(rest).map(|_| Var::Other);
    }
    if let Some(rest) = name.strip_prefix('f') {
        let parts: Vec<&str> = rest.split('_').collect();
        if parts.len() == 3 && parts.iter().all(|p| index(p).is_some()) {
            return Some(Var::Other);
        }
    }
    None
}

/// Collects `x<i>_<j>` variables above 0.5 into a per-unit choice, mapped
/// through `facility` and `unit` into local indices.
fn collect(
    path: &Path,
    n: usize,
    facility: impl Fn(usize) -> Option<usize>,
    unit: impl Fn(usize) -> Option<usize>,
) -> Result<Vec<usize>> {
    let mut chosen: Vec<Option<usize>> = vec![None; n];
    let mut values: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    for (name, value, line) in read_values(path)? {
        match classify(&name) {
            Some(Var::Assign(i, j)) => {
                values.insert((i, j), (value, line));
            }
            Some(Var::Other) => {}
            None => return Err(Error::parse(path, line, format!("unknown variable `{name}`"))),
        }
    }
    let mut entries: Vec<_> = values.into_iter().collect();
    entries.sort_unstable_by_key(|e| (e.1).1);
    for ((i, j), (value, line)) in entries {
        if value <= 0.5 {
            continue;
        }
        let (Some(r), Some(k)) = (facility(i), unit(j)) else {
            return Err(Error::parse(path, line, format!("unknown variable `x{i}_{j}`")));
        };
        if chosen[k].replace(r).is_some() {
            return Err(Error::parse(path, line, format!("unit {j} assigned twice")));
        }
    }
    chosen
        .iter()
        .enumerate()
        .map(|(k, c)| c.ok_or(k))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|k| Error::Import(format!("{}: unit at position {k} is not assigned", path.display())))
}

/// Rebuilds a full solution from the `x` variables of a solver output
/// file. The objective is recomputed from the instance.
pub fn import_solution(path: &Path, instance: &Instance) -> Result<Solution> {
    let (m, n) = (instance.m(), instance.n());
    let assign = collect(path, n, |i| (i < m).then_some(i), |j| (j < n).then_some(j))?;
    Solution::from_assignment(instance, assign)
}

/// Reads a solver output for a model written by `write_subproblem_mps`, as
/// roster indices per local customer.
pub fn import_subproblem(path: &Path, sub: &RestrictedSubproblem) -> Result<Vec<usize>> {
    let roster: HashMap<usize, usize> = sub.facilities.iter().enumerate().map(|(r, f)| (f.candidate, r)).collect();
    let local: HashMap<usize, usize> = sub.customers.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    collect(path, sub.customers.len(), |i| roster.get(&i).copied(), |j| local.get(&j).copied())
}
