//! Solution files: an optional `# objective <value>` header followed by one
//! `<unit> <candidate>` line per unit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::amount::{pow10, Decimal};
use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

#[derive(Debug, Clone)]
pub struct SolutionFile {
    pub solution: Solution,
    /// The objective written in the header, if any.
    pub stated_objective: Option<Decimal>,
}

impl SolutionFile {
    /// Whether the header objective equals the recomputed one. `None` when
    /// the file has no header.
    pub fn objective_matches(&self, instance: &Instance) -> Option<bool> {
        let stated = self.stated_objective?;
        let actual = self.solution.objective();
        let scale = instance.scale();
        Some(if stated.decimals >= scale {
            actual * pow10(stated.decimals - scale) == stated.mantissa
        } else {
            stated.mantissa * pow10(scale - stated.decimals) == actual
        })
    }
}

pub fn read_solution_file(path: &Path, instance: &Instance) -> Result<SolutionFile> {
    let text = fs::read_to_string(path)?;
    let n = instance.n();
    let mut assign: Vec<Option<usize>> = vec![None; n];
    let mut stated_objective = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("objective") {
                let value = words.next().unwrap_or("");
                stated_objective = Some(
                    Decimal::parse(value)
                        .ok_or_else(|| Error::parse(path, line, format!("bad objective `{value}`")))?,
                );
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let mut words = trimmed.split_whitespace();
        let (Some(u), Some(f), None) = (words.next(), words.next(), words.next()) else {
            return Err(Error::parse(path, line, "expected `<unit> <candidate>`"));
        };
        let u: usize = u
            .parse()
            .ok()
            .filter(|&u| u < n)
            .ok_or_else(|| Error::parse(path, line, format!("bad unit `{u}`")))?;
        let f: usize = f
            .parse()
            .ok()
            .filter(|&f| f < instance.m())
            .ok_or_else(|| Error::parse(path, line, format!("bad candidate `{f}`")))?;
        if assign[u].replace(f).is_some() {
            return Err(Error::parse(path, line, format!("unit {u} assigned twice")));
        }
    }
    if let Some(j) = assign.iter().position(Option::is_none) {
        return Err(Error::Structure(format!("{}: unit {j} is not assigned", path.display())));
    }
    let solution = Solution::from_assignment(instance, assign.into_iter().flatten().collect())?;
    Ok(SolutionFile {
        solution,
        stated_objective,
    })
}

pub fn write_solution_file(path: &Path, instance: &Instance, solution: &Solution) -> Result<()> {
    let mut s = format!("# objective {}\n", instance.format_amount(solution.objective()));
    for (j, &i) in solution.assignment().iter().enumerate() {
        let _ = writeln!(s, "{j} {i}");
    }
    fs::write(path, s)?;
    Ok(())
}
