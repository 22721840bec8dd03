//! File-exchange bridge to an outside MIP solver.
//!
//! The command is run through `sh -c` as `<command> <model.mps> <sol.txt>
//! <seconds>`. It must write `name value` lines to the solution path and
//! may add a `# status <optimal|time_limit|infeasible>` line.

use std::fs;
use std::process::Command;

use super::import::import_subproblem;
use super::mps::write_subproblem_mps;
use super::subproblem::RestrictedSubproblem;
use super::{SubSolution, SubStatus};
use crate::error::{Error, Result};

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

pub fn solve_external(sub: &RestrictedSubproblem, command: &str) -> Result<SubSolution> {
    let dir = tempfile::tempdir()?;
    let model = dir.path().join("model.mps");
    let sol = dir.path().join("sol.txt");
    let mut buf = Vec::new();
    write_subproblem_mps(sub, &mut buf)?;
    fs::write(&model, buf)?;

    let line = format!(
        "{command} {} {} {}",
        quote(&model.to_string_lossy()),
        quote(&sol.to_string_lossy()),
        sub.time_limit.as_secs_f64().ceil().max(1.0)
    );
    let out = Command::new("sh").arg("-c").arg(&line).output()?;
    if !out.status.success() {
        return Err(Error::External(format!(
            "`{command}` exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    let text = fs::read_to_string(&sol)
        .map_err(|e| Error::External(format!("no solution file from `{command}`: {e}")))?;
    let status = text
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|l| {
            let mut w = l.split_whitespace();
            (w.next() == Some("status")).then(|| w.next().unwrap_or("").to_string())
        });
    let status = match status.as_deref() {
        Some("optimal") => SubStatus::ProvenOptimal,
        Some("infeasible") => SubStatus::Infeasible,
        _ => SubStatus::FeasibleTimeLimit,
    };
    let m = sub.facilities.len();
    if status == SubStatus::Infeasible {
        return Ok(SubSolution {
            assignment: Vec::new(),
            open: vec![false; m],
            objective: 0,
            status,
            nodes: 0,
            root_bound: f64::INFINITY,
            trace: Vec::new(),
        });
    }
    let assignment = import_subproblem(&sol, sub)?;
    let objective = sub
        .evaluate(&assignment)
        .ok_or_else(|| Error::External(format!("`{command}` returned an assignment that breaks the model")))?;
    let mut open: Vec<bool> = sub.facilities.iter().map(|f| f.was_open).collect();
    for &r in &assignment {
        open[r] = true;
    }
    Ok(SubSolution {
        assignment,
        open,
        objective,
        status,
        nodes: 0,
        root_bound: f64::NEG_INFINITY,
        trace: vec![objective],
    })
}
