//! Restricted subproblems and their solvers.

mod bnb;
mod external;
mod import;
mod lagrangian;
mod mps;
mod subproblem;

pub use bnb::solve_builtin;
pub use external::solve_external;
pub use import::{import_solution, import_subproblem};
pub use mps::{emit_mps, write_mps, write_subproblem_mps};
pub use lagrangian::{lagrangian_bound, LagrangianState};
pub use subproblem::{build_subproblem, RestrictedSubproblem, RosterFacility, SubContiguity, DEFAULT_TIME_LIMIT};

/// Outcome of a subproblem solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubStatus {
    ProvenOptimal,
    /// Stopped by the time or node budget with a solution in hand.
    FeasibleTimeLimit,
    Infeasible,
    /// Stopped by the budget before any solution was found.
    Unknown,
}

impl SubStatus {
    pub fn name(self) -> &'static str {
        match self {
            SubStatus::ProvenOptimal => "optimal",
            SubStatus::FeasibleTimeLimit => "time_limit",
            SubStatus::Infeasible => "infeasible",
            SubStatus::Unknown => "unknown",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, SubStatus::ProvenOptimal | SubStatus::FeasibleTimeLimit)
    }
}

#[derive(Debug, Clone)]
pub struct SubSolution {
    /// Roster index per customer; empty without a solution.
    pub assignment: Vec<usize>,
    /// Per roster facility.
    pub open: Vec<bool>,
    /// Objective under the subproblem's effective costs.
    pub objective: i128,
    pub status: SubStatus,
    pub nodes: u64,
    /// Best dual bound found at the root.
    pub root_bound: f64,
    /// Successive incumbent objectives.
    pub trace: Vec<i128>,
}

/// Which solver handles restricted subproblems.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Builtin,
    /// Shell command driven through MPS and solution files.
    External(String),
}

impl SolverChoice {
    pub fn solve(&self, sub: &RestrictedSubproblem) -> crate::Result<SubSolution> {
        match self {
            SolverChoice::Builtin => Ok(solve_builtin(sub)),
            SolverChoice::External(cmd) => solve_external(sub, cmd),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SolverChoice::Builtin => "builtin".to_string(),
            SolverChoice::External(cmd) => format!("external:{cmd}"),
        }
    }
}

impl std::str::FromStr for SolverChoice {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        if s == "builtin" {
            return Ok(SolverChoice::Builtin);
        }
        match s.strip_prefix("external:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(SolverChoice::External(cmd.to_string())),
            _ => Err(crate::Error::Config(format!("unknown solver `{s}` (builtin or external:<command>)"))),
        }
    }
}
