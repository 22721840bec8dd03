//! Single-source capacitated facility location: instance handling, an exact
//! branch-and-bound subproblem solver, contiguity tools and a
//! large-neighborhood matheuristic.

pub mod amount;
pub mod contiguity;
pub mod error;
pub mod io;
pub mod matheuristic;
pub mod model;
pub mod report;
pub mod subsolver;

pub use amount::Amount;
pub use error::{Error, Result};
pub use model::{
    check_feasibility, evaluate_objective, evaluate_penalized, AdjacencyGraph, Candidate,
    Cardinality, FeasibilityReport, Instance, Penalty, Point, ProblemSpec, Solution, Variant,
};
pub use matheuristic::{run, run_repeats, RunConfig, RunOutcome, RunStats};
pub use subsolver::SolverChoice;
