//! Simulated annealing over RIS placement and initial rates, an exhaustive
//! grid search used as a reference, and the baseline frameworks.

mod exhaustive;
mod sa;

pub use exhaustive::{exhaustive_search, GridSpec};
pub use sa::{simulated_annealing, simulated_annealing_for, Energy, OptimizerResult, SAConfig, TraceEntry};

pub use crate::network::Framework;

use crate::error::Result;
use crate::network::{AllocationSolution, ProblemInstance};

/// Solve the instance under `framework`'s constraint set and objective.
pub fn solve_baseline(instance: &ProblemInstance, framework: Framework, cfg: &SAConfig) -> Result<AllocationSolution> {
    Ok(simulated_annealing_for(instance, framework, cfg)?.best)
}
