use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SEPARATION_MIN;
use crate::network::{self, AllocationSolution, Framework, ProblemInstance};

/// Cartesian search grid: evenly spaced RIS positions (endpoints included)
/// and a shared list of per-user rate levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub ris: [usize; 3],
    pub rate_levels: Vec<f64>,
    /// Maximum number of candidate evaluations.
    pub budget: usize,
}

impl GridSpec {
    /// `RIS points × levels^users`, saturating.
    pub fn size(&self, n_users: usize) -> usize {
        let per_ris = (0..n_users).fold(1usize, |acc, _| acc.saturating_mul(self.rate_levels.len()));
        self.ris.iter().fold(per_ris, |acc, &k| acc.saturating_mul(k))
    }
}

fn rate_vector(levels: &[f64], n: usize, mut k: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for slot in out.iter_mut().rev() {
        *slot = levels[k % levels.len()];
        k /= levels.len();
    }
    out
}

/// Best feasible candidate on the grid for `framework`. Ties keep the first
/// candidate in lexicographic (x, y, h, rates) order.
pub fn exhaustive_search(
    instance: &ProblemInstance,
    grid: &GridSpec,
    framework: Framework,
) -> Result<AllocationSolution> {
    instance.validate()?;
    if grid.ris.contains(&0) || grid.rate_levels.is_empty() {
        return Err(Error::InvalidArgument("grid needs at least one point per axis".into()));
    }
    let n = instance.n_users();
    let size = grid.size(n);
    if size > grid.budget {
        return Err(Error::BudgetExceeded {
            needed: size as u64,
            budget: grid.budget as u64,
        });
    }
    let [nx, ny, nh] = grid.ris;
    let per_ris = size / (nx * ny * nh);
    let points: Vec<_> = (0..nx)
        .flat_map(|i| (0..ny).flat_map(move |j| (0..nh).map(move |k| [i, j, k])))
        .map(|idx| instance.region.grid_point(grid.ris, idx))
        .collect();

    let per_point: Vec<Option<(f64, AllocationSolution)>> = points
        .par_iter()
        .map(|&ris| -> Result<_> {
            if instance.users.iter().any(|u| u.distance(&ris) < SEPARATION_MIN) {
                return Ok(None);
            }
            let links = network::link_states(instance, &ris)?;
            let mut best: Option<(f64, AllocationSolution)> = None;
            for k in 0..per_ris {
                let rates = rate_vector(&grid.rate_levels, n, k);
                let sol = network::evaluate_with_links(instance, ris, &links, &rates)?;
                if !sol.feasible_for(framework) {
                    continue;
                }
                let value = framework.objective(instance, &sol);
                if best.as_ref().is_none_or(|(b, _)| value > *b) {
                    best = Some((value, sol));
                }
            }
            Ok(best)
        })
        .collect::<Result<_>>()?;

    per_point
        .into_iter()
        .flatten()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .map(|(_, sol)| sol)
        .ok_or_else(|| Error::Infeasible("no feasible grid point".into()))
}
