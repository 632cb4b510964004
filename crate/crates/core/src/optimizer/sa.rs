use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entanglement::{RATE_MAX, RATE_MIN};
use crate::error::{Error, Result};
use crate::geometry::{Point3D, SEPARATION_MIN};
use crate::network::{self, AllocationSolution, Framework, LinkState, ProblemInstance};

/// Quantity the annealer maximises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Energy {
    /// The framework's own objective.
    #[default]
    WeightedSumRate,
    /// Weighted fairness index of delivered rates.
    Wfi,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SAConfig {
    /// Initial temperature, in units of the starting energy.
    pub t0: f64,
    pub t_min: f64,
    pub cooling: f64,
    pub iters_per_temp: usize,
    /// Half-width of the per-axis RIS move (m).
    pub neighbor_step_pos: f64,
    /// Half-width of a single-rate move (pairs/s).
    pub neighbor_step_rate: f64,
    pub seed: u64,
    pub energy: Energy,
    /// Attempts at a feasible starting point.
    pub restarts: usize,
}

impl Default for SAConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            t_min: 1e-4,
            cooling: 0.95,
            iters_per_temp: 200,
            neighbor_step_pos: 20.0,
            neighbor_step_rate: 5e4,
            seed: 0,
            energy: Energy::WeightedSumRate,
            restarts: 50,
        }
    }
}

impl SAConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.t_min > 0.0
            && self.t0 > self.t_min
            && self.cooling > 0.0
            && self.cooling < 1.0
            && self.iters_per_temp >= 1
            && self.neighbor_step_pos > 0.0
            && self.neighbor_step_rate > 0.0
            && self.restarts >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid annealing schedule {self:?}")))
        }
    }
}

/// Statistics for one temperature level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub temperature: f64,
    /// Best energy so far, unnormalised.
    pub best_energy: f64,
    pub best_objective: f64,
    /// Feasible non-improving proposals at this level.
    pub downhill_proposed: usize,
    pub downhill_accepted: usize,
}

impl TraceEntry {
    pub fn acceptance_ratio(&self) -> Option<f64> {
        (self.downhill_proposed > 0).then(|| self.downhill_accepted as f64 / self.downhill_proposed as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerResult {
    pub best: AllocationSolution,
    pub best_energy: f64,
    pub trace: Vec<TraceEntry>,
    /// Candidate evaluations, including initialisation.
    pub evaluations: usize,
    /// Evaluations spent finding the starting point.
    pub init_evaluations: usize,
}

struct Chain<'a> {
    instance: &'a ProblemInstance,
    framework: Framework,
    energy: Energy,
    rng: ChaCha8Rng,
    evaluations: usize,
}

impl Chain<'_> {
    fn energy_of(&self, sol: &AllocationSolution) -> f64 {
        match self.energy {
            Energy::WeightedSumRate => self.framework.objective(self.instance, sol),
            Energy::Wfi => sol.wfi,
        }
    }

    fn eval(&mut self, ris: Point3D, links: &[LinkState], r_in: &[f64]) -> Result<AllocationSolution> {
        self.evaluations += 1;
        network::evaluate_with_links(self.instance, ris, links, r_in)
    }

    fn random_ris(&mut self) -> Point3D {
        let r = &self.instance.region;
        let mut axis = |lo: f64, hi: f64| if hi > lo { self.rng.random_range(lo..=hi) } else { lo };
        Point3D::new(axis(r.x_min, r.x_max), axis(r.y_min, r.y_max), axis(r.h_min, r.h_max))
    }

    /// Random RIS and rates; when the random rates fail, a second candidate
    /// at the same RIS with delivered rates proportional to the weights.
    fn initialise(&mut self, restarts: usize) -> Result<(AllocationSolution, Vec<LinkState>)> {
        let n = self.instance.n_users();
        for _ in 0..restarts {
            let ris = self.random_ris();
            if self.instance.users.iter().any(|u| u.distance(&ris) < SEPARATION_MIN) {
                continue;
            }
            let links = network::link_states(self.instance, &ris)?;
            let rates: Vec<f64> = (0..n).map(|_| self.rng.random_range(RATE_MIN..=RATE_MAX)).collect();
            let sol = self.eval(ris, &links, &rates)?;
            if sol.feasible_for(self.framework) {
                return Ok((sol, links));
            }
            if links.iter().any(|l| l.p_succ <= 0.0) {
                continue;
            }
            let need: Vec<f64> = self
                .instance
                .demands
                .iter()
                .zip(&links)
                .map(|(d, l)| d.weight / l.p_succ)
                .collect();
            let peak = need.iter().cloned().fold(0.0, f64::max);
            let scale = self.rng.random_range(0.0..=1.0) * RATE_MAX / peak;
            let rates: Vec<f64> = need.iter().map(|v| (v * scale).clamp(RATE_MIN, RATE_MAX)).collect();
            let sol = self.eval(ris, &links, &rates)?;
            if sol.feasible_for(self.framework) {
                return Ok((sol, links));
            }
        }
        Err(Error::Infeasible(format!(
            "no feasible starting point for the {} framework after {restarts} attempts",
            self.framework
        )))
    }
}

/// Anneal under the proposed framework.
pub fn simulated_annealing(instance: &ProblemInstance, cfg: &SAConfig) -> Result<OptimizerResult> {
    simulated_annealing_for(instance, Framework::Proposed, cfg)
}

/// Metropolis annealing with exponential cooling. Infeasible neighbours are
/// rejected; improving ones are always accepted and the rest with
/// probability `exp(ΔU/T)`, with energies normalised by the starting energy.
/// Each proposal picks one block uniformly among the RIS position and the
/// per-user rates: the RIS moves by a uniform step per axis (clamped to the
/// region), a rate by a uniform step (clamped to the source's range).
pub fn simulated_annealing_for(
    instance: &ProblemInstance,
    framework: Framework,
    cfg: &SAConfig,
) -> Result<OptimizerResult> {
    instance.validate()?;
    cfg.validate()?;
    let mut chain = Chain {
        instance,
        framework,
        energy: cfg.energy,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        evaluations: 0,
    };
    let (mut current, mut links) = chain.initialise(cfg.restarts)?;
    let init_evaluations = chain.evaluations;
    let mut cur_energy = chain.energy_of(&current);
    let scale = if cur_energy.is_finite() && cur_energy != 0.0 {
        cur_energy.abs()
    } else {
        1.0
    };
    let mut best = current.clone();
    let mut best_energy = cur_energy;
    let mut trace = Vec::new();
    let n = instance.n_users();
    let mut temperature = cfg.t0;

    while temperature > cfg.t_min {
        let (mut proposed, mut accepted) = (0, 0);
        for _ in 0..cfg.iters_per_temp {
            let block = chain.rng.random_range(0..=n);
            let move_ris = block == n;
            let (cand, cand_links) = if move_ris {
                let s = cfg.neighbor_step_pos;
                let mut step = || chain.rng.random_range(-s..=s);
                let p = current.ris;
                let ris = instance.region.clamp(Point3D::new(p.x + step(), p.y + step(), p.h + step()));
                if instance.users.iter().any(|u| u.distance(&ris) < SEPARATION_MIN) {
                    continue;
                }
                let l = network::link_states(instance, &ris)?;
                (chain.eval(ris, &l, &current.r_in)?, Some(l))
            } else {
                let j = block;
                let s = cfg.neighbor_step_rate;
                let mut rates = current.r_in.clone();
                rates[j] = (rates[j] + chain.rng.random_range(-s..=s)).clamp(RATE_MIN, RATE_MAX);
                (chain.eval(current.ris, &links, &rates)?, None)
            };
            if !cand.feasible_for(framework) {
                continue;
            }
            let cand_energy = chain.energy_of(&cand);
            if !cand_energy.is_finite() {
                continue;
            }
            let delta = (cand_energy - cur_energy) / scale;
            let accept = if delta > 0.0 {
                true
            } else {
                proposed += 1;
                let r: f64 = chain.rng.random();
                let ok = r < (delta / temperature).exp();
                accepted += ok as usize;
                ok
            };
            if accept {
                current = cand;
                cur_energy = cand_energy;
                if let Some(l) = cand_links {
                    links = l;
                }
                if cur_energy > best_energy {
                    best = current.clone();
                    best_energy = cur_energy;
                }
            }
        }
        trace.push(TraceEntry {
            temperature,
            best_energy,
            best_objective: best.objective,
            downhill_proposed: proposed,
            downhill_accepted: accepted,
        });
        temperature *= cfg.cooling;
    }

    Ok(OptimizerResult {
        best,
        best_energy,
        trace,
        evaluations: chain.evaluations,
        init_evaluations,
    })
}
