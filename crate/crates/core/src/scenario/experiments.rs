use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore};
use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::sampling::{min_fidelities, rep_rng, users_for_rep};
use super::table::{GroupSummary, ResultRow, ResultTable};
use crate::channel::{EnvironmentParams, PointingJitter, TurbulenceStrength, Weather};
use crate::error::{Error, Result};
use crate::geometry::Point3D;
use crate::link;
use crate::network::{self, AllocationSolution, Framework, ProblemInstance};
use crate::optimizer::{simulated_annealing_for, SAConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    RisPlacement,
    RateComparison,
    FidelityComparison,
    DistanceFidelityHeatmap,
    Scalability,
    PsuccSweep,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 6] = [
        ExperimentName::RisPlacement,
        ExperimentName::RateComparison,
        ExperimentName::FidelityComparison,
        ExperimentName::DistanceFidelityHeatmap,
        ExperimentName::Scalability,
        ExperimentName::PsuccSweep,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ExperimentName::RisPlacement => "ris-placement",
            ExperimentName::RateComparison => "rate-comparison",
            ExperimentName::FidelityComparison => "fidelity-comparison",
            ExperimentName::DistanceFidelityHeatmap => "distance-fidelity-heatmap",
            ExperimentName::Scalability => "scalability",
            ExperimentName::PsuccSweep => "psucc-sweep",
        }
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

/// Single-candidate and single-solve commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Psucc,
    Fidelity,
    Evaluate,
    Optimize,
}

impl Command {
    pub fn tag(self) -> &'static str {
        match self {
            Command::Psucc => "psucc",
            Command::Fidelity => "fidelity",
            Command::Evaluate => "evaluate",
            Command::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub summary: Vec<GroupSummary>,
}

impl ExperimentOutput {
    fn new(mut rows: Vec<ResultRow>) -> Self {
        rows.sort_by_key(|r| r.rep);
        let table = ResultTable::new(rows);
        let summary = table.summarize();
        Self { table, summary }
    }
}

/// Environmental variation applied on top of the configured environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Baseline,
    Rainy,
    HighPointing,
    StrongTurbulence,
}

impl Condition {
    pub fn tag(self) -> &'static str {
        match self {
            Condition::Baseline => "default",
            Condition::Rainy => "rainy",
            Condition::HighPointing => "high-pointing",
            Condition::StrongTurbulence => "strong-turbulence",
        }
    }

    pub fn apply(self, env: &mut EnvironmentParams) {
        match self {
            Condition::Baseline => {}
            Condition::Rainy => env.attenuation_db_per_km = Weather::Rainy.attenuation_db_per_km(),
            Condition::HighPointing => (env.sigma_theta, env.sigma_phi) = PointingJitter::High.sigmas(),
            Condition::StrongTurbulence => env.cn2 = TurbulenceStrength::Strong.cn2(),
        }
    }
}

/// First scenario of the placement study: three users 50 m apart on the
/// x-axis. The second moves the nearest user to x = 200 m.
pub fn placement_users(scenario: usize) -> Vec<Point3D> {
    let first = if scenario == 1 { 350.0 } else { 200.0 };
    [first, 400.0, 450.0].map(|x| Point3D::new(x, 0.0, 10.0)).to_vec()
}

struct Job {
    variant: String,
    param: Option<f64>,
    framework: Framework,
    rep: usize,
    instance: ProblemInstance,
    sa_seed: u64,
}

struct Ctx<'a> {
    cfg: &'a ScenarioConfig,
    experiment: &'static str,
    seed: u64,
}

impl Ctx<'_> {
    fn row(&self, variant: &str, param: Option<f64>, framework: &str, rep: usize) -> ResultRow {
        ResultRow {
            experiment: self.experiment.to_string(),
            variant: variant.to_string(),
            param,
            framework: framework.to_string(),
            seed: self.seed,
            rep,
            ..Default::default()
        }
    }

    fn solution_rows(&self, base: &ResultRow, inst: &ProblemInstance, sol: &AllocationSolution, framework: Framework) -> Vec<ResultRow> {
        let flags = sol.flags;
        let violated: Vec<&str> = [
            ("capacity", flags.capacity),
            ("rate-domain", flags.rate_domain),
            ("min-rate", flags.min_rate),
            ("fairness", flags.fairness),
            ("fidelity", flags.fidelity),
            ("region", flags.region),
            ("separation", flags.separation),
        ]
        .into_iter()
        .filter_map(|(name, ok)| (!ok).then_some(name))
        .collect();
        let d_sr = inst.qbs.distance(&sol.ris);
        inst.users
            .iter()
            .enumerate()
            .map(|(i, u)| ResultRow {
                user: Some(i),
                user_x: Some(u.x),
                user_y: Some(u.y),
                user_h: Some(u.h),
                ris_x: Some(sol.ris.x),
                ris_y: Some(sol.ris.y),
                ris_h: Some(sol.ris.h),
                d_e2e: Some(d_sr + sol.ris.distance(u)),
                r_in: Some(sol.r_in[i]),
                p_succ: Some(sol.per_user_p_succ[i]),
                r_e2e: Some(sol.per_user_r_e2e[i]),
                fidelity: Some(sol.per_user_fidelity[i]),
                min_fidelity: Some(inst.demands[i].min_fidelity),
                wfi: Some(sol.wfi),
                objective: Some(sol.objective),
                sum_rate: Some(sol.sum_rate()),
                feasible: sol.feasible_for(framework),
                violated: violated.join(";"),
                ..base.clone()
            })
            .collect()
    }

    fn run_job(&self, job: &Job) -> Result<Vec<ResultRow>> {
        let start = Instant::now();
        let sa = SAConfig {
            seed: job.sa_seed,
            ..self.cfg.optimizer
        };
        let mut base = self.row(&job.variant, job.param, job.framework.tag(), job.rep);
        let mut rows = match simulated_annealing_for(&job.instance, job.framework, &sa) {
            Ok(res) => self.solution_rows(&base, &job.instance, &res.best, job.framework),
            Err(Error::Infeasible(msg)) => {
                base.violated = format!("infeasible: {msg}");
                vec![base]
            }
            Err(e) => return Err(e),
        };
        if self.cfg.record_timing {
            let t = start.elapsed().as_secs_f64();
            rows.iter_mut().for_each(|r| r.wall_time_s = Some(t));
        }
        Ok(rows)
    }

    fn run_jobs(&self, jobs: Vec<Job>) -> Result<ExperimentOutput> {
        let rows: Vec<Vec<ResultRow>> = jobs.par_iter().map(|j| self.run_job(j)).collect::<Result<_>>()?;
        Ok(ExperimentOutput::new(rows.into_iter().flatten().collect()))
    }
}

/// Run a named experiment family. Repetitions draw from independent
/// streams of the configured seed; rows are ordered by repetition.
pub fn run_experiment(name: ExperimentName, cfg: &ScenarioConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        experiment: name.tag(),
        seed: if name == ExperimentName::PsuccSweep {
            cfg.seed.unwrap_or(0)
        } else {
            cfg.require_seed()?
        },
    };
    match name {
        ExperimentName::PsuccSweep => psucc_sweep(&ctx),
        _ => ctx.run_jobs(jobs_for(name, &ctx)?),
    }
}

fn jobs_for(name: ExperimentName, ctx: &Ctx) -> Result<Vec<Job>> {
    let cfg = ctx.cfg;
    let mut jobs = Vec::new();
    for rep in 0..cfg.reps.unwrap_or(super::DEFAULT_REPS) {
        let mut rng = rep_rng(ctx.seed, rep);
        let sa_seed = rng.next_u64();
        let mut push = |variant: String, param: Option<f64>, framework: Framework, instance: ProblemInstance| {
            jobs.push(Job {
                variant,
                param,
                framework,
                rep,
                instance,
                sa_seed,
            })
        };
        match name {
            ExperimentName::RisPlacement => {
                let fmin = min_fidelities(&cfg.demands, 3, &mut rng)?;
                for scenario in [1, 2] {
                    for (label, weights) in [("equal", [1.0 / 3.0; 3]), ("weighted", [0.1, 0.3, 0.6])] {
                        let mut inst = cfg.instance(placement_users(scenario), &fmin)?;
                        for (d, w) in inst.demands.iter_mut().zip(weights) {
                            d.weight = w;
                        }
                        push(format!("s{scenario}-{label}"), None, cfg.framework, inst);
                    }
                }
            }
            ExperimentName::RateComparison => {
                let fmin = min_fidelities(&cfg.demands, 3, &mut rng)?;
                let inst = cfg.instance(placement_users(1), &fmin)?;
                for fw in [Framework::Proposed, Framework::RateMax, Framework::LogRateMax] {
                    push("s1".into(), None, fw, inst.clone());
                }
            }
            ExperimentName::FidelityComparison => {
                let mut users = users_for_rep(&cfg.users, &mut rng)?;
                let qbs = cfg.users.qbs_point();
                users.sort_by(|a, b| qbs.distance(a).total_cmp(&qbs.distance(b)));
                let fmin = match cfg.demands.min_fidelity {
                    Some(_) => min_fidelities(&cfg.demands, users.len(), &mut rng)?,
                    None => vec![cfg.experiments.comparison_min_fidelity; users.len()],
                };
                for turb in [TurbulenceStrength::Moderate, TurbulenceStrength::Strong] {
                    let mut inst = cfg.instance(users.clone(), &fmin)?;
                    inst.env.cn2 = turb.cn2();
                    let variant = if turb == TurbulenceStrength::Moderate { "moderate" } else { "strong" };
                    for fw in [Framework::Proposed, Framework::Fa, Framework::Ffa] {
                        push(variant.into(), None, fw, inst.clone());
                    }
                }
            }
            ExperimentName::DistanceFidelityHeatmap => {
                let mut users = users_for_rep(&cfg.users, &mut rng)?;
                // two background users; the third is placed on the sweep
                users.truncate(2);
                let bearing = rng.random_range(0.0..std::f64::consts::FRAC_PI_4);
                let qbs = cfg.users.qbs_point();
                let dh = qbs.h - cfg.users.height;
                for turb in [TurbulenceStrength::Moderate, TurbulenceStrength::Strong] {
                    let tname = if turb == TurbulenceStrength::Moderate { "moderate" } else { "strong" };
                    for &f3 in &cfg.experiments.heatmap_fidelities {
                        for &d in &cfg.experiments.heatmap_distances {
                            let ground = (d * d - dh * dh).max(0.0).sqrt();
                            let mut all = users.clone();
                            all.push(Point3D::new(
                                qbs.x + ground * bearing.cos(),
                                qbs.y + ground * bearing.sin(),
                                cfg.users.height,
                            ));
                            let mut fmin = vec![0.5; users.len()];
                            fmin.push(f3);
                            let mut inst = cfg.instance(all, &fmin)?;
                            inst.env.cn2 = turb.cn2();
                            push(format!("{tname};fmin3={f3}"), Some(d), cfg.framework, inst);
                        }
                    }
                }
            }
            ExperimentName::Scalability => {
                let max_n = cfg.experiments.scalability_users.iter().copied().max().unwrap_or(0);
                let mut sub = cfg.users.clone();
                sub.positions = None;
                let pool = super::sampling::sample_user_layout_with(&sub, max_n.max(1), &mut rng)?;
                let fpool = min_fidelities(&cfg.demands, max_n.max(1), &mut rng)?;
                for &n in &cfg.experiments.scalability_users {
                    for cond in [Condition::Baseline, Condition::Rainy, Condition::HighPointing, Condition::StrongTurbulence] {
                        let mut demand_cfg = cfg.clone();
                        demand_cfg.demands.weights = None;
                        let mut inst = demand_cfg.instance(pool[..n].to_vec(), &fpool[..n])?;
                        cond.apply(&mut inst.env);
                        push(cond.tag().into(), Some(n as f64), cfg.framework, inst);
                    }
                }
            }
            ExperimentName::PsuccSweep => unreachable!("handled without jobs"),
        }
    }
    Ok(jobs)
}

fn psucc_sweep(ctx: &Ctx) -> Result<ExperimentOutput> {
    let cfg = ctx.cfg;
    let base_env = cfg.environment.resolve()?;
    let mut points = Vec::new();
    for weather in [Weather::Sunny, Weather::Rainy] {
        for turb in [TurbulenceStrength::Moderate, TurbulenceStrength::Strong] {
            for pointing in [PointingJitter::Low, PointingJitter::High] {
                let mut env = base_env;
                env.attenuation_db_per_km = weather.attenuation_db_per_km();
                env.cn2 = turb.cn2();
                (env.sigma_theta, env.sigma_phi) = pointing.sigmas();
                let variant = format!(
                    "{}/{}/{}",
                    if weather == Weather::Sunny { "sunny" } else { "rainy" },
                    if turb == TurbulenceStrength::Moderate { "moderate" } else { "strong" },
                    if pointing == PointingJitter::Low { "low-pointing" } else { "high-pointing" },
                );
                for &d in &cfg.experiments.psucc_distances {
                    points.push((variant.clone(), env, d));
                }
            }
        }
    }
    let rows: Vec<ResultRow> = points
        .par_iter()
        .enumerate()
        .map(|(k, (variant, env, d))| {
            let budget = link::budget_from_distances(env, d / 2.0, d / 2.0, cfg.channel.rytov_loss)?;
            let mut row = ctx.row(variant, Some(*d), "", 0);
            row.d_e2e = Some(*d);
            row.p_succ = Some(link::prob_success(&budget, &cfg.channel.quadrature)?);
            if cfg.experiments.psucc_mc_samples > 0 {
                let mc_seed = rep_rng(ctx.seed, k).next_u64();
                let (p, se) = link::prob_success_mc(&budget, cfg.experiments.psucc_mc_samples, mc_seed)?;
                row.p_succ_mc = Some(p);
                row.p_succ_se = Some(se);
            }
            row.feasible = true;
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentOutput::new(rows))
}

/// Run one of the single-candidate commands over `cfg.reps` repetitions
/// (one by default).
/// `psucc`, `fidelity` and `evaluate` need a `[candidate]` section
/// (`fidelity` and `evaluate` also need its rates).
pub fn run_command(cmd: Command, cfg: &ScenarioConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sampled = cfg.users.positions.is_none() || cfg.demands.min_fidelity.is_none();
    let seed = if sampled || cmd == Command::Optimize {
        cfg.require_seed()?
    } else {
        cfg.seed.unwrap_or(0)
    };
    let ctx = Ctx {
        cfg,
        experiment: cmd.tag(),
        seed,
    };
    if cmd == Command::Optimize {
        let mut jobs = Vec::new();
        for rep in 0..cfg.reps.unwrap_or(1) {
            let mut rng = rep_rng(seed, rep);
            let sa_seed = rng.next_u64();
            let users = users_for_rep(&cfg.users, &mut rng)?;
            let fmin = min_fidelities(&cfg.demands, users.len(), &mut rng)?;
            jobs.push(Job {
                variant: String::new(),
                param: None,
                framework: cfg.framework,
                rep,
                instance: cfg.instance(users, &fmin)?,
                sa_seed,
            });
        }
        return ctx.run_jobs(jobs);
    }
    let cand = cfg
        .candidate
        .as_ref()
        .ok_or_else(|| Error::Config(format!("`{}` needs a [candidate] section with the RIS position", cmd.tag())))?;
    let ris = cand.ris_point();
    let rows: Vec<Vec<ResultRow>> = (0..cfg.reps.unwrap_or(1))
        .into_par_iter()
        .map(|rep| {
            let mut rng = rep_rng(seed, rep);
            let _sa_seed = rng.next_u64();
            let users = users_for_rep(&cfg.users, &mut rng)?;
            let fmin = min_fidelities(&cfg.demands, users.len(), &mut rng)?;
            let inst = cfg.instance(users, &fmin)?;
            let base = ctx.row("", None, cfg.framework.tag(), rep);
            if cmd == Command::Psucc {
                let links = network::link_states(&inst, &ris)?;
                return inst
                    .users
                    .iter()
                    .zip(&links)
                    .enumerate()
                    .map(|(i, (u, l))| {
                        let mut row = ResultRow {
                            user: Some(i),
                            user_x: Some(u.x),
                            user_y: Some(u.y),
                            user_h: Some(u.h),
                            ris_x: Some(ris.x),
                            ris_y: Some(ris.y),
                            ris_h: Some(ris.h),
                            d_e2e: Some(l.d_e2e),
                            p_succ: Some(l.p_succ),
                            feasible: true,
                            ..base.clone()
                        };
                        if cfg.experiments.psucc_mc_samples > 0 {
                            let budget = link::budget_from_distances(&inst.env, l.d_sr, l.d_ri, inst.rytov_loss)?;
                            let (p, se) = link::prob_success_mc(&budget, cfg.experiments.psucc_mc_samples, rng.next_u64())?;
                            row.p_succ_mc = Some(p);
                            row.p_succ_se = Some(se);
                        }
                        Ok(row)
                    })
                    .collect();
            }
            if cand.rates.len() != inst.n_users() {
                return Err(Error::Config(format!(
                    "candidate has {} rates for {} users",
                    cand.rates.len(),
                    inst.n_users()
                )));
            }
            let sol = network::evaluate(&inst, ris, &cand.rates)?;
            Ok(ctx.solution_rows(&base, &inst, &sol, cfg.framework))
        })
        .collect::<Result<_>>()?;
    Ok(ExperimentOutput::new(rows.into_iter().flatten().collect()))
}
