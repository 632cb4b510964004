//! Network-level evaluation of a candidate RIS placement and rate vector:
//! delivered rates, fidelities, fairness and the constraint flags of the
//! joint placement/rate problem.

use serde::{Deserialize, Serialize};

use crate::channel::{self, EnvironmentParams};
use crate::entanglement::{self, MemoryParams, ALPHA_MAX, ALPHA_MIN, RATE_MAX, RATE_MIN};
use crate::error::{Error, Result};
use crate::geometry::{DeploymentRegion, NetworkLayout, Point3D, SEPARATION_MIN};
use crate::link::{self, RytovDistance};
use crate::specfun::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserDemand {
    pub weight: f64,
    /// Minimum delivered rate (pairs/s).
    pub min_rate: f64,
    pub min_fidelity: f64,
}

impl Default for UserDemand {
    fn default() -> Self {
        Self {
            weight: 1.0,
            min_rate: 1.0,
            min_fidelity: 0.5,
        }
    }
}

impl UserDemand {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0) || !(self.min_rate >= 0.0) || !(0.0..1.0).contains(&self.min_fidelity) {
            return Err(Error::InvalidArgument(format!("invalid user demand {self:?}")));
        }
        Ok(())
    }
}

/// Optimisation frameworks. All share the capacity, rate-domain and
/// placement constraints; they differ in which QoS constraints are enforced
/// and in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Framework {
    /// Every constraint, weighted sum rate.
    #[default]
    Proposed,
    /// No fairness constraint.
    RateMax,
    /// No fairness or minimum-rate constraint; weighted sum of log rates.
    LogRateMax,
    /// Fidelity-agnostic: no fidelity constraint.
    Fa,
    /// Fidelity- and fairness-agnostic.
    Ffa,
}

impl Framework {
    pub const ALL: [Framework; 5] = [
        Framework::Proposed,
        Framework::RateMax,
        Framework::LogRateMax,
        Framework::Fa,
        Framework::Ffa,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Framework::Proposed => "proposed",
            Framework::RateMax => "rate-max",
            Framework::LogRateMax => "log-rate-max",
            Framework::Fa => "fa",
            Framework::Ffa => "ffa",
        }
    }

    pub fn enforces_min_rate(self) -> bool {
        self != Framework::LogRateMax
    }

    pub fn enforces_fairness(self) -> bool {
        matches!(self, Framework::Proposed | Framework::Fa)
    }

    pub fn enforces_fidelity(self) -> bool {
        matches!(self, Framework::Proposed | Framework::RateMax | Framework::LogRateMax)
    }

    /// Value this framework maximises for an evaluated solution.
    pub fn objective(self, instance: &ProblemInstance, sol: &AllocationSolution) -> f64 {
        match self {
            Framework::LogRateMax => instance
                .demands
                .iter()
                .zip(&sol.per_user_r_e2e)
                .map(|(d, r)| d.weight * r.ln())
                .sum(),
            _ => sol.objective,
        }
    }
}

impl std::str::FromStr for Framework {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Framework::ALL
            .into_iter()
            .find(|f| f.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown framework '{s}'")))
    }
}

impl std::fmt::Display for Framework {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub qbs: Point3D,
    pub users: Vec<Point3D>,
    pub region: DeploymentRegion,
    pub env: EnvironmentParams,
    pub mem: MemoryParams,
    pub demands: Vec<UserDemand>,
    pub fairness_threshold: f64,
    /// Leg length used for the turbulence shape parameters.
    pub rytov_loss: RytovDistance,
    /// Leg length used for the phase-flip probability.
    pub rytov_phase: RytovDistance,
    pub quadrature: QuadratureConfig,
}

impl ProblemInstance {
    /// Instance with the default environment, memory and region, and the
    /// given users and demands.
    pub fn new(qbs: Point3D, users: Vec<Point3D>, demands: Vec<UserDemand>) -> Result<Self> {
        let inst = Self {
            qbs,
            users,
            region: DeploymentRegion::default(),
            env: EnvironmentParams::default(),
            mem: MemoryParams::default(),
            demands,
            fairness_threshold: 0.95,
            rytov_loss: RytovDistance::E2e,
            rytov_phase: RytovDistance::RisUser,
            quadrature: QuadratureConfig::default(),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::InvalidArgument("at least one user is required".into()));
        }
        if self.demands.len() != self.users.len() {
            return Err(Error::DimensionMismatch {
                expected: self.users.len(),
                got: self.demands.len(),
            });
        }
        if !(0.0..=1.0).contains(&self.fairness_threshold) {
            return Err(Error::InvalidArgument(format!(
                "fairness threshold {} outside [0, 1]",
                self.fairness_threshold
            )));
        }
        self.demands.iter().try_for_each(UserDemand::validate)?;
        self.region.validate()?;
        self.env.validate()?;
        self.mem.validate()?;
        self.quadrature.validate()
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.demands.iter().map(|d| d.weight).collect()
    }

    pub fn layout(&self, ris: Point3D) -> Result<NetworkLayout> {
        NetworkLayout::new(self.qbs, self.users.clone(), ris)
    }
}

/// Rate-independent per-user quantities for one RIS position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub d_sr: f64,
    pub d_ri: f64,
    pub d_e2e: f64,
    pub p_succ: f64,
    pub p_phase: f64,
    pub storage_time: f64,
}

pub fn link_states(instance: &ProblemInstance, ris: &Point3D) -> Result<Vec<LinkState>> {
    let env = &instance.env;
    let d_sr = instance.qbs.distance(ris);
    instance
        .users
        .iter()
        .map(|u| {
            let d_ri = ris.distance(u);
            let d_e2e = d_sr + d_ri;
            let budget = link::budget_from_distances(env, d_sr, d_ri, instance.rytov_loss)?;
            let p_succ = link::prob_success(&budget, &instance.quadrature)?;
            let phase_var = channel::rytov_variance(env, instance.rytov_phase.pick(d_e2e, d_ri));
            Ok(LinkState {
                d_sr,
                d_ri,
                d_e2e,
                p_succ,
                p_phase: entanglement::phase_damp_prob(phase_var),
                storage_time: entanglement::storage_time_for_distance(d_e2e, &instance.mem),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConstraintFlags {
    /// Total initial rate within memory capacity.
    pub capacity: bool,
    /// Every initial rate inside the source's rate-fidelity range.
    pub rate_domain: bool,
    pub min_rate: bool,
    pub fairness: bool,
    pub fidelity: bool,
    pub region: bool,
    pub separation: bool,
}

impl ConstraintFlags {
    pub fn all(&self) -> bool {
        self.satisfied_for(Framework::Proposed)
    }

    pub fn satisfied_for(&self, framework: Framework) -> bool {
        self.capacity
            && self.rate_domain
            && self.region
            && self.separation
            && (self.min_rate || !framework.enforces_min_rate())
            && (self.fairness || !framework.enforces_fairness())
            && (self.fidelity || !framework.enforces_fidelity())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution {
    pub ris: Point3D,
    pub r_in: Vec<f64>,
    pub per_user_p_succ: Vec<f64>,
    pub per_user_r_e2e: Vec<f64>,
    pub per_user_fidelity: Vec<f64>,
    /// Zero when every delivered rate is zero.
    pub wfi: f64,
    /// Weighted sum of delivered rates.
    pub objective: f64,
    pub flags: ConstraintFlags,
    /// Flags satisfied for every framework constraint, i.e. `flags.all()`.
    pub feasible: bool,
}

impl AllocationSolution {
    pub fn sum_rate(&self) -> f64 {
        self.per_user_r_e2e.iter().sum()
    }

    pub fn feasible_for(&self, framework: Framework) -> bool {
        self.flags.satisfied_for(framework)
    }
}

/// Jain's fairness index.
pub fn jfi(rates: &[f64]) -> Result<f64> {
    let n = rates.len() as f64;
    wfi(rates, &vec![1.0 / n; rates.len()])
}

/// Weighted fairness index `(Σ r)² / Σ (r² / w)` with the weights
/// normalised to sum to one.
pub fn wfi(rates: &[f64], weights: &[f64]) -> Result<f64> {
    if rates.len() != weights.len() {
        return Err(Error::DimensionMismatch {
            expected: rates.len(),
            got: weights.len(),
        });
    }
    if rates.is_empty() || rates.iter().any(|r| !(*r >= 0.0)) || weights.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidArgument("rates must be nonnegative and weights positive".into()));
    }
    let sum: f64 = rates.iter().sum();
    if sum == 0.0 {
        return Err(Error::InvalidArgument("fairness index undefined for all-zero rates".into()));
    }
    let total: f64 = weights.iter().sum();
    let denom: f64 = rates.iter().zip(weights).map(|(r, w)| r * r * total / w).sum();
    Ok((sum * sum / denom).min(1.0))
}

/// Evaluate a candidate, computing the per-user channel quantities.
pub fn evaluate(instance: &ProblemInstance, ris: Point3D, r_in: &[f64]) -> Result<AllocationSolution> {
    let links = link_states(instance, &ris)?;
    evaluate_with_links(instance, ris, &links, r_in)
}

/// Evaluate a candidate against channel quantities already computed for
/// `ris` by [`link_states`].
pub fn evaluate_with_links(
    instance: &ProblemInstance,
    ris: Point3D,
    links: &[LinkState],
    r_in: &[f64],
) -> Result<AllocationSolution> {
    let n = instance.n_users();
    for len in [links.len(), r_in.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, got: len });
        }
    }
    let rate_domain = r_in.iter().all(|r| (RATE_MIN..=RATE_MAX).contains(r));
    let mut p_succ = Vec::with_capacity(n);
    let mut r_e2e = Vec::with_capacity(n);
    let mut fidelity = Vec::with_capacity(n);
    for (l, &r) in links.iter().zip(r_in) {
        let alpha = (r / (2.0 * entanglement::ATTEMPT_RATE)).clamp(ALPHA_MIN, ALPHA_MAX);
        let initial = entanglement::werner_from_alpha(alpha)?;
        let state = entanglement::e2e_state(&initial, l.storage_time, &instance.mem, l.p_phase);
        p_succ.push(l.p_succ);
        r_e2e.push(link::e2e_rate(l.p_succ, r.max(0.0)));
        fidelity.push(state.fidelity());
    }
    let weights = instance.weights();
    let wfi_value = wfi(&r_e2e, &weights).unwrap_or(0.0);
    let objective = weights.iter().zip(&r_e2e).map(|(w, r)| w * r).sum();
    let mut sol = AllocationSolution {
        ris,
        r_in: r_in.to_vec(),
        per_user_p_succ: p_succ,
        per_user_r_e2e: r_e2e,
        per_user_fidelity: fidelity,
        wfi: wfi_value,
        objective,
        flags: ConstraintFlags::default(),
        feasible: false,
    };
    sol.flags = check_feasibility(instance, &sol);
    sol.flags.rate_domain = rate_domain;
    sol.feasible = sol.flags.all();
    Ok(sol)
}

/// Evaluate every constraint for an evaluated solution.
pub fn check_feasibility(instance: &ProblemInstance, sol: &AllocationSolution) -> ConstraintFlags {
    let total: f64 = sol.r_in.iter().sum();
    let any_rate = sol.per_user_r_e2e.iter().any(|r| *r > 0.0);
    ConstraintFlags {
        capacity: total <= instance.mem.capacity,
        rate_domain: sol.r_in.iter().all(|r| (RATE_MIN..=RATE_MAX).contains(r)),
        min_rate: sol
            .per_user_r_e2e
            .iter()
            .zip(&instance.demands)
            .all(|(r, d)| *r >= d.min_rate),
        fairness: any_rate && sol.wfi >= instance.fairness_threshold,
        fidelity: sol
            .per_user_fidelity
            .iter()
            .zip(&instance.demands)
            .all(|(f, d)| *f >= d.min_fidelity),
        region: instance.region.contains(&sol.ris),
        separation: instance.users.iter().all(|u| u.distance(&sol.ris) >= SEPARATION_MIN),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{PointingJitter, TurbulenceStrength, Weather};
    use crate::link::prob_success_mc;

    fn scenario1(weights: [f64; 3]) -> ProblemInstance {
        let users = [350.0, 400.0, 450.0].map(|x| Point3D::new(x, 0.0, 10.0)).to_vec();
        let demands = weights
            .iter()
            .map(|&w| UserDemand {
                weight: w,
                ..Default::default()
            })
            .collect();
        ProblemInstance::new(Point3D::new(0.0, 0.0, 90.0), users, demands).unwrap()
    }

    #[test]
    fn jfi_values() {
        assert!((jfi(&[3.0, 3.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((jfi(&[0.0, 5.0, 0.0, 0.0]).unwrap() - 0.25).abs() < 1e-15);
        assert!((jfi(&[2.0, 1.0, 1.0]).unwrap() - 16.0 / 18.0).abs() < 1e-15);
        assert!(jfi(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn wfi_values() {
        let third = [1.0 / 3.0; 3];
        assert!((wfi(&[4.0, 4.0, 4.0], &third).unwrap() - 1.0).abs() < 1e-15);
        let w = [0.1, 0.3, 0.6];
        assert!((wfi(&[1.0, 3.0, 6.0], &w).unwrap() - 1.0).abs() < 1e-12);
        assert!((wfi(&[1.0, 1.0, 1.0], &w).unwrap() - 0.6).abs() < 1e-12);
        assert!(matches!(wfi(&[1.0, 2.0], &w), Err(Error::DimensionMismatch { .. })));
        assert!(wfi(&[0.0; 3], &w).is_err());
        let r = [2.5, 0.7, 9.1, 3.3];
        assert_eq!(wfi(&r, &[0.25; 4]).unwrap(), jfi(&r).unwrap());
        // only relative weights matter
        assert!((wfi(&r, &[1.0; 4]).unwrap() - jfi(&r).unwrap()).abs() < 1e-15);
        assert!((wfi(&[1.0, 1.0, 1.0], &[1.0, 3.0, 6.0]).unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn framework_constraint_sets() {
        let mut f = ConstraintFlags {
            capacity: true,
            rate_domain: true,
            min_rate: true,
            fairness: false,
            fidelity: false,
            region: true,
            separation: true,
        };
        assert!(!f.satisfied_for(Framework::Proposed));
        assert!(!f.satisfied_for(Framework::Fa));
        assert!(!f.satisfied_for(Framework::RateMax));
        assert!(f.satisfied_for(Framework::Ffa));
        f.fidelity = true;
        f.min_rate = false;
        assert!(f.satisfied_for(Framework::LogRateMax));
        assert!(!f.satisfied_for(Framework::RateMax));
        for fw in Framework::ALL {
            assert_eq!(fw.tag().parse::<Framework>().unwrap(), fw);
        }
    }

    #[test]
    fn evaluate_composes_modules() {
        let inst = scenario1([1.0 / 3.0; 3]);
        let ris = Point3D::new(300.0, 0.0, 35.0);
        let r_in = [2e5, 4e5, 8e5];
        let sol = evaluate(&inst, ris, &r_in).unwrap();
        let layout = inst.layout(ris).unwrap();
        for i in 0..3 {
            let b = link::build_link_budget(&inst.env, &layout, i).unwrap();
            let p = link::prob_success(&b, &inst.quadrature).unwrap();
            assert_eq!(sol.per_user_p_succ[i], p);
            assert_eq!(sol.per_user_r_e2e[i], p * r_in[i]);
            let init = entanglement::werner_from_alpha(entanglement::alpha_from_rate(r_in[i]).unwrap()).unwrap();
            let t = entanglement::storage_time(&layout, i, &inst.mem).unwrap();
            let var = channel::rytov_variance(&inst.env, layout.d_ri(i).unwrap());
            let fid = entanglement::e2e_state(&init, t, &inst.mem, entanglement::phase_damp_prob(var)).fidelity();
            assert!((sol.per_user_fidelity[i] - fid).abs() < 1e-15);
        }
        let dot: f64 = inst.weights().iter().zip(&sol.per_user_r_e2e).map(|(w, r)| w * r).sum();
        assert_eq!(sol.objective, dot);
        assert!(sol.flags.capacity && sol.flags.region && sol.flags.separation && sol.flags.rate_domain);
    }

    #[test]
    fn wfi_scale_invariant() {
        let inst = scenario1([0.1, 0.3, 0.6]);
        let ris = Point3D::new(250.0, 20.0, 50.0);
        let a = evaluate(&inst, ris, &[1e4, 5e4, 2e5]).unwrap();
        let b = evaluate(&inst, ris, &[3e4, 1.5e5, 6e5]).unwrap();
        assert!((a.wfi - b.wfi).abs() < 1e-12);
        assert!(a.per_user_fidelity[0] > b.per_user_fidelity[0]);
    }

    #[test]
    fn single_user_is_perfectly_fair() {
        let inst = ProblemInstance::new(
            Point3D::new(0.0, 0.0, 90.0),
            vec![Point3D::new(300.0, 100.0, 10.0)],
            vec![UserDemand::default()],
        )
        .unwrap();
        for r in [1e3, 5e4, 1e6] {
            let sol = evaluate(&inst, Point3D::new(150.0, 50.0, 60.0), &[r]).unwrap();
            assert_eq!(sol.wfi, 1.0);
        }
    }

    #[test]
    fn two_user_rates_match_mc_oracle() {
        let inst = ProblemInstance::new(
            Point3D::new(0.0, 0.0, 90.0),
            vec![Point3D::new(250.0, 0.0, 10.0), Point3D::new(300.0, 150.0, 10.0)],
            vec![UserDemand::default(); 2],
        )
        .unwrap();
        let ris = Point3D::new(150.0, 50.0, 50.0);
        let r_in = [3e5, 7e5];
        let sol = evaluate(&inst, ris, &r_in).unwrap();
        let layout = inst.layout(ris).unwrap();
        for i in 0..2 {
            let b = link::build_link_budget(&inst.env, &layout, i).unwrap();
            let (p, se) = prob_success_mc(&b, 400_000, 11 + i as u64).unwrap();
            let tol = 3.0 * se.max(1e-6) * r_in[i];
            assert!((sol.per_user_r_e2e[i] - p * r_in[i]).abs() <= tol);
        }
    }

    #[test]
    fn out_of_domain_rate_flags_infeasible() {
        let inst = scenario1([1.0 / 3.0; 3]);
        let sol = evaluate(&inst, Point3D::new(300.0, 0.0, 35.0), &[500.0, 1e5, 1e5]).unwrap();
        assert!(!sol.flags.rate_domain && !sol.feasible);
        for fw in Framework::ALL {
            assert!(!sol.feasible_for(fw));
        }
    }

    #[test]
    fn boundary_and_trivial_constraints() {
        let mut inst = scenario1([1.0 / 3.0; 3]);
        inst.mem.capacity = 3e5;
        let ris = Point3D::new(300.0, 0.0, 35.0);
        let sol = evaluate(&inst, ris, &[1e5, 1e5, 1e5]).unwrap();
        assert!(sol.flags.capacity);
        let over = evaluate(&inst, ris, &[1e5, 1e5, 1.0001e5]).unwrap();
        assert!(!over.flags.capacity);
        inst.fairness_threshold = 0.0;
        let skewed = evaluate(&inst, ris, &[1e6, 1e3, 1e3]).unwrap();
        assert!(skewed.flags.fairness);
        let outside = evaluate(&inst, Point3D::new(300.0, 0.0, 20.0), &[1e5; 3]).unwrap();
        assert!(!outside.flags.region);
        let close = evaluate(&inst, Point3D::new(355.0, 0.0, 35.0), &[1e5; 3]).unwrap();
        assert!(close.flags.separation);
        let too_close = evaluate(&inst, Point3D::new(350.0, 0.0, 28.0), &[1e5; 3]);
        assert!(!too_close.unwrap().flags.separation);
    }

    #[test]
    fn fidelity_fails_far_user_strong_turbulence() {
        let mut inst = ProblemInstance::new(
            Point3D::new(0.0, 0.0, 90.0),
            vec![Point3D::new(450.0, 0.0, 10.0)],
            vec![UserDemand {
                min_fidelity: 0.7,
                ..Default::default()
            }],
        )
        .unwrap();
        inst.env = EnvironmentParams::from_presets(Weather::Sunny, TurbulenceStrength::Strong, PointingJitter::Low);
        // RIS next to the QBS: the whole path is the reflected leg.
        let sol = evaluate(&inst, Point3D::new(50.0, 0.0, 90.0), &[1e3]).unwrap();
        assert!(!sol.flags.fidelity, "fidelity {}", sol.per_user_fidelity[0]);
    }

    #[test]
    fn evaluate_is_pure() {
        let inst = scenario1([0.2, 0.3, 0.5]);
        let ris = Point3D::new(222.0, 33.0, 44.0);
        let a = evaluate(&inst, ris, &[1e4, 2e4, 3e4]).unwrap();
        let b = evaluate(&inst, ris, &[1e4, 2e4, 3e4]).unwrap();
        assert_eq!(a, b);
    }
}
