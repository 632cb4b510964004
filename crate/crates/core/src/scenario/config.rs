use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{EnvironmentParams, PointingJitter, TurbulenceStrength, Weather};
use crate::entanglement::MemoryParams;
use crate::error::{Error, Result};
use crate::geometry::{DeploymentRegion, Point3D};
use crate::link::RytovDistance;
use crate::network::{Framework, ProblemInstance, UserDemand};
use crate::optimizer::SAConfig;
use crate::specfun::QuadratureConfig;

/// Desk-scale repetition count.
pub const DEFAULT_REPS: usize = 50;

/// One scenario file. Every section and key is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Required whenever users or demands are sampled.
    pub seed: Option<u64>,
    /// Repetitions; experiments default to `DEFAULT_REPS`, single
    /// commands to one.
    pub reps: Option<usize>,
    pub framework: Framework,
    pub fairness_threshold: f64,
    /// Fill the wall-time column. Off by default so output is byte-stable.
    pub record_timing: bool,
    pub output: Option<PathBuf>,
    pub environment: EnvironmentConfig,
    pub memory: MemoryParams,
    pub users: UserConfig,
    pub demands: DemandConfig,
    pub region: DeploymentRegion,
    pub optimizer: SAConfig,
    pub channel: ChannelModelConfig,
    pub candidate: Option<CandidateConfig>,
    pub experiments: ExperimentSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: None,
            reps: None,
            framework: Framework::Proposed,
            fairness_threshold: 0.95,
            record_timing: false,
            output: None,
            environment: EnvironmentConfig::default(),
            memory: MemoryParams::default(),
            users: UserConfig::default(),
            demands: DemandConfig::default(),
            region: DeploymentRegion::default(),
            optimizer: SAConfig::default(),
            channel: ChannelModelConfig::default(),
            candidate: None,
            experiments: ExperimentSettings::default(),
        }
    }
}

/// Preset names plus optional explicit overrides of individual parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub weather: Weather,
    pub turbulence: TurbulenceStrength,
    pub pointing: PointingJitter,
    pub wavelength: Option<f64>,
    pub attenuation_db_per_km: Option<f64>,
    pub cn2: Option<f64>,
    pub aperture_radius: Option<f64>,
    pub beam_divergence: Option<f64>,
    pub sigma_theta: Option<f64>,
    pub sigma_phi: Option<f64>,
    pub ris_efficiency: Option<f64>,
    pub responsivity: Option<f64>,
    pub gain_threshold: Option<f64>,
}

impl EnvironmentConfig {
    pub fn resolve(&self) -> Result<EnvironmentParams> {
        let mut env = EnvironmentParams::from_presets(self.weather, self.turbulence, self.pointing);
        let overrides = [
            (&mut env.wavelength, self.wavelength),
            (&mut env.attenuation_db_per_km, self.attenuation_db_per_km),
            (&mut env.cn2, self.cn2),
            (&mut env.aperture_radius, self.aperture_radius),
            (&mut env.beam_divergence, self.beam_divergence),
            (&mut env.sigma_theta, self.sigma_theta),
            (&mut env.sigma_phi, self.sigma_phi),
            (&mut env.ris_efficiency, self.ris_efficiency),
            (&mut env.responsivity, self.responsivity),
            (&mut env.gain_threshold, self.gain_threshold),
        ];
        for (slot, value) in overrides {
            if let Some(v) = value {
                *slot = v;
            }
        }
        env.validate()?;
        Ok(env)
    }
}

/// Normal distribution truncated to `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl TruncatedNormal {
    pub fn validate(&self) -> Result<()> {
        let ok = self.std >= 0.0
            && self.min <= self.max
            && [self.mean, self.std, self.min, self.max].iter().all(|v| v.is_finite())
            && (self.std > 0.0 || (self.min..=self.max).contains(&self.mean));
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid truncated normal {self:?}")))
        }
    }

    /// Analytic mean of the truncated distribution.
    pub fn mean_truncated(&self) -> f64 {
        if self.std == 0.0 {
            return self.mean;
        }
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let cdf = |z: f64| 0.5 * crate::specfun::erfc_fn(-z / std::f64::consts::SQRT_2);
        let a = (self.min - self.mean) / self.std;
        let b = (self.max - self.mean) / self.std;
        self.mean + self.std * (phi(a) - phi(b)) / (cdf(b) - cdf(a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserConfig {
    pub count: usize,
    /// Explicit `[x, y, h]` positions; when set, `count` and the samplers
    /// are ignored.
    pub positions: Option<Vec<[f64; 3]>>,
    pub x: TruncatedNormal,
    pub y: TruncatedNormal,
    pub height: f64,
    pub qbs: [f64; 3],
}

impl Default for UserConfig {
    fn default() -> Self {
        Self {
            count: 3,
            positions: None,
            x: TruncatedNormal {
                mean: 250.0,
                std: 50.0,
                min: 50.0,
                max: 450.0,
            },
            y: TruncatedNormal {
                mean: 200.0,
                std: 50.0,
                min: 0.0,
                max: 400.0,
            },
            height: 10.0,
            qbs: [0.0, 0.0, 90.0],
        }
    }
}

impl UserConfig {
    pub fn qbs_point(&self) -> Point3D {
        Point3D::new(self.qbs[0], self.qbs[1], self.qbs[2])
    }

    pub fn explicit(&self) -> Option<Vec<Point3D>> {
        self.positions
            .as_ref()
            .map(|ps| ps.iter().map(|p| Point3D::new(p[0], p[1], p[2])).collect())
    }

    pub fn validate(&self) -> Result<()> {
        match &self.positions {
            Some(ps) if ps.is_empty() => Err(Error::Config("users.positions is empty".into())),
            Some(_) => Ok(()),
            None if self.count == 0 => Err(Error::Config("users.count must be at least 1".into())),
            None => {
                self.x.validate()?;
                self.y.validate()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    /// Defaults to equal weights `1/N`.
    pub weights: Option<Vec<f64>>,
    pub min_rate: f64,
    /// Per-user fidelity thresholds; sampled uniformly from
    /// `min_fidelity_range` when absent.
    pub min_fidelity: Option<Vec<f64>>,
    pub min_fidelity_range: [f64; 2],
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            weights: None,
            min_rate: 1.0,
            min_fidelity: None,
            min_fidelity_range: [0.5, 0.7],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelModelConfig {
    /// Leg length for the turbulence shape parameters.
    pub rytov_loss: RytovDistance,
    /// Leg length for the phase-flip probability.
    pub rytov_phase: RytovDistance,
    pub quadrature: QuadratureConfig,
}

impl Default for ChannelModelConfig {
    fn default() -> Self {
        Self {
            rytov_loss: RytovDistance::E2e,
            rytov_phase: RytovDistance::RisUser,
            quadrature: QuadratureConfig::default(),
        }
    }
}

/// Fixed RIS position and rates for the single-candidate commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateConfig {
    pub ris: [f64; 3],
    #[serde(default)]
    pub rates: Vec<f64>,
}

impl CandidateConfig {
    pub fn ris_point(&self) -> Point3D {
        Point3D::new(self.ris[0], self.ris[1], self.ris[2])
    }
}

/// Sweep axes of the experiment families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSettings {
    /// E2E distances (m) for the success-probability sweep.
    pub psucc_distances: Vec<f64>,
    /// Monte-Carlo samples per sweep point; 0 disables the check column.
    pub psucc_mc_samples: usize,
    /// QBS-to-user distances (m) of the varied user in the heatmap.
    pub heatmap_distances: Vec<f64>,
    pub heatmap_fidelities: Vec<f64>,
    pub scalability_users: Vec<usize>,
    /// Fidelity threshold applied to every user in the fidelity comparison.
    pub comparison_min_fidelity: f64,
}

impl Default for ExperimentSettings {
    fn default() -> Self {
        Self {
            psucc_distances: (2..=18).map(|k| 50.0 * k as f64).collect(),
            psucc_mc_samples: 0,
            heatmap_distances: vec![400.0, 410.0, 420.0, 430.0, 440.0, 450.0],
            heatmap_fidelities: vec![0.5, 0.55, 0.6, 0.65, 0.7],
            scalability_users: vec![3, 5, 8],
            comparison_min_fidelity: 0.7,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.users.validate()?;
        self.environment.resolve()?;
        self.memory.validate()?;
        self.region.validate()?;
        self.optimizer.validate()?;
        self.channel.quadrature.validate()?;
        if self.reps == Some(0) {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.fairness_threshold) {
            return Err(Error::Config("fairness_threshold must lie in [0, 1]".into()));
        }
        let [lo, hi] = self.demands.min_fidelity_range;
        if !(0.0 <= lo && lo <= hi && hi < 1.0) {
            return Err(Error::Config("min_fidelity_range must satisfy 0 <= lo <= hi < 1".into()));
        }
        if let Some(n) = self.users.positions.as_ref().map(Vec::len) {
            if self.demands.weights.as_ref().is_some_and(|w| w.len() != n) {
                return Err(Error::Config("demands.weights must have one entry per user".into()));
            }
            if self.demands.min_fidelity.as_ref().is_some_and(|f| f.len() != n && f.len() != 1) {
                return Err(Error::Config("demands.min_fidelity must have one entry, or one per user".into()));
            }
        }
        Ok(())
    }

    /// Seed for sampled quantities.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required for sampled scenarios (set `seed` or pass --seed)".into()))
    }

    /// Problem instance over the given users, with per-user fidelity
    /// thresholds supplied by the caller.
    pub fn instance(&self, users: Vec<Point3D>, min_fidelity: &[f64]) -> Result<ProblemInstance> {
        let n = users.len();
        let weights = match &self.demands.weights {
            Some(w) if w.len() == n => w.clone(),
            Some(w) => {
                return Err(Error::Config(format!("{} weights for {n} users", w.len())));
            }
            None => vec![1.0 / n as f64; n],
        };
        let demands = weights
            .iter()
            .zip(min_fidelity)
            .map(|(&weight, &f)| UserDemand {
                weight,
                min_rate: self.demands.min_rate,
                min_fidelity: f,
            })
            .collect();
        let inst = ProblemInstance {
            qbs: self.users.qbs_point(),
            users,
            region: self.region,
            env: self.environment.resolve()?,
            mem: self.memory,
            demands,
            fairness_threshold: self.fairness_threshold,
            rytov_loss: self.channel.rytov_loss,
            rytov_phase: self.channel.rytov_phase,
            quadrature: self.channel.quadrature,
        };
        inst.validate()?;
        Ok(inst)
    }
}
