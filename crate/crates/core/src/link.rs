//! Photon delivery probability over the reflected link and the resulting
//! end-to-end pair rate.
//!
//! `P_succ = P(h_a · h_g > χ_th / h_p)`. Marginalising the power-law pointing
//! factor in closed form leaves a single integral over the Gamma-Gamma
//! density:
//!
//! ```text
//! P_succ = ∫_{c}^{∞} f_a(a) · [1 − (c / a)^ϑ] da,   c = χ_th / (h_p · A0)
//! ```
//!
//! The integral is evaluated in `s = ln a`, where the density is close to
//! Gaussian and needs far fewer panels.

use serde::{Deserialize, Serialize};

use crate::channel::{
    self, gamma_gamma_tail_bound, GammaGammaDensity, ChannelSampler, EnvironmentParams,
    PointingParams, TurbulenceParams,
};
use crate::error::{Error, Result};
use crate::geometry::NetworkLayout;
use crate::specfun::{self, QuadratureConfig};

/// Survival mass below which the Gamma-Gamma tail is dropped.
const TAIL_CUTOFF: f64 = 1e-12;

/// Which leg length enters a Rytov variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RytovDistance {
    /// Full QBS → RIS → user path.
    #[default]
    E2e,
    /// RIS → user leg only.
    RisUser,
}

impl RytovDistance {
    pub fn pick(self, d_e2e: f64, d_ri: f64) -> f64 {
        match self {
            RytovDistance::E2e => d_e2e,
            RytovDistance::RisUser => d_ri,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub hp: f64,
    pub turb: TurbulenceParams,
    pub pt: PointingParams,
    pub chi_th: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !(self.hp > 0.0 && self.hp <= 1.0) {
            return Err(Error::InvalidArgument(format!("h_p must lie in (0, 1], got {}", self.hp)));
        }
        if !(self.chi_th > 0.0) {
            return Err(Error::InvalidArgument(format!("chi_th must be positive, got {}", self.chi_th)));
        }
        Ok(())
    }

    /// Threshold on the turbulence gain alone when pointing loss is at its
    /// best, `χ_th / (h_p A0)`.
    pub fn turbulence_cutoff(&self) -> f64 {
        self.chi_th / (self.hp * self.pt.a0)
    }
}

pub fn build_link_budget(env: &EnvironmentParams, layout: &NetworkLayout, user_index: usize) -> Result<LinkBudget> {
    build_link_budget_with(env, layout, user_index, RytovDistance::E2e)
}

pub fn build_link_budget_with(
    env: &EnvironmentParams,
    layout: &NetworkLayout,
    user_index: usize,
    rytov: RytovDistance,
) -> Result<LinkBudget> {
    let d_sr = layout.d_sr();
    let d_ri = layout.d_ri(user_index)?;
    budget_from_distances(env, d_sr, d_ri, rytov)
}

pub fn budget_from_distances(env: &EnvironmentParams, d_sr: f64, d_ri: f64, rytov: RytovDistance) -> Result<LinkBudget> {
    let d_e2e = d_sr + d_ri;
    let hp = channel::atmospheric_loss(env, d_e2e);
    let turb = channel::turbulence_params(channel::rytov_variance(env, rytov.pick(d_e2e, d_ri)))?;
    let pt = channel::pointing_params(env, d_sr, d_ri)?;
    let budget = LinkBudget {
        hp,
        turb,
        pt,
        chi_th: env.chi_threshold(),
    };
    budget.validate()?;
    Ok(budget)
}

/// Point past which the Gamma-Gamma tail mass is below `TAIL_CUTOFF`,
/// located to within a factor of 1.5.
fn upper_limit(cutoff: f64, turb: &TurbulenceParams) -> f64 {
    let mut hi = cutoff.max(1.0) * 1.5;
    while gamma_gamma_tail_bound(hi, turb) > TAIL_CUTOFF {
        hi *= 1.5;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    hi
}

/// Success probability by quadrature.
pub fn prob_success(budget: &LinkBudget, cfg: &QuadratureConfig) -> Result<f64> {
    budget.validate()?;
    let cutoff = budget.turbulence_cutoff();
    let theta = budget.pt.vartheta;
    let turb = budget.turb;
    let upper = upper_limit(cutoff, &turb);
    if upper <= cutoff {
        return Ok(0.0);
    }
    let density = GammaGammaDensity::new(&turb);
    let ln_c = cutoff.ln();
    let integrand = |s: f64| {
        if s <= ln_c {
            0.0
        } else {
            let a = s.exp();
            density.eval(a) * a * -(theta * (ln_c - s)).exp_m1()
        }
    };
    let p = specfun::integrate(integrand, ln_c, upper.ln(), cfg)?;
    Ok(p.clamp(0.0, 1.0))
}

/// Monte-Carlo estimate of the success probability and its binomial standard
/// error.
pub fn prob_success_mc(budget: &LinkBudget, n_samples: usize, seed: u64) -> Result<(f64, f64)> {
    budget.validate()?;
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let mut sampler = ChannelSampler::new(&budget.turb, &budget.pt, seed)?;
    let threshold = budget.chi_th / budget.hp;
    let hits = (0..n_samples).filter(|_| sampler.fading() > threshold).count();
    let p = hits as f64 / n_samples as f64;
    Ok((p, (p * (1.0 - p) / n_samples as f64).sqrt()))
}

/// Delivered pair rate `P_succ · R_in`.
pub fn e2e_rate(p_succ: f64, r_in: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p_succ) && r_in >= 0.0);
    p_succ * r_in
}
