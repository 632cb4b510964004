//! Loss factors of the QBS → RIS → user optical channel.
//!
//! The composite gain is `h = ς · η · h_p · h_a · h_g` with a deterministic
//! atmospheric loss `h_p`, Gamma-Gamma turbulence fading `h_a` (unit mean)
//! and a power-law pointing-error factor `h_g` supported on `[0, A0]`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{self, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weather {
    #[default]
    Sunny,
    Rainy,
}

impl Weather {
    /// Attenuation in dB/km.
    pub fn attenuation_db_per_km(self) -> f64 {
        match self {
            Weather::Sunny => 0.43,
            Weather::Rainy => 6.27,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TurbulenceStrength {
    #[default]
    Moderate,
    Strong,
}

impl TurbulenceStrength {
    /// Refractive-index structure constant in m^(-2/3).
    pub fn cn2(self) -> f64 {
        match self {
            TurbulenceStrength::Moderate => 5e-14,
            TurbulenceStrength::Strong => 1e-13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointingJitter {
    #[default]
    #[serde(alias = "low-pointing")]
    Low,
    #[serde(alias = "high-pointing")]
    High,
}

impl PointingJitter {
    /// `(sigma_theta, sigma_phi)` in radians.
    pub fn sigmas(self) -> (f64, f64) {
        match self {
            PointingJitter::Low => (1e-3, 0.25e-3),
            PointingJitter::High => (3e-3, 1e-3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentParams {
    /// Wavelength in meters.
    pub wavelength: f64,
    pub attenuation_db_per_km: f64,
    /// C_n^2 in m^(-2/3).
    pub cn2: f64,
    /// Receiver aperture radius in meters.
    pub aperture_radius: f64,
    /// Beam divergence in radians.
    pub beam_divergence: f64,
    pub sigma_theta: f64,
    pub sigma_phi: f64,
    pub ris_efficiency: f64,
    pub responsivity: f64,
    pub gain_threshold: f64,
}

impl Default for EnvironmentParams {
    /// Sunny weather, moderate turbulence, low pointing error.
    fn default() -> Self {
        Self::from_presets(Weather::Sunny, TurbulenceStrength::Moderate, PointingJitter::Low)
    }
}

impl EnvironmentParams {
    pub fn from_presets(weather: Weather, turbulence: TurbulenceStrength, pointing: PointingJitter) -> Self {
        let (sigma_theta, sigma_phi) = pointing.sigmas();
        Self {
            wavelength: 1550e-9,
            attenuation_db_per_km: weather.attenuation_db_per_km(),
            cn2: turbulence.cn2(),
            aperture_radius: 0.55,
            beam_divergence: 8e-3,
            sigma_theta,
            sigma_phi,
            ris_efficiency: 0.97,
            responsivity: 0.95,
            gain_threshold: 0.05,
        }
    }

    /// Optical wave number `2π/λ`.
    pub fn wave_number(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Gain threshold referred to the fading product, `ζ_th / (ς η)`.
    pub fn chi_threshold(&self) -> f64 {
        self.gain_threshold / (self.ris_efficiency * self.responsivity)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength),
            ("attenuation_db_per_km", self.attenuation_db_per_km),
            ("cn2", self.cn2),
            ("aperture_radius", self.aperture_radius),
            ("beam_divergence", self.beam_divergence),
            ("sigma_theta", self.sigma_theta),
            ("sigma_phi", self.sigma_phi),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("ris_efficiency", self.ris_efficiency), ("responsivity", self.responsivity)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1], got {v}")));
            }
        }
        if !(self.gain_threshold > 0.0 && self.gain_threshold < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gain_threshold must lie in (0, 1), got {}",
                self.gain_threshold
            )));
        }
        Ok(())
    }
}

/// `10^(-κ d / 10)` with `d` converted to km to match the dB/km coefficient.
pub fn atmospheric_loss(env: &EnvironmentParams, d_e2e: f64) -> f64 {
    10f64.powf(-env.attenuation_db_per_km * (d_e2e / 1000.0) / 10.0)
}

/// Rytov variance `1.23 C_n² k^{7/6} d^{11/6}`.
pub fn rytov_variance(env: &EnvironmentParams, d: f64) -> f64 {
    1.23 * env.cn2 * env.wave_number().powf(7.0 / 6.0) * d.powf(11.0 / 6.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbulenceParams {
    pub alpha: f64,
    pub beta: f64,
    pub rytov_var: f64,
}

/// Large- and small-scale shape parameters of the Gamma-Gamma model.
/// `σ_R^{12/5}` is taken as `(σ_R²)^{6/5}`.
pub fn turbulence_params(rytov_var: f64) -> Result<TurbulenceParams> {
    if !(rytov_var > 0.0 && rytov_var.is_finite()) {
        return Err(Error::InvalidArgument(format!("Rytov variance must be positive, got {rytov_var}")));
    }
    let s = rytov_var.powf(6.0 / 5.0);
    let large = 0.49 * rytov_var / (1.0 + 1.11 * s).powf(7.0 / 6.0);
    let small = 0.51 * rytov_var / (1.0 + 0.69 * s).powf(5.0 / 6.0);
    Ok(TurbulenceParams {
        alpha: 1.0 / large.exp_m1(),
        beta: 1.0 / small.exp_m1(),
        rytov_var,
    })
}

impl TurbulenceParams {
    fn ln_norm(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        std::f64::consts::LN_2 + 0.5 * (a + b) * (a * b).ln() - libm::lgamma(a) - libm::lgamma(b)
    }
}

/// Gamma-Gamma density of the turbulence gain.
pub fn gamma_gamma_pdf(ha: f64, t: &TurbulenceParams) -> Result<f64> {
    if !(ha > 0.0) {
        return Err(Error::InvalidArgument(format!("turbulence gain must be positive, got {ha}")));
    }
    Ok(gamma_gamma_pdf_unchecked(ha, t))
}

pub(crate) fn gamma_gamma_pdf_unchecked(ha: f64, t: &TurbulenceParams) -> f64 {
    GammaGammaDensity::new(t).eval(ha)
}

/// Gamma-Gamma density with its normalisation precomputed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GammaGammaDensity {
    nu: f64,
    ab: f64,
    exponent: f64,
    ln_norm: f64,
}

impl GammaGammaDensity {
    pub(crate) fn new(t: &TurbulenceParams) -> Self {
        Self {
            nu: t.alpha - t.beta,
            ab: t.alpha * t.beta,
            exponent: 0.5 * (t.alpha + t.beta) - 1.0,
            ln_norm: t.ln_norm(),
        }
    }

    pub(crate) fn eval(&self, ha: f64) -> f64 {
        if !(ha > 0.0) || !ha.is_finite() {
            return 0.0;
        }
        let ln_k = match specfun::ln_bessel_k(self.nu, 2.0 * (self.ab * ha).sqrt()) {
            Ok(v) => v,
            Err(_) => return 0.0,
        };
        let v = (self.ln_norm + self.exponent * ha.ln() + ln_k).exp();
        if v.is_finite() {
            v
        } else {
            0.0
        }
    }
}

/// `P(h_a ≤ h)` by quadrature of the density.
pub fn gamma_gamma_cdf(h: f64, t: &TurbulenceParams, cfg: &QuadratureConfig) -> Result<f64> {
    if h <= 0.0 {
        return Ok(0.0);
    }
    let v = specfun::integrate(|x| gamma_gamma_pdf_unchecked(x, t), 0.0, h, cfg)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Upper bound on `P(h_a > h)`: the product exceeds `h` only if one unit-mean
/// Gamma factor exceeds `√h`.
pub fn gamma_gamma_tail_bound(h: f64, t: &TurbulenceParams) -> f64 {
    if h <= 0.0 {
        return 1.0;
    }
    let r = h.sqrt();
    let qa = specfun::gamma_q(t.alpha, t.alpha * r).unwrap_or(1.0);
    let qb = specfun::gamma_q(t.beta, t.beta * r).unwrap_or(1.0);
    (qa + qb).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingParams {
    pub a0: f64,
    /// Beam width at the receiver.
    pub wz: f64,
    pub wz_eq_sq: f64,
    pub v: f64,
    /// Exponent of the power-law pointing-loss density.
    pub vartheta: f64,
}

pub fn pointing_params(env: &EnvironmentParams, d_sr: f64, d_ri: f64) -> Result<PointingParams> {
    if !(d_sr > 0.0 && d_ri > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pointing distances must be positive (d_sr={d_sr}, d_ri={d_ri})"
        )));
    }
    let d_e2e = d_sr + d_ri;
    let wz = env.beam_divergence * d_e2e;
    let v = PI.sqrt() * env.aperture_radius / (std::f64::consts::SQRT_2 * wz);
    let erf_v = specfun::erf_fn(v);
    let a0 = erf_v * erf_v;
    let wz_eq_sq = wz * wz * PI.sqrt() * erf_v / (2.0 * v * (-v * v).exp());
    let jitter = 4.0 * d_e2e * d_e2e * env.sigma_theta.powi(2) + 16.0 * d_ri * d_ri * env.sigma_phi.powi(2);
    Ok(PointingParams {
        a0,
        wz,
        wz_eq_sq,
        v,
        vartheta: wz_eq_sq / jitter,
    })
}

pub fn pointing_pdf(hg: f64, p: &PointingParams) -> Result<f64> {
    if !(0.0..=p.a0).contains(&hg) {
        return Err(Error::InvalidArgument(format!(
            "pointing gain {hg} outside [0, {}]",
            p.a0
        )));
    }
    Ok(p.vartheta / p.a0.powf(p.vartheta) * hg.powf(p.vartheta - 1.0))
}

/// `(h/A0)^ϑ`, clamped to `[0, 1]` outside the support.
pub fn pointing_cdf(hg: f64, p: &PointingParams) -> f64 {
    if hg <= 0.0 {
        0.0
    } else if hg >= p.a0 {
        1.0
    } else {
        (hg / p.a0).powf(p.vartheta)
    }
}

/// Seeded draws of the fading factors.
pub struct ChannelSampler {
    large: Gamma<f64>,
    small: Gamma<f64>,
    a0: f64,
    inv_vartheta: f64,
    rng: ChaCha8Rng,
}

impl ChannelSampler {
    pub fn new(turb: &TurbulenceParams, pt: &PointingParams, seed: u64) -> Result<Self> {
        let gamma = |shape: f64| {
            Gamma::new(shape, 1.0 / shape)
                .map_err(|e| Error::InvalidArgument(format!("gamma shape {shape}: {e}")))
        };
        Ok(Self {
            large: gamma(turb.alpha)?,
            small: gamma(turb.beta)?,
            a0: pt.a0,
            inv_vartheta: 1.0 / pt.vartheta,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Turbulence gain as a product of unit-mean Gamma variates.
    pub fn turbulence(&mut self) -> f64 {
        self.large.sample(&mut self.rng) * self.small.sample(&mut self.rng)
    }

    /// Pointing gain by inverse CDF, `A0 · U^{1/ϑ}`.
    pub fn pointing(&mut self) -> f64 {
        let u: f64 = self.rng.random();
        self.a0 * u.powf(self.inv_vartheta)
    }

    /// `h_a · h_g`.
    pub fn fading(&mut self) -> f64 {
        self.turbulence() * self.pointing()
    }
}

/// One draw of the composite gain `ς η h_p h_a h_g`.
pub fn sample_channel_gain(
    env: &EnvironmentParams,
    turb: &TurbulenceParams,
    pt: &PointingParams,
    hp: f64,
    seed: u64,
) -> Result<f64> {
    let mut sampler = ChannelSampler::new(turb, pt, seed)?;
    Ok(env.ris_efficiency * env.responsivity * hp * sampler.fading())
}
