//! Bell-diagonal pair states, the storage (depolarizing) and in-flight
//! (phase-flip) noise channels, and the delivered end-to-end state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::NetworkLayout;
use crate::specfun;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Attempt rate of the pair source (Hz); `R_in = 2 α_s · ATTEMPT_RATE`.
pub const ATTEMPT_RATE: f64 = 1e6;
pub const ALPHA_MIN: f64 = 0.0005;
pub const ALPHA_MAX: f64 = 0.5;
pub const RATE_MIN: f64 = 2.0 * ALPHA_MIN * ATTEMPT_RATE;
pub const RATE_MAX: f64 = 2.0 * ALPHA_MAX * ATTEMPT_RATE;

const SUM_TOL: f64 = 1e-12;

/// Coefficients of `Σ λ_jk Φ_jk` in the Bell basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellDiagonalState {
    pub l00: f64,
    pub l01: f64,
    pub l10: f64,
    pub l11: f64,
}

impl BellDiagonalState {
    pub fn new(l00: f64, l01: f64, l10: f64, l11: f64) -> Result<Self> {
        let s = Self { l00, l01, l10, l11 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.coefficients();
        if c.iter().any(|v| !(-SUM_TOL..=1.0 + SUM_TOL).contains(v)) {
            return Err(Error::InvalidArgument(format!("Bell coefficients outside [0, 1]: {c:?}")));
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidArgument(format!("Bell coefficients sum to {sum}")));
        }
        Ok(())
    }

    /// Werner form: target weight `l00`, remainder split evenly.
    pub fn werner(l00: f64) -> Result<Self> {
        let rest = (1.0 - l00) / 3.0;
        Self::new(l00, rest, rest, rest)
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.l00, self.l01, self.l10, self.l11]
    }

    pub fn from_coefficients(c: [f64; 4]) -> Self {
        Self {
            l00: c[0],
            l01: c[1],
            l10: c[2],
            l11: c[3],
        }
    }

    /// Overlap with Φ00.
    pub fn fidelity(&self) -> f64 {
        self.l00
    }
}

/// Quantum memory at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MemoryParams {
    /// Maximum total pair rate (pairs/s).
    pub capacity: f64,
    /// Coherence time in seconds.
    pub coherence_time: f64,
    /// Post-delivery processing time in seconds.
    pub processing_time: f64,
}

impl Default for MemoryParams {
    fn default() -> Self {
        Self {
            capacity: 1e7,
            coherence_time: 2.43e-3,
            processing_time: 4e-6,
        }
    }
}

impl MemoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.capacity > 0.0 && self.coherence_time > 0.0 && self.processing_time > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("memory parameters must be positive: {self:?}")))
        }
    }

    /// Surviving coherence `e^{-t/T}` after storing for `t` seconds.
    pub fn coherence_factor(&self, t: f64) -> f64 {
        (-t / self.coherence_time).exp()
    }
}

/// Per-user noise strengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Total depolarizing mix weight `1 − e^{−t/T}`.
    pub q_depol: f64,
    /// Phase-flip probability on the photon.
    pub p_phase: f64,
}

impl NoiseParams {
    pub fn new(q_depol: f64, p_phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q_depol) || !(0.0..=1.0).contains(&p_phase) {
            return Err(Error::InvalidArgument(format!(
                "noise probabilities outside [0, 1]: q={q_depol}, p={p_phase}"
            )));
        }
        Ok(Self { q_depol, p_phase })
    }

    pub fn from_storage(t: f64, mem: &MemoryParams, p_phase: f64) -> Result<Self> {
        Self::new(-(-t / mem.coherence_time).exp_m1(), p_phase)
    }

    /// Depolarize, then phase-flip.
    pub fn apply(&self, s: &BellDiagonalState) -> BellDiagonalState {
        phase_damp(&depolarize(s, self.q_depol), self.p_phase)
    }
}

fn check_alpha(alpha_s: f64) -> Result<()> {
    if (ALPHA_MIN..=ALPHA_MAX).contains(&alpha_s) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha_s = {alpha_s} outside [{ALPHA_MIN}, {ALPHA_MAX}]"
        )))
    }
}

/// Initial pair state of the tunable-α_s source: `λ00 = 1 − α_s`, Werner.
pub fn werner_from_alpha(alpha_s: f64) -> Result<BellDiagonalState> {
    check_alpha(alpha_s)?;
    BellDiagonalState::werner(1.0 - alpha_s)
}

pub fn rate_from_alpha(alpha_s: f64) -> Result<f64> {
    check_alpha(alpha_s)?;
    Ok(2.0 * alpha_s * ATTEMPT_RATE)
}

pub fn alpha_from_rate(r_in: f64) -> Result<f64> {
    if !(RATE_MIN..=RATE_MAX).contains(&r_in) {
        return Err(Error::InvalidArgument(format!(
            "rate {r_in} outside [{RATE_MIN}, {RATE_MAX}]"
        )));
    }
    Ok((r_in / (2.0 * ATTEMPT_RATE)).clamp(ALPHA_MIN, ALPHA_MAX))
}

/// Storage time of the matter qubit: time of flight plus processing.
pub fn storage_time(layout: &NetworkLayout, user_index: usize, mem: &MemoryParams) -> Result<f64> {
    Ok(storage_time_for_distance(layout.e2e_distance(user_index)?, mem))
}

pub fn storage_time_for_distance(d_e2e: f64, mem: &MemoryParams) -> f64 {
    d_e2e / SPEED_OF_LIGHT + mem.processing_time
}

/// Depolarizing noise on the stored qubit: every coefficient relaxes toward
/// 1/4 as `F = 1/4 + (λ − 1/4)(1 − q)`.
pub fn depolarize(s: &BellDiagonalState, q_depol: f64) -> BellDiagonalState {
    let keep = 1.0 - q_depol;
    BellDiagonalState::from_coefficients(s.coefficients().map(|l| 0.25 + (l - 0.25) * keep))
}

/// Phase-flip probability `erf(σ_R²)`.
pub fn phase_damp_prob(rytov_var: f64) -> f64 {
    specfun::erf_fn(rytov_var.max(0.0))
}

/// Phase flip on the flying qubit: a Z on one half maps Φ00↔Φ01 and Φ10↔Φ11.
pub fn phase_damp(s: &BellDiagonalState, p2: f64) -> BellDiagonalState {
    let keep = 1.0 - p2;
    BellDiagonalState {
        l00: keep * s.l00 + p2 * s.l01,
        l01: keep * s.l01 + p2 * s.l00,
        l10: keep * s.l10 + p2 * s.l11,
        l11: keep * s.l11 + p2 * s.l10,
    }
}

/// Delivered state after `t` seconds of storage and a phase flip with
/// probability `p2`.
pub fn e2e_state(initial: &BellDiagonalState, t: f64, mem: &MemoryParams, p2: f64) -> BellDiagonalState {
    let q = -(-t / mem.coherence_time).exp_m1();
    phase_damp(&depolarize(initial, q), p2)
}
