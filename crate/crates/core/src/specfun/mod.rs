//! Special functions needed by the channel statistics.
//!
//! Gamma, log-Gamma and the error function delegate to `libm` (musl ports,
//! full double precision), the regularized incomplete Gamma to `statrs`.
//! The real-order Bessel K and the quadrature live here.

mod bessel;
mod quad;

pub use bessel::{bessel_k, bessel_k_scaled, ln_bessel_k};
pub use quad::{integrate, QuadratureConfig};

use statrs::function::gamma;

use crate::error::{Error, Result};

pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma_fn requires x > 0, got {x}")));
    }
    Ok(libm::tgamma(x))
}

pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

pub fn erf_fn(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc_fn(x: f64) -> f64 {
    libm::erfc(x)
}

/// Regularized lower incomplete Gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    check_inc_args(a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    gamma::checked_gamma_lr(a, x).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Regularized upper incomplete Gamma `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    check_inc_args(a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    gamma::checked_gamma_ur(a, x).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn check_inc_args(a: f64, x: f64) -> Result<()> {
    if a > 0.0 && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("incomplete gamma needs a > 0, x >= 0 (a={a}, x={x})")))
    }
}
