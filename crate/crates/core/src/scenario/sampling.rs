use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::{DemandConfig, TruncatedNormal, UserConfig};
use crate::error::{Error, Result};
use crate::geometry::Point3D;

const MAX_REJECTIONS: usize = 1_000_000;

/// Random stream for repetition `rep` of a run seeded with `seed`.
pub fn rep_rng(seed: u64, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep as u64);
    rng
}

pub fn sample_truncated<R: Rng + ?Sized>(d: &TruncatedNormal, rng: &mut R) -> Result<f64> {
    d.validate()?;
    if d.std == 0.0 {
        return Ok(d.mean);
    }
    let normal = Normal::new(d.mean, d.std).map_err(|e| Error::Config(e.to_string()))?;
    for _ in 0..MAX_REJECTIONS {
        let v = normal.sample(rng);
        if (d.min..=d.max).contains(&v) {
            return Ok(v);
        }
    }
    Err(Error::Config(format!("truncation window of {d:?} has negligible mass")))
}

/// `n_users` ground users with truncated-normal x and y at the configured
/// height, drawn by rejection.
pub fn sample_user_layout(cfg: &UserConfig, n_users: usize, seed: u64) -> Result<Vec<Point3D>> {
    sample_user_layout_with(cfg, n_users, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn sample_user_layout_with<R: Rng + ?Sized>(cfg: &UserConfig, n_users: usize, rng: &mut R) -> Result<Vec<Point3D>> {
    if n_users == 0 {
        return Err(Error::InvalidArgument("n_users must be at least 1".into()));
    }
    (0..n_users)
        .map(|_| {
            let x = sample_truncated(&cfg.x, rng)?;
            let y = sample_truncated(&cfg.y, rng)?;
            Ok(Point3D::new(x, y, cfg.height))
        })
        .collect()
}

/// Configured users, or a fresh sample when none are listed.
pub fn users_for_rep<R: Rng + ?Sized>(cfg: &UserConfig, rng: &mut R) -> Result<Vec<Point3D>> {
    match cfg.explicit() {
        Some(users) => Ok(users),
        None => sample_user_layout_with(cfg, cfg.count, rng),
    }
}

/// Configured fidelity thresholds (a single value applies to every user),
/// or uniform draws from the configured range.
pub fn min_fidelities<R: Rng + ?Sized>(cfg: &DemandConfig, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    match cfg.min_fidelity.as_deref() {
        Some(f) if f.len() == n => Ok(f.to_vec()),
        Some(&[f]) => Ok(vec![f; n]),
        Some(f) => Err(Error::Config(format!("{} fidelity thresholds for {n} users", f.len()))),
        None => {
            let [lo, hi] = cfg.min_fidelity_range;
            Ok((0..n)
                .map(|_| if hi > lo { rng.random_range(lo..hi) } else { lo })
                .collect())
        }
    }
}
