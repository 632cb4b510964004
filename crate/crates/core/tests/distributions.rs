mod common;

use common::dist;
use risqn::channel::{pointing_params, rytov_variance, turbulence_params, EnvironmentParams, PointingJitter, TurbulenceStrength, Weather};

fn cases() -> Vec<(EnvironmentParams, f64, f64)> {
    let mut v = Vec::new();
    for turb in [TurbulenceStrength::Moderate, TurbulenceStrength::Strong] {
        for pointing in [PointingJitter::Low, PointingJitter::High] {
            let env = EnvironmentParams::from_presets(Weather::Sunny, turb, pointing);
            v.push((env, 150.0, 350.0));
        }
    }
    v
}

#[test]
fn samplers_pass_ks_against_analytic_cdfs() {
    for (i, (env, d_sr, d_ri)) in cases().into_iter().enumerate() {
        let turb = turbulence_params(rytov_variance(&env, d_sr + d_ri)).unwrap();
        let pt = pointing_params(&env, d_sr, d_ri).unwrap();
        let seed = 11 + i as u64;
        let d_gg = dist::gamma_gamma_ks(&turb, &pt, 1_000_000, seed);
        let d_pt = dist::pointing_ks(&turb, &pt, 1_000_000, seed);
        assert!(d_gg <= 0.002, "gamma-gamma case {i}: {d_gg}");
        assert!(d_pt <= 0.002, "pointing case {i}: {d_pt}");
    }
}

#[test]
fn densities_are_normalised() {
    for (env, d_sr, d_ri) in cases() {
        let turb = turbulence_params(rytov_variance(&env, d_sr + d_ri)).unwrap();
        let pt = pointing_params(&env, d_sr, d_ri).unwrap();
        assert!((dist::gamma_gamma_mass(&turb) - 1.0).abs() < 1e-6);
        assert!((dist::pointing_mass(&pt) - 1.0).abs() < 1e-6);
    }
}
