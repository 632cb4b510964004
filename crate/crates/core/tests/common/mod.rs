//! Helpers shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

pub mod density {
    //! Brute-force two-qubit density matrices. Everything in play is real,
    //! so `Y ρ Y` is written as `(XZ) ρ (XZ)ᵀ`.

    pub type Mat = [[f64; 4]; 4];

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    /// Bell vectors in the computational basis |00>, |01>, |10>, |11>,
    /// ordered Φ00, Φ01, Φ10, Φ11.
    pub const BELL: [[f64; 4]; 4] = [
        [S, 0.0, 0.0, S],
        [S, 0.0, 0.0, -S],
        [0.0, S, S, 0.0],
        [0.0, S, -S, 0.0],
    ];

    const I2: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, 1.0]];
    const X: [[f64; 2]; 2] = [[0.0, 1.0], [1.0, 0.0]];
    const Z: [[f64; 2]; 2] = [[1.0, 0.0], [0.0, -1.0]];
    const XZ: [[f64; 2]; 2] = [[0.0, -1.0], [1.0, 0.0]];

    fn kron(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> Mat {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a[i / 2][j / 2] * b[i % 2][j % 2];
            }
        }
        m
    }

    fn mul(a: &Mat, b: &Mat) -> Mat {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = (0..4).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        m
    }

    fn transpose(a: &Mat) -> Mat {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a[j][i];
            }
        }
        m
    }

    fn conj(k: &Mat, rho: &Mat) -> Mat {
        mul(&mul(k, rho), &transpose(k))
    }

    fn axpy(acc: &mut Mat, w: f64, m: &Mat) {
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += w * m[i][j];
            }
        }
    }

    pub fn bell_diagonal(l: [f64; 4]) -> Mat {
        let mut rho = [[0.0; 4]; 4];
        for (b, &w) in BELL.iter().zip(&l) {
            for i in 0..4 {
                for j in 0..4 {
                    rho[i][j] += w * b[i] * b[j];
                }
            }
        }
        rho
    }

    /// Depolarizing channel on the first (stored) qubit with total mix weight
    /// `q`, as the Pauli operator sum `(1 − 3q/4) ρ + q/4 Σ σ ρ σ`.
    pub fn depolarize_first(rho: &Mat, q: f64) -> Mat {
        let mut out = [[0.0; 4]; 4];
        axpy(&mut out, 1.0 - 0.75 * q, rho);
        for p in [&X, &XZ, &Z] {
            axpy(&mut out, 0.25 * q, &conj(&kron(p, &I2), rho));
        }
        out
    }

    /// Phase flip on the second (flying) qubit with probability `p`.
    pub fn phase_flip_second(rho: &Mat, p: f64) -> Mat {
        let mut out = [[0.0; 4]; 4];
        axpy(&mut out, 1.0 - p, rho);
        axpy(&mut out, p, &conj(&kron(&I2, &Z), rho));
        out
    }

    /// `<Φ_jk| ρ |Φ_jk>` for the four Bell vectors.
    pub fn bell_weights(rho: &Mat) -> [f64; 4] {
        BELL.map(|b| {
            let mut s = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    s += b[i] * rho[i][j] * b[j];
                }
            }
            s
        })
    }

    pub fn trace(rho: &Mat) -> f64 {
        (0..4).map(|i| rho[i][i]).sum()
    }

    /// Memory decoherence for `t` seconds followed by a phase flip.
    pub fn e2e(l: [f64; 4], t: f64, coherence_time: f64, p2: f64) -> [f64; 4] {
        let q = 1.0 - (-t / coherence_time).exp();
        bell_weights(&phase_flip_second(&depolarize_first(&bell_diagonal(l), q), p2))
    }
}

pub mod ks {
    /// Kolmogorov-Smirnov distance of sorted samples against a CDF.
    pub fn distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
        let n = sorted.len() as f64;
        sorted
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).max((i + 1) as f64 / n - f)
            })
            .fold(0.0, f64::max)
    }

    /// Upper bound on the KS distance when the CDF is only known at the knots
    /// `sorted[idx[k]]` (`knot_cdf[k]`). Between knots both the empirical and
    /// the model CDF are monotone, so the gap is bracketed by the knot values.
    pub fn distance_bound(sorted: &[f64], idx: &[usize], knot_cdf: &[f64]) -> f64 {
        let n = sorted.len() as f64;
        let mut d: f64 = 0.0;
        let mut prev_f = 0.0;
        let mut prev_i = 0usize;
        for (&i, &f) in idx.iter().zip(knot_cdf) {
            // on [x_prev, x_i]: F_n ranges over [prev_i/n, (i+1)/n], F over [prev_f, f]
            d = d.max((i + 1) as f64 / n - prev_f).max(f - prev_i as f64 / n);
            prev_f = f;
            prev_i = i;
        }
        d.max(1.0 - prev_f).max(1.0 - prev_i as f64 / n)
    }
}

pub mod dist {
    use super::ks;
    use risqn::channel::{gamma_gamma_pdf, gamma_gamma_tail_bound, pointing_cdf, pointing_pdf, ChannelSampler, PointingParams, TurbulenceParams};
    use risqn::specfun::{integrate, QuadratureConfig};

    /// Knot spacing for the Gamma-Gamma KS bound.
    const STRIDE: usize = 250;

    fn draws<F: FnMut(&mut ChannelSampler) -> f64>(
        turb: &TurbulenceParams,
        pt: &PointingParams,
        n: usize,
        seed: u64,
        mut f: F,
    ) -> Vec<f64> {
        let mut s = ChannelSampler::new(turb, pt, seed).unwrap();
        let mut v: Vec<f64> = (0..n).map(|_| f(&mut s)).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// KS distance bound of the Gamma-Gamma sampler; the CDF is accumulated
    /// by quadrature between every `STRIDE`-th order statistic.
    pub fn gamma_gamma_ks(turb: &TurbulenceParams, pt: &PointingParams, n: usize, seed: u64) -> f64 {
        let x = draws(turb, pt, n, seed, |s| s.turbulence());
        let cfg = QuadratureConfig::default();
        let pdf = |h: f64| gamma_gamma_pdf(h, turb).unwrap();
        let mut idx: Vec<usize> = (0..n).step_by(STRIDE).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        let mut cdf = Vec::with_capacity(idx.len());
        let (mut acc, mut lo) = (0.0, 0.0);
        for &i in &idx {
            acc += integrate(pdf, lo, x[i], &cfg).unwrap();
            lo = x[i];
            cdf.push(acc);
        }
        ks::distance_bound(&x, &idx, &cdf)
    }

    pub fn pointing_ks(turb: &TurbulenceParams, pt: &PointingParams, n: usize, seed: u64) -> f64 {
        let x = draws(turb, pt, n, seed, |s| s.pointing());
        ks::distance(&x, |h| pointing_cdf(h, pt))
    }

    /// `∫ f_{h_a}` over `(0, H)` with `H` past the 1e-15 tail bound.
    pub fn gamma_gamma_mass(turb: &TurbulenceParams) -> f64 {
        let mut hi = 2.0;
        while gamma_gamma_tail_bound(hi, turb) > 1e-15 {
            hi *= 1.5;
        }
        let cfg = QuadratureConfig::default();
        let pdf = |h: f64| gamma_gamma_pdf(h, turb).unwrap();
        integrate(pdf, 0.0, 1.0, &cfg).unwrap() + integrate(pdf, 1.0, hi, &cfg).unwrap()
    }

    pub fn pointing_mass(pt: &PointingParams) -> f64 {
        let cfg = QuadratureConfig::default();
        integrate(|h| pointing_pdf(h, pt).unwrap(), 0.0, pt.a0, &cfg).unwrap()
    }
}

pub mod sweeps {
    //! Ten-point parameter sweeps for the ordering checks.
    use risqn::channel::EnvironmentParams;
    use risqn::entanglement::{e2e_state, phase_damp, werner_from_alpha, MemoryParams};
    use risqn::link::{budget_from_distances, prob_success, RytovDistance};
    use risqn::specfun::QuadratureConfig;

    pub const BASE_D_SR: f64 = 150.0;
    pub const BASE_D_RI: f64 = 250.0;

    fn lin(lo: f64, hi: f64) -> impl Iterator<Item = f64> {
        (0..10).map(move |k| lo + (hi - lo) * k as f64 / 9.0)
    }

    fn psucc(env: &EnvironmentParams, d_sr: f64, d_ri: f64) -> f64 {
        let b = budget_from_distances(env, d_sr, d_ri, RytovDistance::E2e).unwrap();
        prob_success(&b, &QuadratureConfig::default()).unwrap()
    }

    fn env_sweep<F: Fn(&mut EnvironmentParams, f64)>(lo: f64, hi: f64, set: F) -> Vec<f64> {
        lin(lo, hi)
            .map(|v| {
                let mut env = EnvironmentParams::default();
                set(&mut env, v);
                psucc(&env, BASE_D_SR, BASE_D_RI)
            })
            .collect()
    }

    /// Success probability along increasing κ, C_n², σ_θ, σ_φ, d_sr and d_ri.
    /// C_n² spans the moderate-to-strong band; below roughly 3e-14 the
    /// probability rises with turbulence.
    pub fn psucc_sweeps() -> Vec<(&'static str, Vec<f64>)> {
        let env = EnvironmentParams::default();
        vec![
            ("attenuation", env_sweep(0.1, 10.0, |e, v| e.attenuation_db_per_km = v)),
            ("cn2", env_sweep(5e-14, 2e-13, |e, v| e.cn2 = v)),
            ("sigma_theta", env_sweep(0.25e-3, 3e-3, |e, v| e.sigma_theta = v)),
            ("sigma_phi", env_sweep(0.1e-3, 1.5e-3, |e, v| e.sigma_phi = v)),
            ("d_sr", lin(50.0, 500.0).map(|d| psucc(&env, d, BASE_D_RI)).collect()),
            ("d_ri", lin(50.0, 500.0).map(|d| psucc(&env, BASE_D_SR, d)).collect()),
        ]
    }

    /// Werner fidelity after storage along increasing `t`, and after a phase
    /// flip along increasing `p2`.
    pub fn fidelity_sweeps() -> Vec<(&'static str, Vec<f64>)> {
        let mem = MemoryParams::default();
        let mut out = Vec::new();
        for alpha in [0.0005, 0.1, 0.3, 0.5] {
            let s = werner_from_alpha(alpha).unwrap();
            out.push((
                "storage_time",
                lin(0.0, 5e-3).map(|t| e2e_state(&s, t, &mem, 0.1).fidelity()).collect(),
            ));
            out.push(("p2", lin(0.0, 1.0).map(|p| phase_damp(&s, p).fidelity()).collect()));
        }
        out
    }

    pub fn non_increasing(v: &[f64]) -> bool {
        v.windows(2).all(|w| w[1] <= w[0])
    }
}

pub mod mc {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use risqn::channel::{EnvironmentParams, PointingJitter, TurbulenceStrength, Weather};
    use risqn::link::{budget_from_distances, prob_success, prob_success_mc, LinkBudget, RytovDistance};
    use risqn::specfun::QuadratureConfig;

    pub struct Case {
        pub label: String,
        pub budget: LinkBudget,
    }

    /// `n` budgets cycling through sunny/rainy × moderate/strong, with an
    /// E2E distance in [200, 900] m split at a random point.
    pub fn random_budgets(n: usize, seed: u64) -> Vec<Case> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|k| {
                let weather = [Weather::Sunny, Weather::Rainy][k % 2];
                let turb = [TurbulenceStrength::Moderate, TurbulenceStrength::Strong][(k / 2) % 2];
                let pointing = if rng.random::<bool>() { PointingJitter::High } else { PointingJitter::Low };
                let env = EnvironmentParams::from_presets(weather, turb, pointing);
                let d = rng.random_range(200.0..=900.0);
                let d_sr = d * rng.random_range(0.1..0.9);
                Case {
                    label: format!("{weather:?}/{turb:?}/{pointing:?} d_sr={d_sr:.0} d_ri={:.0}", d - d_sr),
                    budget: budget_from_distances(&env, d_sr, d - d_sr, RytovDistance::E2e).unwrap(),
                }
            })
            .collect()
    }

    /// `(quadrature, mc, std_error)` for one case. The error is the larger of
    /// the empirical one and the binomial error at the quadrature value, so a
    /// run with no hits on a tiny probability is still scored.
    pub fn compare(case: &Case, n: usize, seed: u64) -> (f64, f64, f64) {
        let q = prob_success(&case.budget, &QuadratureConfig::default()).unwrap();
        let (p, se) = prob_success_mc(&case.budget, n, seed).unwrap();
        (q, p, se.max((q * (1.0 - q) / n as f64).sqrt()))
    }
}

pub mod scen {
    use risqn::channel::TurbulenceStrength;
    use risqn::entanglement::{RATE_MAX, RATE_MIN};
    use risqn::geometry::Point3D;
    use risqn::network::{ProblemInstance, UserDemand};
    use risqn::optimizer::{GridSpec, SAConfig};
    use risqn::scenario::placement_users;

    pub fn instance(users: Vec<Point3D>, weights: &[f64], min_fidelity: f64) -> ProblemInstance {
        let demands = weights
            .iter()
            .map(|&weight| UserDemand {
                weight,
                min_rate: 1.0,
                min_fidelity,
            })
            .collect();
        ProblemInstance::new(Point3D::new(0.0, 0.0, 90.0), users, demands).unwrap()
    }

    /// Three users at 350, 400 and 450 m on the x-axis.
    pub fn scenario1(weights: &[f64]) -> ProblemInstance {
        instance(placement_users(1), weights, 0.5)
    }

    pub fn strong(mut inst: ProblemInstance) -> ProblemInstance {
        inst.env.cn2 = TurbulenceStrength::Strong.cn2();
        inst
    }

    /// RIS 10×10×4 with eight evenly spaced rate levels per user.
    pub fn coarse_grid() -> GridSpec {
        GridSpec {
            ris: [10, 10, 4],
            rate_levels: (0..8).map(|j| RATE_MIN + (RATE_MAX - RATE_MIN) * j as f64 / 7.0).collect(),
            budget: 1_000_000,
        }
    }

    pub fn sa(seed: u64) -> SAConfig {
        SAConfig {
            seed,
            ..Default::default()
        }
    }
}
