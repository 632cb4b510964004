mod common;

use common::density;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use risqn::entanglement::{e2e_state, BellDiagonalState, MemoryParams};

fn random_state(rng: &mut ChaCha8Rng) -> BellDiagonalState {
    let raw: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().ln());
    let total: f64 = raw.iter().sum();
    BellDiagonalState::from_coefficients(raw.map(|x| x / total))
}

#[test]
fn e2e_state_matches_density_matrix_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..1000 {
        let s = random_state(&mut rng);
        let mem = MemoryParams {
            coherence_time: 10f64.powf(rng.random_range(-5.0..-1.0)),
            ..Default::default()
        };
        let t = mem.coherence_time * 10f64.powf(rng.random_range(-3.0..1.0));
        let p2 = rng.random::<f64>();
        let got = e2e_state(&s, t, &mem, p2).coefficients();
        let want = density::e2e(s.coefficients(), t, mem.coherence_time, p2);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn oracle_preserves_trace_and_werner_form() {
    let rho = density::bell_diagonal([0.7, 0.1, 0.1, 0.1]);
    let out = density::phase_flip_second(&density::depolarize_first(&rho, 0.3), 0.2);
    assert!((density::trace(&out) - 1.0).abs() < 1e-14);
    // full depolarization leaves the maximally mixed state
    let mixed = density::bell_weights(&density::depolarize_first(&rho, 1.0));
    for w in mixed {
        assert!((w - 0.25).abs() < 1e-14);
    }
}

#[test]
fn phase_flip_swaps_phi_pairs() {
    let w = density::bell_weights(&density::phase_flip_second(&density::bell_diagonal([1.0, 0.0, 0.0, 0.0]), 1.0));
    assert!((w[1] - 1.0).abs() < 1e-14);
    let w = density::bell_weights(&density::phase_flip_second(&density::bell_diagonal([0.0, 0.0, 1.0, 0.0]), 1.0));
    assert!((w[3] - 1.0).abs() < 1e-14);
}
