use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qcsolve::radial::{angular_closed_form, angular_eigenvalue, angular_numbers, canonical_3d_residual};
use qcsolve::{radial_spectrum, PotentialModel, SeparableState, SolverConfig};

#[test]
fn angular_quantization_matches_closed_form() {
    let cfg = SolverConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_a11e);
    for _ in 0..20 {
        let n_theta: u32 = rng.gen_range(0..8);
        let m_z: i32 = rng.gen_range(-6..=6);
        let mz = m_z as f64;
        let got = angular_eigenvalue(n_theta, mz, 1.0, &cfg).unwrap();
        let want = angular_closed_form(n_theta, mz, 1.0);
        assert!((got - want).abs() < 1e-8 * want, "({n_theta}, {m_z}): {got} vs {want}");
        assert!((want - (n_theta as f64 + 0.5 + mz.abs())).abs() < 1e-14);
    }
}

#[test]
fn hydrogen_shells_are_degenerate() {
    let v = PotentialModel::coulomb(1.0, 0.0).unwrap();
    let cfg = SolverConfig::default();
    for l in 0..3u32 {
        let s = radial_spectrum(&v, 2, 0, l as i32, &cfg).unwrap();
        for level in &s.levels {
            let n = (level.n_r + l + 1) as f64;
            let want = -0.5 / (n * n);
            assert!(((level.energy - want) / want).abs() < 1e-8, "l = {l}: {}", level.energy);
        }
    }
}

/// Residual of the separated product under the 7-point stencil falls as `h^2`.
#[test]
fn canonical_residual_is_second_order() {
    let v = PotentialModel::coulomb(1.0, 0.0).unwrap();
    let cfg = SolverConfig::default();
    let angular = angular_numbers(0, 1, 1.0, &cfg).unwrap();
    let s = radial_spectrum(&v, 0, 0, 1, &cfg).unwrap();
    let state = SeparableState::from_level(&s.levels[0], &angular);
    let res: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&h| canonical_3d_residual(&v, &state, (3.0, 1.1, 0.3), h).unwrap())
        .collect();
    for w in res.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.5..=4.5).contains(&ratio), "{res:?}");
    }
}
