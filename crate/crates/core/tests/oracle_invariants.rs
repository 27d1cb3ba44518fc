use proptest::prelude::*;

use qcsolve::oracle::{self, discretize_on, eigenvalues_by_bisection, sturm_count, TridiagonalOperator};
use qcsolve::{OracleBox, OracleConfig, PotentialModel};

fn random_operator(diag: Vec<f64>, off_seed: Vec<f64>) -> TridiagonalOperator {
    let off: Vec<f64> = off_seed.into_iter().take(diag.len() - 1).collect();
    TridiagonalOperator::from_parts(diag, off).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sturm_count_is_monotone(
        diag in prop::collection::vec(-10.0f64..10.0, 2..60),
        off in prop::collection::vec(-3.0f64..3.0, 60),
        mut shifts in prop::collection::vec(-30.0f64..30.0, 2..20),
    ) {
        let op = random_operator(diag, off);
        shifts.sort_by(f64::total_cmp);
        let counts: Vec<usize> = shifts.iter().map(|&s| sturm_count(&op, s)).collect();
        prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]), "{counts:?}");
        let (lo, hi) = op.gershgorin();
        prop_assert_eq!(sturm_count(&op, lo - 1.0), 0);
        prop_assert_eq!(sturm_count(&op, hi + 1.0), op.dim());
    }

    /// Eigenvalues sum to the trace.
    #[test]
    fn bisection_preserves_trace(
        diag in prop::collection::vec(-10.0f64..10.0, 2..30),
        off in prop::collection::vec(-3.0f64..3.0, 30),
    ) {
        let op = random_operator(diag.clone(), off);
        let spec = eigenvalues_by_bisection(&op, op.dim(), 1e-13, false).unwrap();
        let trace: f64 = diag.iter().sum();
        let sum: f64 = spec.energies.iter().sum();
        prop_assert!((trace - sum).abs() < 1e-9 * (1.0 + trace.abs()), "{trace} vs {sum}");
    }
}

#[test]
fn plain_grid_error_is_second_order() {
    let v = PotentialModel::harmonic(1.0).unwrap();
    let err = |n: usize| {
        let op = discretize_on(&v, -10.0, 10.0, n).unwrap();
        let spec = eigenvalues_by_bisection(&op, 4, 1e-13, false).unwrap();
        (spec.energies[3] - 3.5).abs()
    };
    let (e1, e2) = (err(401), err(801));
    let ratio = e1 / e2;
    assert!((3.8..=4.2).contains(&ratio), "{e1} {e2} {ratio}");
}

/// Richardson values on the default grid and at `h/4` agree.
#[test]
fn richardson_is_grid_consistent() {
    let v = PotentialModel::morse(10.0, 1.0).unwrap();
    let run = |n: usize| {
        let cfg = OracleConfig {
            grid_points: n,
            bounding_box: OracleBox::Fixed(-2.0, 30.0),
            target_levels: 4,
            ..OracleConfig::default()
        };
        oracle::solve(&v, &cfg).unwrap().energies
    };
    let coarse = run(4001);
    let fine = run(16001);
    for (a, b) in coarse.iter().zip(&fine) {
        assert!((a - b).abs() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn eigenvector_nodes_follow_level_index() {
    let v = PotentialModel::harmonic(1.0).unwrap();
    let cfg = OracleConfig {
        grid_points: 1001,
        bounding_box: OracleBox::Fixed(-10.0, 10.0),
        target_levels: 6,
        retain_eigenvectors: true,
        richardson: false,
        ..OracleConfig::default()
    };
    let spec = oracle::solve(&v, &cfg).unwrap();
    let vectors = spec.eigenvectors.expect("vectors retained");
    for (k, vec) in vectors.iter().enumerate() {
        assert_eq!(oracle::node_count(vec), k);
    }
}
