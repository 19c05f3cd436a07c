mod common;

use approx::assert_abs_diff_eq;
use common::{classical_sg, perturbed_q, pi_plus, random_q, random_simplex, simpson, simpson_scalar, taylor_expm_scaled, two_state_q};
use dobrushin::{integral_identity_residual, validate_markov, QuadSettings, Semigroup, StateSpace, StationaryPoints, Weight};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn evolve_zero_generator_is_identity() {
    let sg = classical_sg(DMatrix::zeros(3, 3));
    for t in [0.0, 1.0, 1e6] {
        assert_eq!(*sg.evolve(t).unwrap().matrix(), DMatrix::identity(3, 3));
    }
}

#[test]
fn evolve_matches_taylor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let q = random_q(&mut rng, 3, 0.0, 2.0);
        let sg = classical_sg(q.clone());
        let want = taylor_expm_scaled(&(q * 0.7));
        assert_abs_diff_eq!(*sg.evolve(0.7).unwrap().matrix(), want, epsilon = 1e-10);
    }
}

#[test]
fn evolve_two_state_closed_form() {
    let sg = classical_sg(two_state_q());
    for t in [0.1, 0.5, 1.0, 3.0] {
        assert_abs_diff_eq!(*sg.evolve(t).unwrap().matrix(), pi_plus((-2.0 * t).exp()), epsilon = 1e-13);
    }
}

#[test]
fn evolved_maps_are_markov() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = random_q(&mut rng, 5, 0.0, 3.0);
    let sg = classical_sg(q);
    for t in [0.01, 0.3, 2.0, 50.0] {
        assert!(validate_markov(&sg.evolve(t).unwrap(), 1e-7).passed);
        assert!(validate_markov(&sg.cesaro_average(t).unwrap(), 1e-7).passed);
    }
}

#[test]
fn cesaro_matches_simpson_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=6 {
        let q = random_q(&mut rng, n, 0.0, 1.5);
        let sg = classical_sg(q.clone());
        for t in [0.5, 2.0, 8.0] {
            let oracle = simpson(|s| taylor_expm_scaled(&(&q * s)), 0.0, t, 400) / t;
            assert_abs_diff_eq!(*sg.cesaro_average(t).unwrap().matrix(), oracle, epsilon = 1e-6);
        }
    }
}

#[test]
fn constant_weight_reproduces_cesaro_exactly() {
    let sg = classical_sg(two_state_q());
    let one = Weight::constant(3.0).unwrap();
    let w = sg.weighted_average(&one, 1.7, &QuadSettings::default()).unwrap();
    assert_eq!(w.map.matrix(), sg.cesaro_average(1.7).unwrap().matrix());
}

#[test]
fn weighted_average_with_quadrature_constant_weight() {
    // A constant tabulated weight takes the quadrature path.
    let sg = classical_sg(two_state_q());
    let flat = Weight::tabulated(vec![(0.0, 2.0), (5.0, 2.0)]).unwrap();
    let w = sg.weighted_average(&flat, 1.0, &QuadSettings::default()).unwrap();
    assert_abs_diff_eq!(*w.map.matrix(), *sg.cesaro_average(1.0).unwrap().matrix(), epsilon = 1e-10);
}

#[test]
fn weighted_average_linear_weight() {
    let sg = classical_sg(two_state_q());
    let w = sg
        .weighted_average(&Weight::power(1.0).unwrap(), 1.0, &QuadSettings::default())
        .unwrap();
    assert_abs_diff_eq!(*w.map.matrix(), pi_plus((1.0 - 3.0 * (-2f64).exp()) / 2.0), epsilon = 1e-9);
    assert!(w.converged);
    assert!(w.error_estimate < 1e-8);
}

#[test]
fn weighted_average_singular_weight() {
    // b(s) = s^-1/2: c = (1/(2 sqrt t)) ∫_0^t s^-1/2 e^-2s ds, oracle via u = sqrt s.
    let sg = classical_sg(two_state_q());
    let t = 2.0;
    let w = sg
        .weighted_average(&Weight::power(-0.5).unwrap(), t, &QuadSettings::default())
        .unwrap();
    let integral = simpson_scalar(|u| 2.0 * (-2.0 * u * u).exp(), 0.0, t.sqrt(), 4000);
    let c = integral / (2.0 * t.sqrt());
    assert_abs_diff_eq!(*w.map.matrix(), pi_plus(c), epsilon = 1e-8);
}

#[test]
fn zero_generator_averages_are_identity() {
    let sg = classical_sg(DMatrix::zeros(2, 2));
    let quad = QuadSettings::default();
    assert_abs_diff_eq!(*sg.cesaro_average(4.0).unwrap().matrix(), DMatrix::identity(2, 2), epsilon = 1e-14);
    let w = sg.weighted_average(&Weight::power(0.5).unwrap(), 4.0, &quad).unwrap();
    assert_abs_diff_eq!(*w.map.matrix(), DMatrix::identity(2, 2), epsilon = 1e-12);
    let ts = sg.time_squared_average(4.0, &quad).unwrap();
    assert_abs_diff_eq!(*ts.map.matrix(), DMatrix::identity(2, 2), epsilon = 1e-12);
}

#[test]
fn time_squared_matches_scalar_oracle() {
    let sg = classical_sg(two_state_q());
    let c = simpson_scalar(|s| (-2.0 * s * s).exp(), 0.0, 3.0, 20_000) / 3.0;
    let avg = sg.time_squared_average(3.0, &QuadSettings::default()).unwrap();
    assert_abs_diff_eq!(*avg.map.matrix(), pi_plus(c), epsilon = 1e-8);
}

#[test]
fn time_squared_paths_agree_on_random_generator() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let sg = classical_sg(random_q(&mut rng, 3, 0.0, 1.0));
    let quad = QuadSettings::default();
    let direct = sg.time_squared_average(2.0, &quad).unwrap();
    let subst = sg.time_squared_average_substituted(2.0, &quad).unwrap();
    assert!((direct.map.matrix() - subst.map.matrix()).amax() < 1e-6);
}

#[test]
fn stationary_points_examples() {
    let cyc = DMatrix::from_row_slice(3, 3, &[-1.0, 0.0, 1.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0]);
    match classical_sg(cyc).stationary_points(1e-9) {
        StationaryPoints::Unique { x0 } => {
            assert_abs_diff_eq!(x0, DVector::from_element(3, 1.0 / 3.0), epsilon = 1e-12)
        }
        other => panic!("{other:?}"),
    }
    // Two absorbing states.
    let absorbing = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.0, 0.0, -1.0, 0.0, 0.0, 0.5, 0.0]);
    assert_eq!(
        classical_sg(absorbing).stationary_points(1e-9),
        StationaryPoints::NonUnique { nullity: 2 }
    );
}

#[test]
fn invalid_inputs() {
    let sg = classical_sg(two_state_q());
    assert!(sg.evolve(-0.1).is_err());
    assert!(sg.cesaro_average(0.0).is_err());
    assert!(sg.weighted_average(&Weight::power(1.0).unwrap(), -1.0, &QuadSettings::default()).is_err());
    let bad = DMatrix::from_row_slice(2, 2, &[-1.0, -0.5, 1.0, 0.5]);
    assert!(Semigroup::from_matrix(StateSpace::classical(2).unwrap(), bad).is_err());
}

#[test]
fn integral_identity_on_pair() {
    let t = classical_sg(two_state_q());
    let s = classical_sg(perturbed_q());
    let quad = QuadSettings::default();
    for x in [DVector::from_column_slice(&[1.0, 0.0]), DVector::from_column_slice(&[0.2, 0.8])] {
        for time in [0.5, 2.0, 5.0] {
            assert!(integral_identity_residual(&t, &s, &x, time, &quad).unwrap() <= 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn semigroup_law(seed in 0u64..10_000, t in 0.0f64..5.0, s in 0.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 4) as usize;
        let sg = classical_sg(random_q(&mut rng, n, 0.0, 2.0));
        let lhs = sg.evolve(t + s).unwrap();
        let rhs = sg.evolve(t).unwrap().compose(&sg.evolve(s).unwrap()).unwrap();
        prop_assert!((lhs.matrix() - rhs.matrix()).amax() <= 1e-8);
        prop_assert!((sg.evolve(0.0).unwrap().matrix() - DMatrix::identity(n, n)).amax() == 0.0);
    }

    #[test]
    fn stationary_point_is_invariant(seed in 0u64..10_000, t in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 4) as usize;
        let sg = classical_sg(random_q(&mut rng, n, 0.1, 2.0));
        let StationaryPoints::Unique { x0 } = sg.stationary_points(1e-9) else {
            return Err(TestCaseError::fail("irreducible chain must have a unique stationary point"));
        };
        prop_assert!((sg.evolve(t).unwrap().apply(&x0).unwrap() - &x0).amax() <= 1e-9);
    }

    #[test]
    fn integral_identity_random(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(&mut rng, 3, 0.0, 1.0);
        let r = random_q(&mut rng, 3, 0.0, 0.3);
        let t = classical_sg(q.clone());
        let s = classical_sg(q + r);
        let x = random_simplex(&mut rng, 3);
        prop_assert!(integral_identity_residual(&t, &s, &x, 1.5, &QuadSettings::default()).unwrap() <= 1e-6);
    }
}
