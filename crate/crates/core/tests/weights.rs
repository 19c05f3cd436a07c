mod common;

use approx::assert_abs_diff_eq;
use common::{classical_sg, pi_plus, two_state_q};
use dobrushin::weights::{default_shift_samples, default_t_sequence, shift_ratio, DEFAULT_CLASS_TOL};
use dobrushin::{
    check_mean_ergodic_decomposition, combine, is_in_class_w, unique_ergodicity_check, verify_weighted_convergence,
    ClassVerdict, Combine, Error, InnerNorm, QuadSettings, Semigroup, StateSpace, UniqueErgodicity, Weight,
};
use nalgebra::{DMatrix, DVector};

fn class(w: &Weight<f64>) -> dobrushin::ClassReport<f64> {
    is_in_class_w(w, &default_shift_samples(), &default_t_sequence(), DEFAULT_CLASS_TOL).unwrap()
}

#[test]
fn catalog_verdicts() {
    for w in [
        Weight::constant(1.0).unwrap(),
        Weight::power(0.5).unwrap(),
        Weight::power(-0.5).unwrap(),
        Weight::power_log(1.0, 1.0).unwrap(),
    ] {
        let r = class(&w);
        assert_eq!(r.verdict, ClassVerdict::InW, "{w:?}");
        assert!(r.analytic);
    }
    let r = class(&Weight::exponential(1.0).unwrap());
    assert_eq!(r.verdict, ClassVerdict::NotInW);
    let limit = r.limits.iter().find(|(s, _)| *s == 1.0).unwrap().1;
    assert_abs_diff_eq!(limit, 1.0 - (-1f64).exp(), epsilon = 1e-15);
    assert_abs_diff_eq!(r.final_ratio(1.0).unwrap(), 1.0 - (-1f64).exp(), epsilon = 1e-3);
}

#[test]
fn sqrt_ratio_matches_closed_form() {
    // For b = sqrt: numerator ∫_0^{t-s} (sqrt(v+s) - sqrt v) dv, denominator (2/3) t^(3/2).
    let w = Weight::power(0.5).unwrap();
    let (s, t) = (1.0f64, 30.0f64);
    let numer = (2.0 / 3.0) * (t.powf(1.5) - s.powf(1.5) - (t - s).powf(1.5));
    let want = numer / ((2.0 / 3.0) * t.powf(1.5));
    assert_abs_diff_eq!(shift_ratio(&w, s, t, &QuadSettings::default()), want, epsilon = 1e-8);
}

#[test]
fn exponential_ratio_stabilizes() {
    let w = Weight::exponential(1.0).unwrap();
    let quad = QuadSettings::default();
    for t in [20.0, 40.0, 80.0] {
        assert!((shift_ratio(&w, 1.0, t, &quad) - (1.0 - (-1f64).exp())).abs() <= 1e-3);
    }
}

#[test]
fn closure_rules() {
    let sqrt = Weight::power(0.5).unwrap();
    let one = Weight::constant(1.0).unwrap();
    assert_eq!(combine(Combine::Scale(2.0), std::slice::from_ref(&sqrt)).unwrap().verdict(), ClassVerdict::InW);
    assert_eq!(combine(Combine::Sum, &[sqrt.clone(), one.clone()]).unwrap().verdict(), ClassVerdict::InW);
    assert_eq!(combine(Combine::Product, &[sqrt.clone(), one]).unwrap().verdict(), ClassVerdict::Unknown);
    assert!(matches!(combine(Combine::Scale(-1.0), &[sqrt]), Err(Error::Input(_))));
}

#[test]
fn unique_ergodicity_cases() {
    match unique_ergodicity_check(&classical_sg(two_state_q()), 1e-9) {
        UniqueErgodicity::UniquelyErgodic { x0 } => {
            assert_abs_diff_eq!(x0, DVector::from_column_slice(&[0.5, 0.5]), epsilon = 1e-12)
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(
        unique_ergodicity_check(&classical_sg(DMatrix::zeros(2, 2)), 1e-9),
        UniqueErgodicity::NotUnique
    );
    let absorbing = DMatrix::from_row_slice(3, 3, &[0.0, 0.5, 0.0, 0.0, -1.0, 0.0, 0.0, 0.5, 0.0]);
    assert_eq!(unique_ergodicity_check(&classical_sg(absorbing), 1e-9), UniqueErgodicity::NotUnique);
}

#[test]
fn decomposition_cases() {
    let r = check_mean_ergodic_decomposition(&classical_sg(two_state_q()), &[1.0], 1e-9).unwrap();
    assert!(r.holds);
    assert_eq!(r.span_rank, 1);
    let r = check_mean_ergodic_decomposition(&classical_sg(DMatrix::zeros(2, 2)), &[1.0], 1e-9).unwrap();
    assert!(!r.holds);
    assert_eq!(r.span_rank, 0);

    let space = StateSpace::direct_sum(2, InnerNorm::L2).unwrap();
    let q = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
    let rot = Semigroup::from_matrix(space, q).unwrap();
    let r = check_mean_ergodic_decomposition(&rot, &[1.0, 2.0], 1e-9).unwrap();
    assert!(r.holds, "{r:?}");
}

#[test]
fn weighted_convergence_examples() {
    let sg = classical_sg(two_state_q());
    let quad = QuadSettings::default();
    let x = DVector::from_column_slice(&[1.0, 0.0]);
    let one = Weight::constant(1.0).unwrap();
    let r = verify_weighted_convergence(&sg, &one, &x, &[1.0], &quad, 1.0).unwrap();
    assert_abs_diff_eq!(r.rows[0].deviation, (1.0 - (-2f64).exp()) / 2.0, epsilon = 1e-12);
    let lin = Weight::power(1.0).unwrap();
    let r = verify_weighted_convergence(&sg, &lin, &x, &[1.0], &quad, 1.0).unwrap();
    assert_abs_diff_eq!(r.rows[0].deviation, (1.0 - 3.0 * (-2f64).exp()) / 2.0, epsilon = 1e-9);
    let x0 = DVector::from_column_slice(&[0.5, 0.5]);
    let r = verify_weighted_convergence(&sg, &lin, &x0, &[1.0, 10.0], &quad, 0.1).unwrap();
    assert!(r.rows.iter().all(|row| row.deviation < 1e-12));
}

#[test]
fn weighted_convergence_requires_class_w() {
    let sg = classical_sg(two_state_q());
    let x = DVector::from_column_slice(&[1.0, 0.0]);
    let r = verify_weighted_convergence(&sg, &Weight::exponential(1.0).unwrap(), &x, &[1.0], &QuadSettings::default(), 0.1);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn catalog_weights_decrease_like_one_over_t() {
    let sg = classical_sg(two_state_q());
    let quad = QuadSettings::default();
    let x = DVector::from_column_slice(&[1.0, 0.0]);
    for w in [
        Weight::constant(1.0).unwrap(),
        Weight::power(0.5).unwrap(),
        Weight::power(-0.5).unwrap(),
        Weight::power_log(1.0, 1.0).unwrap(),
    ] {
        let r = verify_weighted_convergence(&sg, &w, &x, &[1.0, 10.0, 100.0], &quad, 0.1).unwrap();
        assert!(r.passed, "{w:?}: {:?}", r.rows);
        for pair in r.rows.windows(2) {
            assert!(pair[1].deviation < pair[0].deviation);
        }
        for row in &r.rows {
            assert!(row.deviation < 10.0 / row.t);
        }
    }
}

#[test]
fn time_squared_average_converges() {
    let sg = classical_sg(two_state_q());
    let avg = sg.time_squared_average(20.0, &QuadSettings::default()).unwrap();
    let dev = (avg.map.matrix() - pi_plus(0.0)).amax();
    assert!(dev < 0.05, "{dev}");
}

#[test]
fn single_precision_smoke() {
    let q = DMatrix::from_row_slice(2, 2, &[-1.0f32, 1.0, 1.0, -1.0]);
    let sg: dobrushin::f32::Semigroup = Semigroup::from_matrix(StateSpace::classical(2).unwrap(), q).unwrap();
    let d = dobrushin::delta(&sg.evolve(1.0).unwrap()).unwrap();
    assert!((d.value - (-2.0f32).exp()).abs() < 1e-5);
    let w: dobrushin::f32::Weight = Weight::power(0.5).unwrap();
    assert_eq!(w.verdict(), ClassVerdict::InW);
}
