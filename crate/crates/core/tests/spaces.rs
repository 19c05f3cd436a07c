mod common;

use approx::assert_abs_diff_eq;
use dobrushin::hermitian::{hermitian_eigen, CMatrix};
use dobrushin::{
    lift_contraction, operator_norm, validate_markov, InnerNorm, LinearMap, Role, StateSpace,
};
use nalgebra::{Complex, DMatrix, DVector};
use proptest::prelude::*;

fn quantum_state(re: &[f64], im: &[f64]) -> CMatrix<f64> {
    // A A^* normalized to unit trace is a density matrix.
    let a = CMatrix::from_fn(2, 2, |i, j| Complex::new(re[2 * i + j], im[2 * i + j]));
    let rho = &a * a.adjoint();
    let tr = rho[(0, 0)].re + rho[(1, 1)].re;
    rho / Complex::new(tr.max(1e-12), 0.0)
}

proptest! {
    #[test]
    fn classical_norm_additive_on_cone(x in prop::collection::vec(0.0f64..5.0, 4), y in prop::collection::vec(0.0f64..5.0, 4)) {
        let s = StateSpace::classical(4).unwrap();
        let (x, y) = (DVector::from_vec(x), DVector::from_vec(y));
        let lhs = s.norm(&(&x + &y)).unwrap();
        prop_assert!((lhs - s.norm(&x).unwrap() - s.norm(&y).unwrap()).abs() <= 1e-12);
        prop_assert!((s.norm(&x).unwrap() - s.functional(&x).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn direct_sum_norm_additive_on_cone(a in 0.0f64..3.0, b in 0.0f64..3.0, u in prop::collection::vec(-1.0f64..1.0, 3), v in prop::collection::vec(-1.0f64..1.0, 3)) {
        for inner in [InnerNorm::L1, InnerNorm::L2, InnerNorm::Linf] {
            let s = StateSpace::direct_sum(3, inner).unwrap();
            let cone_point = |alpha: f64, w: &[f64]| {
                let w = DVector::from_column_slice(w);
                let n = inner.vector_norm(w.as_slice()).max(1e-12);
                let mut x = DVector::zeros(4);
                x[0] = alpha;
                x.rows_mut(1, 3).copy_from(&(w * (alpha / n).min(1.0) ));
                x
            };
            let x = cone_point(a, &u);
            let y = cone_point(b, &v);
            prop_assert!(s.is_positive(&x, 1e-12).unwrap());
            let lhs = s.norm(&(&x + &y)).unwrap();
            prop_assert!((lhs - s.norm(&x).unwrap() - s.norm(&y).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn quantum_norm_additive_on_cone(re1 in prop::collection::vec(-1.0f64..1.0, 4), im1 in prop::collection::vec(-1.0f64..1.0, 4),
                                     re2 in prop::collection::vec(-1.0f64..1.0, 4), im2 in prop::collection::vec(-1.0f64..1.0, 4),
                                     w in 0.1f64..3.0) {
        let s = StateSpace::quantum(2).unwrap();
        let basis = s.hermitian_basis().unwrap();
        let x = basis.coordinates(&quantum_state(&re1, &im1)) * w;
        let y = basis.coordinates(&quantum_state(&re2, &im2));
        let lhs = s.norm(&(&x + &y)).unwrap();
        prop_assert!((lhs - s.norm(&x).unwrap() - s.norm(&y).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn classical_decomposition_sound(raw in prop::collection::vec(-2.0f64..2.0, 5)) {
        let s = StateSpace::classical(5).unwrap();
        let mut x = DVector::from_vec(raw);
        let mean = x.mean();
        x.add_scalar_mut(-mean);
        prop_assume!(x.amax() > 1e-6);
        let d = s.decompose_zero_sum(&x, 1e-9).unwrap();
        prop_assert!((&(&d.u - &d.v) * d.xi - &x).amax() <= 1e-10);
        prop_assert!(s.is_in_base(&d.u, 1e-12).unwrap() && s.is_in_base(&d.v, 1e-12).unwrap());
        prop_assert!(d.xi <= 0.5 * s.norm(&x).unwrap() + 1e-12);
    }

    #[test]
    fn quantum_decomposition_sound(c in prop::collection::vec(-1.0f64..1.0, 3)) {
        let s = StateSpace::quantum(2).unwrap();
        let x = DVector::from_column_slice(&[0.0, c[0], c[1], c[2]]);
        prop_assume!(x.amax() > 1e-6);
        let d = s.decompose_zero_sum(&x, 1e-9).unwrap();
        prop_assert!((&(&d.u - &d.v) * d.xi - &x).amax() <= 1e-10);
        prop_assert!(s.is_in_base(&d.u, 1e-9).unwrap() && s.is_in_base(&d.v, 1e-9).unwrap());
        prop_assert!(d.xi <= 0.5 * s.norm(&x).unwrap() + 1e-12);
    }

    #[test]
    fn direct_sum_decomposition_sound(v in prop::collection::vec(-1.0f64..1.0, 3)) {
        for inner in [InnerNorm::L1, InnerNorm::L2, InnerNorm::Linf] {
            let s = StateSpace::direct_sum(3, inner).unwrap();
            let mut x = DVector::zeros(4);
            x.rows_mut(1, 3).copy_from_slice(&v);
            prop_assume!(x.amax() > 1e-6);
            let d = s.decompose_zero_sum(&x, 1e-9).unwrap();
            prop_assert!((&(&d.u - &d.v) * d.xi - &x).amax() <= 1e-10);
            prop_assert!(s.is_in_base(&d.u, 1e-9).unwrap() && s.is_in_base(&d.v, 1e-9).unwrap());
            prop_assert!(d.xi <= 0.5 * s.lambda_generating() * s.norm(&x).unwrap() + 1e-12);
        }
    }

    #[test]
    fn markov_maps_have_unit_norm(seed in 0u64..1000) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = common::random_stochastic(&mut rng, 4);
        let s = StateSpace::classical(4).unwrap();
        let map = LinearMap::new(s.clone(), m.clone(), Role::Markov).unwrap();
        prop_assert!(validate_markov(&map, 1e-9).passed);
        prop_assert!((operator_norm(&s, &m).unwrap().value - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn quantum_norm_matches_eigenvalue_oracle() {
    let s = StateSpace::quantum(2).unwrap();
    let x = s.hermitian_basis().unwrap().coordinates(&common::cdiag(0.5, -0.5));
    assert_abs_diff_eq!(s.norm(&x).unwrap(), 1.0, epsilon = 1e-14);
}

#[test]
fn quantum_decomposition_matches_eigenprojectors() {
    let s = StateSpace::quantum(2).unwrap();
    let basis = s.hermitian_basis().unwrap();
    let x = basis.coordinates(&common::cdiag(0.5, -0.5));
    let d = s.decompose_zero_sum(&x, 1e-9).unwrap();
    assert_abs_diff_eq!(d.xi, 0.5, epsilon = 1e-14);
    let (vals, _) = hermitian_eigen(&basis.matrix(&d.u));
    let mut vals = vals;
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(basis.matrix(&d.u)[(0, 0)].re, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(basis.matrix(&d.v)[(1, 1)].re, 1.0, epsilon = 1e-12);
}

#[test]
fn depolarizing_choi_eigenvalues() {
    // Unnormalized Choi matrix of the p-depolarizing qubit channel is
    // (1 - p) |Ω><Ω| + (p/2) I with |Ω|^2 = 2: eigenvalues 2 - 3p/2 once, p/2 thrice.
    let p = 0.25;
    let map = common::depolarizing(p);
    let choi = map.choi_matrix().unwrap();
    let mut vals: Vec<f64> = dobrushin::hermitian::hermitian_eigenvalues(&choi);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for v in &vals[..3] {
        assert_abs_diff_eq!(*v, p / 2.0, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(vals[3], 2.0 - 1.5 * p, epsilon = 1e-12);
    assert!(validate_markov(&map, 1e-9).passed);
}

#[test]
fn lift_rejects_expansion() {
    let m = DMatrix::from_diagonal(&DVector::from_column_slice(&[1.2, 0.3]));
    assert!(matches!(
        lift_contraction(InnerNorm::L2, &m, 1e-9),
        Err(dobrushin::Error::NotAContraction { .. })
    ));
}

#[test]
fn lifted_maps_validate() {
    let m = common::rotation(1.0) * 0.5;
    let lifted = lift_contraction(InnerNorm::L2, &m, 1e-9).unwrap();
    assert!(validate_markov(&lifted, 1e-9).passed);
    assert_eq!(lifted.role(), Role::Markov);
}
