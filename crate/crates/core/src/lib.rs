//! Dobrushin ergodicity coefficients and perturbation bounds for Markov
//! semigroups on finite-dimensional abstract state spaces.
//!
//! Everything is generic over the scalar type ([`Real`], implemented for
//! `f32` and `f64`). The [`f64`] aliases below are what most callers want.
//!
//! ```
//! use dobrushin::{delta, Semigroup, StateSpace};
//! use nalgebra::DMatrix;
//!
//! let q = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
//! let sg = Semigroup::from_matrix(StateSpace::classical(2).unwrap(), q).unwrap();
//! let d = delta(&sg.evolve(1.0).unwrap()).unwrap();
//! assert!((d.value - (-2.0f64).exp()).abs() < 1e-12);
//! ```

// Negated comparisons also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dobrushin;
pub mod error;
pub mod hermitian;
pub mod linalg;
pub mod quadrature;
pub mod sampling;
pub mod scalar;
pub mod semigroup;
pub mod spaces;
pub mod weights;

pub use bounds::{
    bound_alternative, bound_cesaro_convergence, bound_cesaro_convergence_with, bound_cesaro_pair,
    bound_cesaro_pair_with, bound_fixed_point_gap, bound_mean_combined, bound_mean_ergodic,
    bound_sup_and_stationary, bound_trajectory, bound_trajectory_branches, bound_trajectory_proof,
    verify_bound, BoundInput, BoundKind, BoundReport, BoundRow, GeometricTail, SupAndStationary, VerifySettings,
};
pub use dobrushin::{
    check_delta_axioms, delta, delta_of_matrix, delta_of_semigroup, delta_with, mean_ergodicity_certificate,
    mean_ergodicity_certificate_with, stability_certificate, stability_certificate_with, AxiomReport,
    CertificateKind, DeltaResult, SemigroupDelta, StabilityCertificate,
};
pub use error::{Error, Result};
pub use quadrature::{QuadResult, QuadSettings};
pub use sampling::SamplerSettings;
pub use scalar::Real;
pub use semigroup::{integral_identity_residual, Averaged, Semigroup, StationaryPoints};
pub use spaces::{
    block_lift, lift_contraction, operator_norm, operator_norm_with, validate_generator, validate_markov,
    Estimate, EstimateMode, InnerNorm, LinearMap, Role, SpaceKind, StateSpace, ValidationCheck,
    ValidationReport, ZeroSumDecomposition,
};
pub use weights::{
    check_mean_ergodic_decomposition, combine, is_in_class_w, unique_ergodicity_check,
    verify_weighted_convergence, ClassReport, ClassVerdict, Combine, UniqueErgodicity, Weight, WeightForm,
};

/// Double-precision aliases.
pub mod f64 {
    pub type StateSpace = crate::StateSpace<f64>;
    pub type LinearMap = crate::LinearMap<f64>;
    pub type Semigroup = crate::Semigroup<f64>;
    pub type Weight = crate::Weight<f64>;
    pub type BoundInput = crate::BoundInput<f64>;
    pub type BoundReport = crate::BoundReport<f64>;
    pub type StabilityCertificate = crate::StabilityCertificate<f64>;
    pub type DeltaResult = crate::DeltaResult<f64>;
}

/// Single-precision aliases.
pub mod f32 {
    pub type StateSpace = crate::StateSpace<f32>;
    pub type LinearMap = crate::LinearMap<f32>;
    pub type Semigroup = crate::Semigroup<f32>;
    pub type Weight = crate::Weight<f32>;
    pub type BoundInput = crate::BoundInput<f32>;
    pub type BoundReport = crate::BoundReport<f32>;
    pub type StabilityCertificate = crate::StabilityCertificate<f32>;
    pub type DeltaResult = crate::DeltaResult<f32>;
}
