//! The estimate engine: decay profiles, mean-value and Harnack-type checks,
//! distribution decay, Morrey, Weyl and the Rolle interpolation.

mod averages;
mod decay;
mod elliptic;
mod laplace;

pub use averages::{ball_average, ball_weights};
pub use decay::{
    decay_implies_modulus_check, fit_holder_exponent, holder_from_decay, oscillation_profile, DecayProfile,
};
pub use elliptic::{
    diminish_constants, diminish_of_distribution_check, distribution_curve, harnack_ue_check, hessian_tail,
    open_cube, sandwich_forcing_norm, weak_harnack_constants, weak_harnack_ue_check, DistributionCurve,
    hessian_second_difference_check, HessianTail, DISTRIBUTION_LEVELS, HARNACK_UE_C, HESSIAN_C, WEAK_HARNACK_ETA, WEAK_HARNACK_M,
};
pub use laplace::{
    ball_average_laplacian, concave_harnack_check, convex_local_max_check, harnack_quotient_check,
    local_max_check, mean_value_check, mean_value_constant, mollification_identity_check, morrey_check,
    morrey_constant, quartic_bump, rolle_gradient_point, weak_harnack_laplacian_check, weighted_ball_measure,
    LocalMaxMode, LOCAL_MAX_PUCCI_C, MOLLIFY_C,
};
