//! Sliding test-function families, contact sets, inf/sup-convolutions, the
//! gradient transport map and the estimates built on them.

mod checks;
pub(crate) mod envelope;
mod family;
mod set;

pub use checks::{
    abp_bound, abp_constant, aleksandrov_check, aleksandrov_constant, area_formula_check,
    boundary_layer_fraction, hessian_contact_set, hessian_contact_tolerance, localization_check,
    measure_constant, measure_estimate_check, planar_contact_set, profile_geometry,
    pucci_positive_norm, random_convex_field, semiconvex_field, ProfileGeometry,
};
pub use envelope::{inf_convolution, paraboloid_envelope, sup_convolution};
pub use family::{Family, ParaboloidFamily, ParaboloidSign, RadialProfileFamily};
pub use set::{contact_set, transport_map, ContactEntry, ContactSet, TransportEntry, TransportRecord};
