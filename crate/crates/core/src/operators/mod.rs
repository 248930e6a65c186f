//! Discrete differential operators, Pucci extremal operators and the
//! lattice fractional Laplacian.

mod diff;
mod fractional;
mod matrix;
mod pucci;

pub use diff::{
    gradient, gradient_at, hessian, hessian_at, laplacian, laplacian_at, linear_apply,
    pucci_field, pucci_sandwich_residual, second_difference, LinearCoefficients, MatrixField,
    VectorField,
};
pub use fractional::{
    fractional_laplacian, fractional_laplacian_at, near_field_moment, FractionalParams,
    FractionalSample, TailSpec,
};
pub use matrix::SymMatrix;
pub use pucci::{pucci, pucci_minus, pucci_plus, Ellipticity, PucciSign};
