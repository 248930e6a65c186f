//! Numerical laboratory for the regularity theory of uniformly elliptic
//! equations: grids and norms, Pucci operators, contact sets, covering
//! lemmas, measured regularity estimates and reference solvers.

pub mod contact;
pub mod coverings;
pub mod error;
pub mod grid;
pub mod io;
pub mod operators;
pub mod quadrature;
pub mod regularity;
pub mod report;
pub mod solvers;

pub use error::{LabError, Result};
pub use grid::{pt, Grid, Point, Region, ScalarField};
pub use report::{CheckReport, EstimateConstants};
