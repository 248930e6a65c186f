//! Test-field generators: Poisson and Pucci Dirichlet solves, the closed-form
//! library and lattice random walks.

mod families;
mod iterate;
mod library;
mod poisson;
mod pucci;
mod walk;

pub use families::{pplus_solutions, spike_supersolutions, SolvedField};
pub use iterate::{BoundaryData, Solution, SolverConfig, SolverMode};
pub use library::{field_library, FieldParams, LibraryField, FAMILIES};
pub use poisson::solve_poisson;
pub use pucci::solve_pucci;
pub use walk::{
    discrete_hitting_probability, probabilistic_harnack_check, random_walk_hitting, HittingEstimate, WalkConfig,
    MIN_WALKS, PROB_HARNACK_C,
};
