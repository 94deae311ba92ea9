//! Lattice statics for force-based atomistic-to-continuum coupling on 2D Bravais lattices.

pub mod error;
pub mod fold;
pub mod lattice;
pub mod models;
pub mod poly;
pub mod solver;
pub mod stability;
pub mod stencil;

pub use error::{Error, Result};
pub use fold::{fold, fold_scalar, Extents, FoldedSystem, Side};
pub use lattice::{Grid, GridFunction, Lattice, SpectralFunction};
pub use models::{LoadMode, Model, Region};
pub use solver::{
    convergence_study, solve_equilibrium, ConvergenceTable, EquilibriumProblem, EquilibriumSolution, Scheme,
    SolverMethod, SolverOptions,
};
pub use stability::{full_stability_report, StabilityOptions, StabilityReport, Verdict};
pub use stencil::Stencil;
