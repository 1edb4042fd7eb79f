//! Dirichlet problems on covering balls.

mod patch;
mod solver;

pub use patch::{extract_patch, Patch};
pub use solver::{
    chart_norm_comparison, harmonic_extension, local_czi_check, neumann_series_solve, solve_local_dirichlet,
    DirichletOperator, DirichletSolution, FlatMeasures, LocalSolver, NeumannOutcome, DIRECT_LIMIT,
};
pub(crate) use solver::dirichlet_diagnostics;
