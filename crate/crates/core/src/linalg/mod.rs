//! Linear algebra kernels shared by every layer.

mod cg;
mod cholesky;
mod eigen;
mod rank;
mod sparse;

pub use cg::{pcg, CgOutcome, CgSettings};
pub use cholesky::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use eigen::{dense_lowest, largest_eigenvalue_estimate, lowest_eigenpairs, shift_invert_lowest, EigenMethod, EigenPairs};
pub use rank::rank_mod_p;
pub use sparse::{add, axpy, dot, norm2, scaled, sub, wdot, CsrMatrix};
