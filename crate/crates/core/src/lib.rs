//! Discrete Hodge theory on closed triangulated manifolds: admissible
//! coverings, local Poisson solves glued by partitions of unity, the raising
//! steps iteration, and spectral-gap Hodge decompositions.

pub mod covering;
pub mod dec;
pub mod error;
pub mod hodge;
pub mod linalg;
pub mod local;
pub mod mesh;
pub mod par;
pub mod rsm;
pub mod spectral;
pub mod workspace;

pub use error::{HodgeError, Result};
pub use mesh::{generate_test_manifold, load_mesh, save_mesh, ManifoldKind, SimplicialManifold};
pub use workspace::{Workspace, WorkspaceOptions};
