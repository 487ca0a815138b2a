//! Jacobi curves in Lagrange Grassmannians.
//!
//! Subspaces of a symplectic space are carried as column frames (`2n × n` matrices)
//! with the standard form `σ((ζ′,z′),(ζ″,z″)) = ζ′z″ − ζ″z′`. Phase points of a
//! Hamiltonian system are stacked as `z = (x, y)` with `x` the fiber (momentum)
//! coordinates and `y` the base coordinates, so the vertical subspace is spanned by
//! the first `n` coordinate vectors.
//!
//! Module map:
//! - [`symplectic`]: spaces, Lagrangian frames, charts, projectors, inertia.
//! - [`curve`]: curves of Lagrangian subspaces, velocity forms, cross-ratios,
//!   derivative curves, curvature and structural transport.
//! - [`maslov`]: pair index, Maslov index, conjugate points, Morse counting.
//! - [`lderivative`]: Hessians on constraint kernels and the subspaces `Λ(A,Q)`.
//! - [`hamiltonian`]: systems, flows, Jacobi curves, reduction, connections.
//! - [`analysis`]: comparison bounds, Morse pipeline, hyperbolicity certificates.

pub mod analysis;
pub mod curve;
pub mod error;
pub mod hamiltonian;
pub mod lderivative;
pub mod linalg;
pub mod maslov;
pub mod symplectic;

pub use error::{Error, Result};
