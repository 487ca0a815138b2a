//! Linear symplectic algebra: spaces, Lagrangian frames, Darboux charts, projectors,
//! inertia indices and transversal complements.

mod chart;
mod complement;
mod frame;
mod inertia;
pub mod sampling;
mod space;

pub use chart::{chart_coords, frame_from_chart, Chart, ChartRep};
pub use complement::{
    transversal_complement, transversal_complement_with, Complement, ComplementSearch, CANDIDATE_BOUND,
};
pub use frame::{intersection_dim, projector, transversality, AsFrame, LagrangianFrame, Subspace};
pub use inertia::{ind, inertia, matrix_inertia, Inertia, QuadraticForm};
pub use space::{darboux_basis, standard_form, standard_space, SymplecticSpace, DEFAULT_RANK_TOL};
