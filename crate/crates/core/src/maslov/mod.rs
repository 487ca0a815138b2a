//! Pair index, Maslov index by chart subdivision, conjugate points and Morse counting.
//!
//! All counts are made in charts `(Π, Δ)` centered at the reference subspace, where
//! the train of `Π` is the set of degenerate `S`.

mod index;
mod pair;
mod walk;

pub use index::{
    conjugate_points, conjugate_points_with, maslov_index, maslov_index_with, morse_index_regular_extremal,
    ConjugatePoint, IndexReport, MaslovOptions, CROSSING_TOL, DEGENERACY_TOL, ENDPOINT_TOL, MERGE_TOL,
};
pub use pair::{pair_index, PairIndex, PAIR_TOL};
pub use walk::{WalkOptions, MAX_DEPTH};

#[cfg(test)]
mod tests;
