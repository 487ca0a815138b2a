use crate::linalg::{block2, hstack, nullspace_abs, rank_abs, sorted_symmetric_eigenvalues, vstack, Mat};
use crate::symplectic::LagrangianFrame;
use crate::{Error, Result};

/// Absolute tolerance for intersections of orthonormal frames.
pub const PAIR_TOL: f64 = 1e-9;

/// Pair index stored doubled, so half-integer values stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    pub doubled: i64,
}

impl PairIndex {
    /// The index itself, or `Parity` when it is a half-integer.
    pub fn value(self) -> Result<i64> {
        if self.doubled % 2 == 0 {
            Ok(self.doubled / 2)
        } else {
            Err(Error::Parity(self.doubled))
        }
    }

    pub fn as_f64(self) -> f64 {
        self.doubled as f64 / 2.0
    }
}

/// `dim(Π ∩ Λ)` for Lagrangian `Λ`: `v ∈ Λ` iff `σ(v, Λ) = 0`.
fn meet_dim(pi: &LagrangianFrame, others: &[&LagrangianFrame]) -> usize {
    let space = pi.space();
    let rows: Vec<Mat> = others.iter().map(|l| space.pairing(l.columns(), pi.columns())).collect();
    let stacked = rows.iter().skip(1).fold(rows[0].clone(), |acc, r| vstack(&acc, r));
    space.n() - rank_abs(&stacked, PAIR_TOL)
}

/// `ind_Π(Λ₀, Λ₁) = ind q + ½(dim Π∩Λ₀ + dim Π∩Λ₁) − dim(Π∩Λ₀∩Λ₁)`, doubled.
///
/// `q(x) = σ(x₁, x₀)` on `(Λ₀ + Λ₁) ∩ Π`, where `x = x₀ + x₁` with `xᵢ ∈ Λᵢ`.
pub fn pair_index(pi: &LagrangianFrame, l0: &LagrangianFrame, l1: &LagrangianFrame) -> PairIndex {
    let space = pi.space();
    let n = space.n();
    let (z0, z1) = (l0.columns(), l1.columns());
    // Pairs (a, b) with Z₀a + Z₁b ∈ Π.
    let constraint = space.pairing(pi.columns(), &hstack(z0, z1));
    let kernel = nullspace_abs(&constraint, PAIR_TOL);
    let ind_q = if kernel.ncols() == 0 {
        0
    } else {
        let c = space.pairing(z1, z0);
        let zero = Mat::zeros(n, n);
        let form = block2(&zero, &(c.transpose() * 0.5), &(&c * 0.5), &zero);
        let restricted = kernel.transpose() * form * &kernel;
        neg_count(&restricted)
    };
    let d0 = meet_dim(pi, &[l0]);
    let d1 = meet_dim(pi, &[l1]);
    let d01 = meet_dim(pi, &[l0, l1]);
    PairIndex { doubled: 2 * ind_q as i64 + d0 as i64 + d1 as i64 - 2 * d01 as i64 }
}

fn neg_count(m: &Mat) -> usize {
    sorted_symmetric_eigenvalues(m).iter().filter(|&&v| v < -PAIR_TOL).count()
}
