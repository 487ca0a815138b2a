use crate::linalg::{self, hstack, min_singular_value, rank, Mat};
use crate::{Error, Result};

use super::space::SymplecticSpace;

/// Anything carrying an orthonormal column frame in a `2n`-dimensional space.
pub trait AsFrame {
    fn columns(&self) -> &Mat;
}

/// Column-orthonormal frame of an arbitrary subspace (no isotropy required).
#[derive(Debug, Clone)]
pub struct Subspace {
    z: Mat,
}

impl Subspace {
    pub fn new(cols: Mat, tol: f64) -> Result<Self> {
        Ok(Subspace { z: linalg::orthonormalize(&cols, tol)? })
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }
}

impl AsFrame for Subspace {
    fn columns(&self) -> &Mat {
        &self.z
    }
}

/// Orthonormal `2n × n` frame spanning a Lagrangian subspace.
#[derive(Debug, Clone)]
pub struct LagrangianFrame {
    space: SymplecticSpace,
    z: Mat,
}

/// Floor for isotropy checks so that roundoff in well-conditioned constructions passes.
const ISOTROPY_FLOOR: f64 = 1e-11;

impl LagrangianFrame {
    /// Orthonormalizes `cols` and checks rank and isotropy.
    pub fn new(space: &SymplecticSpace, cols: Mat) -> Result<Self> {
        let n = space.n();
        if cols.nrows() != 2 * n || cols.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "frame must be {}x{}, got {}x{}",
                2 * n,
                n,
                cols.nrows(),
                cols.ncols()
            )));
        }
        if !cols.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("frame has non-finite entries".into()));
        }
        let z = linalg::orthonormalize(&cols, space.rank_tol())?;
        let defect = space.pairing(&z, &z).norm();
        let tol = space.rank_tol().max(ISOTROPY_FLOOR) * space.form().norm();
        if defect > tol {
            return Err(Error::NotLagrangian(defect));
        }
        Ok(LagrangianFrame { space: space.clone(), z })
    }

    pub fn space(&self) -> &SymplecticSpace {
        &self.space
    }

    pub fn columns(&self) -> &Mat {
        &self.z
    }

    pub fn isotropy_defect(&self) -> f64 {
        self.space.pairing(&self.z, &self.z).norm()
    }

    /// Image under a linear map of the ambient space.
    pub fn transform(&self, t: &Mat) -> Result<Self> {
        LagrangianFrame::new(&self.space, t * &self.z)
    }

    pub fn distance(&self, other: &impl AsFrame) -> f64 {
        linalg::subspace_distance(&self.z, other.columns())
    }

    pub fn same_subspace(&self, other: &impl AsFrame, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// `dim(self ∩ other)` with the space's rank tolerance.
    pub fn intersection_dim(&self, other: &impl AsFrame) -> usize {
        intersection_dim(&self.z, other.columns(), self.space.rank_tol())
    }

    pub fn is_transversal(&self, other: &impl AsFrame) -> bool {
        transversality(&self.z, other.columns()) > self.space.rank_tol()
    }
}

impl AsFrame for LagrangianFrame {
    fn columns(&self) -> &Mat {
        &self.z
    }
}

/// Smallest singular value of `[A | B]`; zero iff the spans meet (for complementary dimensions).
pub fn transversality(a: &Mat, b: &Mat) -> f64 {
    min_singular_value(&hstack(a, b))
}

pub fn intersection_dim(a: &Mat, b: &Mat, tol: f64) -> usize {
    let r = rank(&hstack(a, b), tol);
    a.ncols() + b.ncols() - r
}

/// Projector onto `v1` along `v0`.
pub fn projector(v0: &impl AsFrame, v1: &impl AsFrame) -> Result<Mat> {
    let (z0, z1) = (v0.columns(), v1.columns());
    let dim = z0.nrows();
    if z0.ncols() + z1.ncols() != dim {
        return Err(Error::InvalidInput("projector needs complementary dimensions".into()));
    }
    let sep = transversality(z0, z1);
    if sep <= super::space::DEFAULT_RANK_TOL {
        return Err(Error::NotTransversal(sep));
    }
    let basis = hstack(z0, z1);
    let inv = basis.try_inverse().ok_or(Error::NotTransversal(sep))?;
    let target = hstack(&Mat::zeros(dim, z0.ncols()), z1);
    Ok(target * inv)
}
