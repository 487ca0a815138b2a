use std::sync::Arc;

use crate::curve::{curvature_form, GrassmannCurve};
use crate::linalg::{coefficients, dominant_span, hstack, nullspace, rank_abs, sorted_symmetric_eigenvalues, sym, Mat, Vec64};
use crate::symplectic::{standard_form, standard_space};
use crate::{Error, Result};

use super::flow::{padding, tune_flow_curve, FlowTable};
use super::system::HamiltonianSystem;

/// `|H⃗_y| ≤ TANGENT_TOL · |H⃗|` means the field is tangent to the fiber.
pub const TANGENT_TOL: f64 = 1e-8;

/// Symplectic reduction of `Σ` by the line `γ`: `γ^∠/γ` realized as a subspace
/// `W = γ^∠ ∩ g′^∠` with a Darboux basis `[E F]`.
#[derive(Debug, Clone)]
pub struct LineReduction {
    pub gamma: Vec64,
    /// Vertical vector with `σ(γ, g′) = 1`.
    pub dual: Vec64,
    /// `2n × (2n − 2)`; `E` spans `vertical ∩ γ^∠`.
    pub basis: Mat,
}

impl LineReduction {
    /// Requires `γ` outside the vertical subspace.
    pub fn new(gamma: &Vec64) -> Result<Self> {
        let dim = gamma.len();
        let n = dim / 2;
        if n < 2 {
            return Err(Error::TrivialQuotient);
        }
        let norm = gamma.norm();
        if norm == 0.0 {
            return Err(Error::ReductionRefused("the Hamiltonian field vanishes at the initial point".into()));
        }
        let gy = gamma.rows(n, n).into_owned();
        if gy.norm() <= TANGENT_TOL * norm {
            return Err(Error::TangentFiber);
        }
        let omega = standard_form(n);
        let mut dual = Vec64::zeros(dim);
        dual.rows_mut(0, n).copy_from(&(-&gy / gy.norm_squared()));

        let a = nullspace(&Mat::from_row_slice(1, n, gy.as_slice()), 1e-12);
        let mut e = Mat::zeros(dim, n - 1);
        e.view_mut((0, 0), (n, n - 1)).copy_from(&a);

        let mut constraints = Mat::zeros(2, dim);
        constraints.row_mut(0).copy_from(&(gamma.transpose() * &omega));
        constraints.row_mut(1).copy_from(&(dual.transpose() * &omega));
        let w = nullspace(&constraints, 1e-12);
        let ew = e.transpose() * &omega * &w;
        let c = ew.svd(true, true).solve(&Mat::identity(n - 1, n - 1), 1e-14).map_err(|e| Error::InvalidInput(e.into()))?;
        let mut f = &w * c;
        let skew = f.transpose() * &omega * &f;
        f += &e * (skew * 0.5);
        Ok(LineReduction { gamma: gamma.clone(), dual, basis: hstack(&e, &f) })
    }

    pub fn reduced_dim(&self) -> usize {
        self.basis.ncols() / 2
    }

    /// Coordinates in `[E F]` of `v − σ(v, g′) γ` for vectors `v ∈ γ^∠`.
    pub fn project(&self, v: &Mat) -> Mat {
        let n = self.gamma.len() / 2;
        let omega = standard_form(n);
        let along = v.transpose() * &omega * &self.dual;
        let w = v - &self.gamma * along.transpose();
        let jr = standard_form(n - 1);
        -jr * self.basis.transpose() * &omega * w
    }

    /// Orthonormal basis (columns) of `Λ ∩ γ^∠` for a frame of `Λ`.
    pub fn meet_basis(&self, frame: &Mat) -> Mat {
        let n = frame.ncols();
        let omega = standard_form(frame.nrows() / 2);
        let r = Mat::from_row_slice(1, n, (frame.transpose() * &omega * &self.gamma).as_slice());
        if r.norm() <= 1e-12 * frame.norm() * self.gamma.norm() {
            return Mat::identity(n, n);
        }
        nullspace(&r, 1e-12)
    }

    /// Frame of `(Λ ∩ γ^∠ + γ)/γ` in reduced coordinates.
    pub fn reduce_frame(&self, frame: &Mat) -> Mat {
        let k = self.meet_basis(frame);
        dominant_span(&self.project(&(frame * k)), self.reduced_dim())
    }
}

#[derive(Debug, Clone)]
pub struct ReducedJacobiCurve {
    pub curve: GrassmannCurve,
    pub full: GrassmannCurve,
    pub reduction: LineReduction,
}

/// Eigenvalues of `r_{Λ^γ}(t) − r_Λ(t)|_{Λ(t) ∩ γ^∠}` in a shared basis.
#[derive(Debug, Clone)]
pub struct CurvatureGap {
    pub at: f64,
    pub eigenvalues: Vec<f64>,
    pub scale: f64,
}

impl CurvatureGap {
    pub fn rank(&self, tol: f64) -> usize {
        let m = Mat::from_diagonal(&Vec64::from_vec(self.eigenvalues.clone()));
        rank_abs(&m, tol * self.scale.max(1.0))
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

impl ReducedJacobiCurve {
    pub fn curvature_gap(&self, t: f64) -> Result<CurvatureGap> {
        let full = curvature_form(&self.full, t)?;
        let red = curvature_form(&self.curve, t)?;
        let k = self.reduction.meet_basis(&full.basis);
        let restricted = k.transpose() * full.form.matrix() * &k;
        let image = self.reduction.project(&(&full.basis * &k));
        let tmat = coefficients(&red.basis, &image);
        let reduced = tmat.transpose() * red.form.matrix() * &tmat;
        let diff = sym(&(&reduced - &restricted));
        let scale = restricted.norm().max(reduced.norm());
        Ok(CurvatureGap { at: t, eigenvalues: sorted_symmetric_eigenvalues(&diff), scale })
    }
}

/// Jacobi curve of the Hamiltonian field in `γ^∠/γ`, `γ = ℝ H⃗(z0)`.
pub fn reduced_jacobi_curve(sys: &HamiltonianSystem, z0: &Vec64, horizon: f64, step: f64) -> Result<ReducedJacobiCurve> {
    sys.check_point(z0)?;
    let reduction = LineReduction::new(&sys.field(z0))?;
    let table = Arc::new(FlowTable::new(sys, z0, horizon, step, padding(horizon, step))?);
    let n = sys.n();
    let t2 = table.clone();
    let full = tune_flow_curve(GrassmannCurve::new(&standard_space(n), (0.0, horizon), move |t| t2.jacobi_frame(t))?, step)?;
    let red = reduction.clone();
    let curve = GrassmannCurve::new(&standard_space(n - 1), (0.0, horizon), move |t| {
        table.jacobi_frame(t).map(|f| red.reduce_frame(&f))
    })?;
    let curve = tune_flow_curve(curve, step)?;
    Ok(ReducedJacobiCurve { curve, full, reduction })
}
