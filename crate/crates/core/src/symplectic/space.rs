use std::sync::Arc;

use crate::linalg::{hstack, min_singular_value, spectral_norm, Mat, Vec64};
use crate::{Error, Result};

use super::frame::LagrangianFrame;

pub const DEFAULT_RANK_TOL: f64 = 1e-9;

#[derive(Debug)]
struct SpaceData {
    n: usize,
    form: Mat,
    /// Darboux basis `D` with `Dᵀ σ D = J`.
    darboux: Mat,
    darboux_inv: Mat,
    rank_tol: f64,
}

/// Even-dimensional real space with a fixed nondegenerate skew form.
#[derive(Debug, Clone)]
pub struct SymplecticSpace(Arc<SpaceData>);

/// Standard block form `[[0, I], [−I, 0]]`.
pub fn standard_form(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

pub fn standard_space(n: usize) -> SymplecticSpace {
    SymplecticSpace::standard(n)
}

impl SymplecticSpace {
    pub fn standard(n: usize) -> Self {
        assert!(n >= 1, "half-dimension must be positive");
        let id = Mat::identity(2 * n, 2 * n);
        SymplecticSpace(Arc::new(SpaceData {
            n,
            form: standard_form(n),
            darboux: id.clone(),
            darboux_inv: id,
            rank_tol: DEFAULT_RANK_TOL,
        }))
    }

    /// Space with an arbitrary skew nondegenerate form.
    pub fn with_form(form: Mat) -> Result<Self> {
        let (r, c) = form.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::InvalidInput("form must be square of even positive size".into()));
        }
        let scale = spectral_norm(&form);
        if (&form + form.transpose()).norm() > DEFAULT_RANK_TOL * scale.max(1.0) {
            return Err(Error::InvalidInput("form is not skew-symmetric".into()));
        }
        if min_singular_value(&form) <= DEFAULT_RANK_TOL * scale {
            return Err(Error::InvalidInput("form is degenerate".into()));
        }
        let basis: Vec<Vec64> = (0..r).map(|i| Mat::identity(r, r).column(i).into_owned()).collect();
        let darboux = darboux_basis(&form, &basis)?;
        let darboux_inv = darboux.clone().try_inverse().ok_or(Error::RankDeficient)?;
        Ok(SymplecticSpace(Arc::new(SpaceData {
            n: r / 2,
            form,
            darboux,
            darboux_inv,
            rank_tol: DEFAULT_RANK_TOL,
        })))
    }

    pub fn with_rank_tol(&self, rank_tol: f64) -> Self {
        let d = &self.0;
        SymplecticSpace(Arc::new(SpaceData {
            n: d.n,
            form: d.form.clone(),
            darboux: d.darboux.clone(),
            darboux_inv: d.darboux_inv.clone(),
            rank_tol,
        }))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn dim(&self) -> usize {
        2 * self.0.n
    }

    pub fn form(&self) -> &Mat {
        &self.0.form
    }

    pub fn rank_tol(&self) -> f64 {
        self.0.rank_tol
    }

    pub fn darboux(&self) -> &Mat {
        &self.0.darboux
    }

    pub fn omega(&self, a: &Vec64, b: &Vec64) -> f64 {
        (a.transpose() * &self.0.form * b)[(0, 0)]
    }

    /// `Aᵀ σ B` for column blocks.
    pub fn pairing(&self, a: &Mat, b: &Mat) -> Mat {
        a.transpose() * &self.0.form * b
    }

    /// The subspace `{(ζ, 0)}` in Darboux coordinates.
    pub fn vertical(&self) -> LagrangianFrame {
        let n = self.n();
        let cols = self.0.darboux.columns(0, n).into_owned();
        LagrangianFrame::new(self, cols).expect("vertical subspace is Lagrangian")
    }

    /// The subspace `{(0, z)}` in Darboux coordinates.
    pub fn horizontal(&self) -> LagrangianFrame {
        let n = self.n();
        let cols = self.0.darboux.columns(n, n).into_owned();
        LagrangianFrame::new(self, cols).expect("horizontal subspace is Lagrangian")
    }

    /// Lagrangian `J`-rotation of a Lagrangian frame, transversal to it.
    pub fn canonical_complement(&self, z: &Mat) -> Mat {
        let j = standard_form(self.n());
        &self.0.darboux * j * (&self.0.darboux_inv * z)
    }

    /// `‖Tᵀ σ T − σ‖ / ‖σ‖`.
    pub fn symplectic_defect(&self, t: &Mat) -> f64 {
        (t.transpose() * &self.0.form * t - &self.0.form).norm() / self.0.form.norm()
    }

    pub fn same_as(&self, other: &SymplecticSpace) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.form == other.0.form)
    }
}

/// Symplectic Gram–Schmidt: returns `[e₁…e_k, f₁…f_k]` with `σ(e_i, f_j) = δ_ij`.
pub fn darboux_basis(form: &Mat, vectors: &[Vec64]) -> Result<Mat> {
    let mut rest: Vec<Vec64> = vectors.to_vec();
    let mut es = Vec::new();
    let mut fs = Vec::new();
    let omega = |a: &Vec64, b: &Vec64| (a.transpose() * form * b)[(0, 0)];
    while !rest.is_empty() {
        let scale = rest.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if scale < 1e-12 {
            break;
        }
        let ei = rest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .map(|(i, _)| i)
            .expect("nonempty");
        let e = rest.remove(ei);
        let e = &e / e.norm();
        let (fi, best) = rest
            .iter()
            .enumerate()
            .map(|(i, v)| (i, omega(&e, v)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .ok_or(Error::InvalidInput("odd-dimensional symplectic span".into()))?;
        if best.abs() < 1e-12 {
            return Err(Error::InvalidInput("vectors do not span a symplectic subspace".into()));
        }
        let f = rest.remove(fi) / best;
        rest = rest
            .into_iter()
            .map(|v| {
                let a = omega(&v, &f);
                let b = omega(&v, &e);
                &v - &e * a + &f * b
            })
            .filter(|v| v.norm() > 1e-10 * scale)
            .collect();
        es.push(e);
        fs.push(f);
    }
    let e = Mat::from_columns(&es);
    let f = Mat::from_columns(&fs);
    Ok(hstack(&e, &f))
}
