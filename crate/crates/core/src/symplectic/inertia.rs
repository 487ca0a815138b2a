use crate::linalg::{asymmetry, sorted_symmetric_eigenvalues, spectral_norm, sym, Mat};
use crate::{Error, Result};

/// Symmetric matrix viewed as a quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: Mat,
}

impl QuadraticForm {
    /// Accepts matrices symmetric to `1e-8` relative and stores the symmetric part.
    pub fn new(m: Mat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput("quadratic form needs a square matrix".into()));
        }
        let scale = spectral_norm(&m).max(1e-300);
        if asymmetry(&m) > 1e-8 * scale.max(1.0) {
            return Err(Error::InvalidInput("quadratic form matrix is not symmetric".into()));
        }
        Ok(QuadraticForm { matrix: sym(&m) })
    }

    pub fn from_symmetric_part(m: &Mat) -> Self {
        QuadraticForm { matrix: sym(m) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        sorted_symmetric_eigenvalues(&self.matrix)
    }

    pub fn inertia(&self, rank_tol: f64) -> Inertia {
        inertia(self, rank_tol)
    }

    /// Form in new variables: `Tᵀ Q T`.
    pub fn congruent(&self, t: &Mat) -> QuadraticForm {
        QuadraticForm::from_symmetric_part(&(t.transpose() * &self.matrix * t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Inertia {
    pub neg: usize,
    pub zero: usize,
    pub pos: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.neg + self.zero + self.pos
    }

    pub fn is_positive_definite(&self) -> bool {
        self.neg == 0 && self.zero == 0 && self.pos > 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.pos == 0 && self.zero == 0 && self.neg > 0
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }
}

pub fn inertia(q: &QuadraticForm, rank_tol: f64) -> Inertia {
    inertia_of_eigenvalues(&q.eigenvalues(), rank_tol)
}

/// Inertia of a symmetric matrix given directly.
pub fn matrix_inertia(m: &Mat, rank_tol: f64) -> Inertia {
    inertia_of_eigenvalues(&sorted_symmetric_eigenvalues(m), rank_tol)
}

/// Negative index of a symmetric matrix.
pub fn ind(m: &Mat, rank_tol: f64) -> usize {
    matrix_inertia(m, rank_tol).neg
}

fn inertia_of_eigenvalues(eigs: &[f64], rank_tol: f64) -> Inertia {
    let scale = eigs.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 {
        return Inertia { neg: 0, zero: eigs.len(), pos: 0 };
    }
    let thr = rank_tol * scale;
    let neg = eigs.iter().filter(|&&l| l < -thr).count();
    let pos = eigs.iter().filter(|&&l| l > thr).count();
    Inertia { neg, zero: eigs.len() - neg - pos, pos }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn diagonal_readoff() {
        let q = QuadraticForm::new(Mat::from_diagonal(&DVector::from_vec(vec![-1.0, 0.0, 2.0]))).unwrap();
        assert_eq!(inertia(&q, 1e-9), Inertia { neg: 1, zero: 1, pos: 1 });
    }

    #[test]
    fn zero_form() {
        let q = QuadraticForm::new(Mat::zeros(4, 4)).unwrap();
        assert_eq!(inertia(&q, 1e-9), Inertia { neg: 0, zero: 4, pos: 0 });
    }

    #[test]
    fn rejects_asymmetric() {
        assert!(QuadraticForm::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0])).is_err());
    }
}
