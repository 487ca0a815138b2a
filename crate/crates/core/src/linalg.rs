//! Small dense helpers shared by the geometric modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vec64 = DVector<f64>;

pub fn sym(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).norm()
}

pub fn spectral_norm(m: &Mat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Singular values in decreasing order (nalgebra does not guarantee ordering).
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn min_singular_value(m: &Mat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

/// Numerical rank with tolerance relative to the largest singular value.
pub fn rank(m: &Mat, tol: f64) -> usize {
    let s = singular_values(m);
    match s.first() {
        None => 0,
        Some(&top) if top == 0.0 => 0,
        Some(&top) => s.iter().filter(|&&v| v > tol * top).count(),
    }
}

/// Orthonormal basis of the column span. Fails if the columns are dependent.
pub fn orthonormalize(m: &Mat, tol: f64) -> Result<Mat> {
    let k = m.ncols();
    if k == 0 {
        return Ok(m.clone());
    }
    let svd = m.clone().svd(true, false);
    let s = &svd.singular_values;
    let top = s.max();
    if top == 0.0 || s.min() <= tol * top {
        return Err(Error::RankDeficient);
    }
    let q = m.clone().qr().q();
    Ok(q.columns(0, k).into_owned())
}

/// Orthonormal basis of the column span keeping the `k` dominant directions.
pub fn dominant_span(m: &Mat, k: usize) -> Mat {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let cols: Vec<Vec64> = idx.iter().take(k).map(|&i| u.column(i).into_owned()).collect();
    Mat::from_columns(&cols)
}

/// Orthonormal basis of the kernel of `m` (columns), with relative tolerance.
pub fn nullspace(m: &Mat, tol: f64) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad to a square matrix so the SVD returns a full right basis.
    let rows = r.max(c);
    let mut sq = Mat::zeros(rows, c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let top = svd.singular_values.max();
    let cols: Vec<Vec64> = (0..c)
        .filter(|&i| top == 0.0 || svd.singular_values[i] <= tol * top)
        .map(|i| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        Mat::zeros(c, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Kernel basis keeping singular values at or below an absolute threshold.
pub fn nullspace_abs(m: &Mat, tol: f64) -> Mat {
    let (r, c) = m.shape();
    if c == 0 {
        return Mat::zeros(0, 0);
    }
    let rows = r.max(c);
    let mut sq = Mat::zeros(rows, c);
    sq.view_mut((0, 0), (r, c)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let cols: Vec<Vec64> =
        (0..c).filter(|&i| svd.singular_values[i] <= tol).map(|i| vt.row(i).transpose()).collect();
    if cols.is_empty() {
        Mat::zeros(c, 0)
    } else {
        Mat::from_columns(&cols)
    }
}

/// Number of singular values above an absolute threshold.
pub fn rank_abs(m: &Mat, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&v| v > tol).count()
}

/// Least-squares coefficients `c` with `basis · c ≈ v`.
pub fn coefficients(basis: &Mat, v: &Mat) -> Mat {
    let svd = basis.clone().svd(true, true);
    svd.solve(v, 1e-14).expect("svd solve")
}

/// Sine of the largest principal angle between two equal-dimensional orthonormal frames.
pub fn subspace_distance(a: &Mat, b: &Mat) -> f64 {
    let c = a.transpose() * b;
    let smin = min_singular_value(&c).min(1.0);
    (1.0 - smin * smin).max(0.0).sqrt()
}

pub fn sorted_symmetric_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut e: Vec<f64> = SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| a.total_cmp(b));
    e
}

/// Symmetric positive definite square root factor `L` with `Lᵀ m L = I`.
pub fn inverse_sqrt_spd(m: &Mat) -> Option<Mat> {
    let eig = SymmetricEigen::new(sym(m));
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return None;
    }
    let d = Mat::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    Some(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn block2(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Mat {
    let (r1, c1) = a.shape();
    let (r2, c2) = d.shape();
    let mut m = Mat::zeros(r1 + r2, c1 + c2);
    m.view_mut((0, 0), (r1, c1)).copy_from(a);
    m.view_mut((0, c1), (r1, c2)).copy_from(b);
    m.view_mut((r1, 0), (r2, c1)).copy_from(c);
    m.view_mut((r1, c1), (r2, c2)).copy_from(d);
    m
}

pub fn vstack(a: &Mat, b: &Mat) -> Mat {
    let mut m = Mat::zeros(a.nrows() + b.nrows(), a.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), 0), b.shape()).copy_from(b);
    m
}

pub fn hstack(a: &Mat, b: &Mat) -> Mat {
    let mut m = Mat::zeros(a.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((0, a.ncols()), b.shape()).copy_from(b);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix_is_complete() {
        let m = Mat::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let n = nullspace(&m, 1e-12);
        assert_eq!(n.ncols(), 2);
        assert!((&m * &n).norm() < 1e-14);
    }

    #[test]
    fn subspace_distance_detects_equal_spans() {
        let a = Mat::from_column_slice(2, 1, &[1.0, 0.0]);
        let b = Mat::from_column_slice(2, 1, &[-1.0, 0.0]);
        assert!(subspace_distance(&a, &b) < 1e-12);
        let c = Mat::from_column_slice(2, 1, &[0.0, 1.0]);
        assert!((subspace_distance(&a, &c) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_sqrt_normalizes() {
        let m = Mat::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let l = inverse_sqrt_spd(&m).unwrap();
        assert!((l.transpose() * &m * &l - Mat::identity(2, 2)).norm() < 1e-12);
    }
}
