use crate::linalg::{self, asymmetry, min_singular_value, spectral_norm, sym, Mat};
use crate::{Error, Result};

use super::frame::{transversality, AsFrame, LagrangianFrame};
use super::space::SymplecticSpace;

/// Darboux chart built from a transversal Lagrangian pair `(Π, Δ)`.
///
/// Coordinates of a vector are `(ζ, z)` with `v = Σ ζ_i e_i + Σ z_i f_i`, where
/// the `e_i` span `Π` and the `f_i` span `Δ`. A subspace transversal to `Δ` is the
/// graph `{(ζ, S ζ)}` and `Π` itself sits at `S = 0`.
#[derive(Debug, Clone)]
pub struct Chart {
    pi: LagrangianFrame,
    delta: LagrangianFrame,
    e: Mat,
    f: Mat,
}

#[derive(Debug, Clone)]
pub struct ChartRep {
    pub chart: Chart,
    pub s: Mat,
}

impl Chart {
    pub fn new(pi: &LagrangianFrame, delta: &LagrangianFrame) -> Result<Self> {
        let space = pi.space();
        let sep = transversality(pi.columns(), delta.columns());
        if sep <= space.rank_tol() {
            return Err(Error::NotTransversal(sep));
        }
        let m = space.pairing(pi.columns(), delta.columns());
        let minv = m.try_inverse().ok_or(Error::NotTransversal(sep))?;
        let e = pi.columns().clone();
        let f = delta.columns() * minv;
        Ok(Chart { pi: pi.clone(), delta: delta.clone(), e, f })
    }

    /// Chart with `Π = vertical` and `Δ = horizontal` in the space's Darboux coordinates.
    pub fn standard(space: &SymplecticSpace) -> Self {
        Chart::new(&space.vertical(), &space.horizontal()).expect("coordinate splitting")
    }

    pub fn space(&self) -> &SymplecticSpace {
        self.pi.space()
    }

    pub fn pi_frame(&self) -> &LagrangianFrame {
        &self.pi
    }

    pub fn delta_frame(&self) -> &LagrangianFrame {
        &self.delta
    }

    /// Darboux basis `[e₁…e_n, f₁…f_n]`.
    pub fn basis(&self) -> Mat {
        linalg::hstack(&self.e, &self.f)
    }

    pub fn e(&self) -> &Mat {
        &self.e
    }

    pub fn f(&self) -> &Mat {
        &self.f
    }

    /// Chart coordinates `(ζ; z)` of the columns of `v`.
    pub fn coords(&self, v: &Mat) -> (Mat, Mat) {
        let space = self.space();
        let zeta = -(space.pairing(&self.f, v));
        let z = space.pairing(&self.e, v);
        (zeta, z)
    }

    /// Raw graph matrix of any `n`-dimensional subspace transversal to `Δ` (no symmetrization).
    pub fn graph_matrix(&self, v: &impl AsFrame) -> Result<Mat> {
        let (zeta, z) = self.coords(v.columns());
        let smin = min_singular_value(&zeta);
        if smin <= self.space().rank_tol() * spectral_norm(&zeta).max(1.0) {
            return Err(Error::NotInChart);
        }
        let inv = zeta.try_inverse().ok_or(Error::NotInChart)?;
        Ok(z * inv)
    }

    /// Chart matrix `S_Λ`, symmetrized after checking the Lagrangian condition.
    pub fn chart_coords(&self, l: &LagrangianFrame) -> Result<ChartRep> {
        let s = self.graph_matrix(l)?;
        let scale = spectral_norm(&s).max(1.0);
        let asym = asymmetry(&s);
        if asym > 1e-6 * scale {
            return Err(Error::NotLagrangian(asym));
        }
        Ok(ChartRep { chart: self.clone(), s: sym(&s) })
    }

    /// The subspace `{(ζ, S ζ)}`.
    pub fn frame_from_chart(&self, s: &Mat) -> Result<LagrangianFrame> {
        LagrangianFrame::new(self.space(), &self.e + &self.f * sym(s))
    }

    /// Unnormalized basis `ζ ↦ (ζ, S ζ)` of the graph of `S`, as vectors of the ambient space.
    pub fn graph_basis(&self, s: &Mat) -> Mat {
        &self.e + &self.f * s
    }
}

pub fn chart_coords(l: &LagrangianFrame, chart: &Chart) -> Result<ChartRep> {
    chart.chart_coords(l)
}

pub fn frame_from_chart(rep: &ChartRep) -> Result<LagrangianFrame> {
    rep.chart.frame_from_chart(&rep.s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_has_zero_matrix() {
        let s = SymplecticSpace::standard(2);
        let chart = Chart::standard(&s);
        let rep = chart.chart_coords(&s.vertical()).unwrap();
        assert!(rep.s.norm() < 1e-15);
    }

    #[test]
    fn identity_graph_n1() {
        let s = SymplecticSpace::standard(1);
        let chart = Chart::standard(&s);
        let f = chart.frame_from_chart(&Mat::identity(1, 1)).unwrap();
        let expect = Mat::from_column_slice(2, 1, &[1.0, 1.0]);
        assert!(linalg::subspace_distance(f.columns(), &(expect / 2f64.sqrt())) < 1e-14);
    }

    #[test]
    fn complement_is_not_in_chart() {
        let s = SymplecticSpace::standard(2);
        let chart = Chart::standard(&s);
        assert!(matches!(chart.chart_coords(&s.horizontal()), Err(Error::NotInChart)));
    }

    #[test]
    fn kernel_of_chart_matrix_is_intersection_with_pi() {
        let s = SymplecticSpace::standard(3);
        let chart = Chart::standard(&s);
        let sm = Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![0.0, 2.0, 0.0]));
        let l = chart.frame_from_chart(&sm).unwrap();
        assert_eq!(l.intersection_dim(&s.vertical()), 2);
    }

    #[test]
    fn darboux_normalization() {
        let s = SymplecticSpace::standard(2);
        let pi = chart_test_frame(&s);
        let chart = Chart::new(&pi, &s.horizontal()).unwrap();
        let b = chart.basis();
        let g = s.pairing(&b, &b);
        assert!((g - s.form()).norm() < 1e-12);
    }

    fn chart_test_frame(s: &SymplecticSpace) -> LagrangianFrame {
        let c = Chart::standard(s);
        c.frame_from_chart(&Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -2.0])).unwrap()
    }
}
